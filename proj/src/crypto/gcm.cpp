#include "teesim/crypto/gcm.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <stdexcept>

#include "teesim/errors.hpp"

namespace teesim::crypto {
namespace {

// CTR blocks for the keystream start at counter 2; 1 is J0.
constexpr std::uint64_t kFirstCtr = 2;
constexpr std::uint64_t kCtrLimit = 0xffffffffull;
constexpr std::size_t kSegmentBlocks = 4096;  // parallel CTR granularity (64 KiB)

std::array<std::uint8_t, 16> counter_block(const std::array<std::uint8_t, 12>& iv, std::uint32_t c) {
    std::array<std::uint8_t, 16> b;
    std::memcpy(b.data(), iv.data(), 12);
    store_be32(b.data() + 12, c);
    return b;
}

}  // namespace

SymmetricKey SymmetricKey::from(ByteView b) {
    if (b.size() != 32) throw std::invalid_argument("SymmetricKey needs 32 bytes");
    SymmetricKey k;
    std::copy(b.begin(), b.end(), k.bytes.begin());
    return k;
}

std::array<std::uint8_t, 12> Nonce::iv() const {
    std::array<std::uint8_t, 12> v;
    std::memcpy(v.data(), channel_id.data(), 8);
    store_be32(v.data() + 8, counter);
    return v;
}

Nonce Nonce::from_iv(ByteView iv12) {
    if (iv12.size() != 12) throw std::invalid_argument("nonce needs a 12-byte IV");
    Nonce n;
    std::memcpy(n.channel_id.data(), iv12.data(), 8);
    n.counter = load_be32(iv12.data() + 8);
    return n;
}

std::size_t chunk_count(std::size_t len, std::size_t chunk_size) {
    return chunk_size == 0 ? 0 : (len + chunk_size - 1) / chunk_size;
}

bool constant_time_equal(ByteView a, ByteView b) {
    if (a.size() != b.size()) return false;
    std::uint8_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d |= a[i] ^ b[i];
    return d == 0;
}

Gcm::Gcm(const SymmetricKey& key, Backend backend)
    : aes_(key.bytes.data(), backend), h_{}, ghash_([&] {
          aes_.encrypt_block(h_, h_);
          return h_;
      }(), backend) {}

void Gcm::ctr_at(const std::array<std::uint8_t, 12>& iv, std::uint64_t byte_offset,
                 const std::uint8_t* in, std::uint8_t* out, std::size_t len) const {
    if (len == 0) return;
    std::uint64_t last = kFirstCtr + (byte_offset + len - 1) / 16;
    if (last > kCtrLimit) throw NonceExhausted();
    std::uint64_t blk = byte_offset / 16;
    std::size_t skip = byte_offset % 16;
    if (skip) {
        // partial leading block
        std::uint8_t ks[16] = {}, zero[16] = {};
        auto cb = counter_block(iv, std::uint32_t(kFirstCtr + blk));
        aes_.ctr_xor(cb.data(), zero, ks, 16);
        std::size_t n = std::min<std::size_t>(16 - skip, len);
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i] ^ ks[skip + i];
        in += n, out += n, len -= n, ++blk;
    }
    if (len == 0) return;
    auto cb = counter_block(iv, std::uint32_t(kFirstCtr + blk));
    aes_.ctr_xor(cb.data(), in, out, len);
}

Bytes Gcm::ctr_keystream(const Nonce& nonce, std::uint64_t offset_block, std::uint64_t n_blocks,
                         Exec exec) const {
    if (n_blocks == 0) return {};
    if (offset_block > kCtrLimit || kFirstCtr + offset_block + n_blocks - 1 > kCtrLimit)
        throw NonceExhausted();
    Bytes out(n_blocks * 16, 0);
    auto iv = nonce.iv();
    std::int64_t segs = std::int64_t((n_blocks + kSegmentBlocks - 1) / kSegmentBlocks);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel && segs > 1)
    for (std::int64_t s = 0; s < segs; ++s) {
        std::uint64_t b0 = std::uint64_t(s) * kSegmentBlocks;
        std::uint64_t nb = std::min<std::uint64_t>(kSegmentBlocks, n_blocks - b0);
        std::uint8_t* p = out.data() + b0 * 16;
        auto cb = counter_block(iv, std::uint32_t(kFirstCtr + offset_block + b0));
        aes_.ctr_xor(cb.data(), p, p, nb * 16);
    }
    return out;
}

MacTag Gcm::gmac(ByteView iv12, ByteView aad, ByteView data) const {
    if (iv12.size() != 12) throw std::invalid_argument("GCM IV must be 96 bits");
    std::uint8_t x[16] = {};
    ghash_.update_padded(x, aad);
    ghash_.update_padded(x, data);
    ghash_.update_lengths(x, aad.size(), data.size());
    std::uint8_t j0[16], ek[16];
    std::memcpy(j0, iv12.data(), 12);
    store_be32(j0 + 12, 1);
    aes_.encrypt_block(j0, ek);
    MacTag t;
    for (int i = 0; i < 16; ++i) t[i] = x[i] ^ ek[i];
    return t;
}

Bytes Gcm::encrypt(ByteView iv12, ByteView aad, ByteView plaintext, MacTag& tag) const {
    auto iv = Nonce::from_iv(iv12).iv();
    Bytes ct(plaintext.size());
    ctr_at(iv, 0, plaintext.data(), ct.data(), ct.size());
    tag = gmac(iv12, aad, ct);
    return ct;
}

MacTag Gcm::chunk_tag(const Nonce& nonce, std::size_t index, ByteView aad_prefix, ByteView ct) const {
    // J0_i: IV with the chunk index folded into its first two bytes
    auto iv = nonce.iv();
    iv[0] ^= std::uint8_t(index >> 8);
    iv[1] ^= std::uint8_t(index);
    Bytes aad(aad_prefix.begin(), aad_prefix.end());
    aad.resize(aad.size() + 2);
    store_be16(aad.data() + aad.size() - 2, std::uint16_t(index));
    return gmac(iv, aad, ct);
}

SealedMessage Gcm::seal(const Nonce& nonce, ByteView plaintext, std::size_t chunk_size,
                        ByteView aad_prefix, Exec exec) const {
    if (chunk_size < 16) throw std::invalid_argument("chunk_size must be at least 16");
    std::size_t n = chunk_count(plaintext.size(), chunk_size);
    if (n > kMaxChunks) throw ChunkingOverflow(n);
    if (!plaintext.empty() && kFirstCtr + (plaintext.size() - 1) / 16 > kCtrLimit) throw NonceExhausted();
    SealedMessage m;
    m.nonce = nonce;
    m.chunk_size = chunk_size;
    m.aad_prefix.assign(aad_prefix.begin(), aad_prefix.end());
    m.ciphertext.resize(plaintext.size());
    m.tags.resize(n);
    auto iv = nonce.iv();
    std::int64_t chunks = std::int64_t(n);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel && chunks > 1)
    for (std::int64_t i = 0; i < chunks; ++i) {
        std::size_t off = std::size_t(i) * chunk_size;
        std::size_t len = std::min(chunk_size, plaintext.size() - off);
        ctr_at(iv, off, plaintext.data() + off, m.ciphertext.data() + off, len);
        m.tags[i] = chunk_tag(nonce, std::size_t(i), aad_prefix, ByteView(m.ciphertext).subspan(off, len));
    }
    return m;
}

Bytes Gcm::open(const SealedMessage& msg, Exec exec) const {
    if (msg.chunk_size < 16) throw AuthenticationFailure(-1);
    std::size_t n = chunk_count(msg.ciphertext.size(), msg.chunk_size);
    if (n > kMaxChunks || msg.tags.size() != n) throw AuthenticationFailure(-1);
    if (!msg.ciphertext.empty() && kFirstCtr + (msg.ciphertext.size() - 1) / 16 > kCtrLimit)
        throw AuthenticationFailure(-1);
    std::int64_t chunks = std::int64_t(n);
    std::vector<char> ok(n, 0);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel && chunks > 1)
    for (std::int64_t i = 0; i < chunks; ++i) {
        std::size_t off = std::size_t(i) * msg.chunk_size;
        std::size_t len = std::min(msg.chunk_size, msg.ciphertext.size() - off);
        MacTag t = chunk_tag(msg.nonce, std::size_t(i), msg.aad_prefix,
                             ByteView(msg.ciphertext).subspan(off, len));
        ok[i] = constant_time_equal(t, msg.tags[i]);
    }
    auto bad = std::find(ok.begin(), ok.end(), 0);
    if (bad != ok.end()) throw AuthenticationFailure(long(bad - ok.begin()));
    Bytes pt(msg.ciphertext.size());
    auto iv = msg.nonce.iv();
    std::int64_t segs = std::int64_t(chunk_count(pt.size(), kSegmentBlocks * 16));
#pragma omp parallel for schedule(static) if (exec == Exec::parallel && segs > 1)
    for (std::int64_t s = 0; s < segs; ++s) {
        std::size_t off = std::size_t(s) * kSegmentBlocks * 16;
        std::size_t len = std::min(kSegmentBlocks * 16, pt.size() - off);
        ctr_at(iv, off, msg.ciphertext.data() + off, pt.data() + off, len);
    }
    return pt;
}

Bytes ctr_keystream(const SymmetricKey& key, const Nonce& nonce, std::uint64_t offset_block,
                    std::uint64_t n_blocks) {
    return Gcm(key).ctr_keystream(nonce, offset_block, n_blocks);
}

MacTag gmac_serial(const SymmetricKey& key, const Nonce& nonce, ByteView aad, ByteView data) {
    auto iv = nonce.iv();
    return Gcm(key).gmac(iv, aad, data);
}

SealedMessage seal(const SymmetricKey& key, const Nonce& nonce, ByteView plaintext,
                   std::size_t chunk_size, ByteView aad_prefix) {
    return Gcm(key).seal(nonce, plaintext, chunk_size, aad_prefix);
}

Bytes open(const SymmetricKey& key, const SealedMessage& msg) { return Gcm(key).open(msg); }

}  // namespace teesim::crypto
