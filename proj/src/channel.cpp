#include "teesim/channel.hpp"

#include <chrono>
#include <cstring>
#include <stdexcept>

#include "teesim/errors.hpp"

namespace teesim {

void FrameHeader::write(std::uint8_t* p) const {
    store_be32(p, counter);
    store_be64(p + 4, length);
    store_be32(p + 12, chunk_size);
    store_be32(p + 16, n_tags);
    store_be64(p + 20, context);
}

FrameHeader FrameHeader::read(const std::uint8_t* p) {
    FrameHeader h;
    h.counter = load_be32(p);
    h.length = load_be64(p + 4);
    h.chunk_size = load_be32(p + 12);
    h.n_tags = load_be32(p + 16);
    h.context = load_be64(p + 20);
    return h;
}

SecureChannel::SecureChannel(int local_id, int remote_id, const crypto::SymmetricKey& key,
                             std::array<std::uint8_t, 8> channel_id, LinkSpec link, bool cc_enabled,
                             std::size_t chunk_size)
    : local_(local_id), remote_(remote_id), channel_id_(channel_id),
      gcm_(std::make_shared<crypto::Gcm>(key)), link_(link), cc_(cc_enabled), chunk_size_(chunk_size) {
    link_.validate();
    if (chunk_size_ < 16 || chunk_size_ > 0xffffffffu) throw ConfigError("chunk_size must be in [16, 2^32)");
}

namespace {

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::pair<DeliveredMessage, TimingRecord> SecureChannel::send(ByteView payload, double clock,
                                                              const TimingModel& timing,
                                                              std::uint64_t context, Exec exec,
                                                              double logical_bytes) {
    if (payload.empty()) throw std::invalid_argument("channel_send: empty payload");
    if (send_counter_ == 0xffffffffu) throw NonceExhausted();
    FrameHeader h;
    h.counter = ++send_counter_;
    h.length = payload.size();
    h.chunk_size = std::uint32_t(chunk_size_);
    h.context = context;
    double logical = logical_bytes > 0 ? logical_bytes : double(payload.size()) / timing.scale;

    TimingRecord tr;
    tr.start = clock;
    DeliveredMessage m;
    m.from = local_;
    m.to = remote_;
    if (cc_) {
        h.n_tags = std::uint32_t(crypto::chunk_count(payload.size(), chunk_size_));
        std::uint8_t hdr[FrameHeader::kSize];
        h.write(hdr);
        auto t0 = std::chrono::steady_clock::now();
        auto sealed = gcm_->seal({channel_id_, h.counter}, payload, chunk_size_, ByteView(hdr, sizeof hdr), exec);
        double wall = wall_since(t0);
        m.wire.resize(FrameHeader::kSize + payload.size() + 16 * sealed.tags.size());
        std::memcpy(m.wire.data(), hdr, FrameHeader::kSize);
        std::memcpy(m.wire.data() + FrameHeader::kSize, sealed.ciphertext.data(), payload.size());
        std::uint8_t* t = m.wire.data() + FrameHeader::kSize + payload.size();
        for (const auto& tag : sealed.tags) std::memcpy(t, tag.data(), 16), t += 16;
        if (local_ == kHost) {
            // CPU AES-GCM is one pass; book it all as encryption
            tr.enc_s = timing.mode == TimingMode::measured ? wall / timing.scale : timing.host_seal_time(logical);
        } else if (timing.mode == TimingMode::measured) {
            // split the measured wall time in the modeled enc/auth proportion
            double e = timing.enc_time(logical), a = timing.auth_time(logical);
            double total = wall / timing.scale;
            tr.enc_s = total * e / (e + a);
            tr.auth_s = total - tr.enc_s;
        } else {
            tr.enc_s = timing.enc_time(logical);
            tr.auth_s = timing.auth_time(logical);
        }
    } else {
        m.wire.resize(FrameHeader::kSize + payload.size());
        h.write(m.wire.data());
        std::memcpy(m.wire.data() + FrameHeader::kSize, payload.data(), payload.size());
    }
    tr.end = clock + tr.crypto_s();
    tr.link_s = link_.transfer_time(logical);
    m.sent_at = tr.end;
    m.arrival = tr.end + tr.link_s;
    return {std::move(m), tr};
}

std::pair<Bytes, TimingRecord> SecureChannel::recv(const DeliveredMessage& msg, double clock,
                                                   const TimingModel& timing, Exec exec) {
    if (msg.from != local_ || msg.to != remote_) throw std::invalid_argument("message not addressed to this channel");
    if (msg.wire.size() < FrameHeader::kSize) throw AuthenticationFailure(-1);
    FrameHeader h = FrameHeader::read(msg.wire.data());
    std::size_t body = msg.wire.size() - FrameHeader::kSize;
    std::size_t tags = cc_ ? std::size_t(h.n_tags) : 0;
    if (h.length > body || body - h.length != 16 * tags) throw AuthenticationFailure(-1);
    if (h.counter <= recv_high_water_) throw ReplayDetected(h.counter, recv_high_water_);

    TimingRecord tr;
    tr.start = std::max(clock, msg.arrival);
    double logical = double(h.length) / timing.scale;
    Bytes out;
    const std::uint8_t* payload = msg.wire.data() + FrameHeader::kSize;
    if (cc_) {
        crypto::SealedMessage s;
        s.nonce = {channel_id_, h.counter};
        s.chunk_size = h.chunk_size;
        s.aad_prefix.assign(msg.wire.begin(), msg.wire.begin() + FrameHeader::kSize);
        s.ciphertext.assign(payload, payload + h.length);
        s.tags.resize(tags);
        for (std::size_t i = 0; i < tags; ++i) std::memcpy(s.tags[i].data(), payload + h.length + 16 * i, 16);
        auto t0 = std::chrono::steady_clock::now();
        out = gcm_->open(s, exec);
        double wall = wall_since(t0);
        if (timing.mode == TimingMode::measured) {
            double e = timing.enc_time(logical), a = timing.auth_time(logical);
            double total = wall / timing.scale;
            tr.enc_s = total * e / (e + a);
            tr.auth_s = total - tr.enc_s;
        } else {
            tr.enc_s = timing.enc_time(logical);
            tr.auth_s = timing.auth_time(logical);
        }
    } else {
        out.assign(payload, payload + h.length);
    }
    recv_high_water_ = h.counter;
    tr.end = tr.start + tr.crypto_s();
    return {std::move(out), tr};
}

ChannelMesh::ChannelMesh(int n_workers, std::uint64_t seed, bool cc_enabled, LinkSpec peer, LinkSpec host,
                         std::size_t chunk_size)
    : n_(n_workers), cc_(cc_enabled), peer_(peer), host_(host), chunk_size_(chunk_size) {
    if (n_workers < 1) throw ConfigError("need at least one worker");
    std::uint8_t master[32];
    for (int i = 0; i < 4; ++i) store_be64(master + 8 * i, seed ^ (0x9e3779b97f4a7c15ull * (i + 1)));
    // stretch the seed once so nearby seeds give unrelated masters
    crypto::Aes256 pre(master, crypto::Backend::automatic);
    std::uint8_t stretched[32];
    pre.encrypt_block(master, stretched);
    pre.encrypt_block(master + 16, stretched + 16);
    kdf_ = std::make_unique<crypto::Aes256>(stretched);
}

crypto::SymmetricKey ChannelMesh::key_for(int from, int to) const {
    // AES is a permutation, so distinct (from, to, half) blocks give distinct keys.
    crypto::SymmetricKey k;
    for (int half = 0; half < 2; ++half) {
        std::uint8_t in[16] = {};
        store_be32(in, std::uint32_t(from + 1));
        store_be32(in + 4, std::uint32_t(to + 1));
        in[15] = std::uint8_t(half);
        kdf_->encrypt_block(in, k.bytes.data() + 16 * half);
    }
    return k;
}

SecureChannel& ChannelMesh::get(int from, int to) {
    if (from == to || from < kHost || to < kHost || from >= n_ || to >= n_)
        throw std::out_of_range("no channel " + std::to_string(from) + "->" + std::to_string(to));
    auto& slot = channels_[{from, to}];
    if (!slot) {
        std::array<std::uint8_t, 8> id;
        store_be32(id.data(), std::uint32_t(from + 1));
        store_be32(id.data() + 4, std::uint32_t(to + 1));
        LinkSpec link = (from == kHost || to == kHost) ? host_ : peer_;
        slot = std::make_unique<SecureChannel>(from, to, key_for(from, to), id, link, cc_, chunk_size_);
    }
    return *slot;
}

std::vector<DeliveredMessage> Adversary::transmit(DeliveredMessage m) {
    std::vector<DeliveredMessage> out;
    bool on_target = mode != Mode::none && m.from == from && m.to == to;
    std::uint64_t idx = on_target ? seen_[{m.from, m.to}]++ : 0;
    if (held_ && on_target) {
        out.push_back(std::move(m));
        out.push_back(std::move(*held_));
        held_.reset();
        return out;
    }
    if (!on_target || idx != message) {
        out.push_back(std::move(m));
        return out;
    }
    fired_ = true;
    switch (mode) {
    case Mode::flip_bit: {
        std::uint64_t b = bit % (m.wire.size() * 8);
        m.wire[b / 8] ^= std::uint8_t(1u << (b % 8));
        out.push_back(std::move(m));
        break;
    }
    case Mode::replay:
        out.push_back(m);
        out.push_back(std::move(m));
        break;
    case Mode::reorder:
        held_ = std::move(m);
        break;
    case Mode::none:
        break;
    }
    return out;
}

}  // namespace teesim
