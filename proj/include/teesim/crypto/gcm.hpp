#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "teesim/bytes.hpp"
#include "teesim/crypto/aes.hpp"
#include "teesim/crypto/ghash.hpp"
#include "teesim/exec.hpp"

namespace teesim::crypto {

inline constexpr std::size_t kDefaultChunkSize = 64 * 1024;
inline constexpr std::size_t kMaxChunks = 65536;

// Deliberately has no serializer: keys never reach reports or traces.
struct SymmetricKey {
    std::array<std::uint8_t, 32> bytes{};

    static SymmetricKey from(ByteView b);  // throws std::invalid_argument unless 32 bytes
};

struct Nonce {
    std::array<std::uint8_t, 8> channel_id{};
    std::uint32_t counter = 0;

    std::array<std::uint8_t, 12> iv() const;
    static Nonce from_iv(ByteView iv12);
    bool operator==(const Nonce&) const = default;
};

using MacTag = std::array<std::uint8_t, 16>;

struct SealedMessage {
    Bytes ciphertext;
    Nonce nonce;
    std::vector<MacTag> tags;
    std::size_t chunk_size = kDefaultChunkSize;
    Bytes aad_prefix;
};

std::size_t chunk_count(std::size_t len, std::size_t chunk_size);

// Key context: expanded AES key plus GHASH tables. Immutable after
// construction, so one instance may serve concurrent callers.
class Gcm {
public:
    explicit Gcm(const SymmetricKey& key, Backend backend = Backend::automatic);

    Bytes ctr_keystream(const Nonce& nonce, std::uint64_t offset_block, std::uint64_t n_blocks,
                        Exec exec = Exec::parallel) const;

    // Standard GCM tag over (aad, data) with data taken as ciphertext.
    MacTag gmac(ByteView iv12, ByteView aad, ByteView data) const;

    // Standard single-chain GCM encryption, 96-bit IV.
    Bytes encrypt(ByteView iv12, ByteView aad, ByteView plaintext, MacTag& tag) const;

    SealedMessage seal(const Nonce& nonce, ByteView plaintext, std::size_t chunk_size = kDefaultChunkSize,
                       ByteView aad_prefix = {}, Exec exec = Exec::parallel) const;
    Bytes open(const SealedMessage& msg, Exec exec = Exec::parallel) const;

    // Tag of multi-chain chunk i over ct (already the chunk's bytes).
    MacTag chunk_tag(const Nonce& nonce, std::size_t index, ByteView aad_prefix, ByteView ct) const;

    bool uses_hardware() const { return aes_.uses_hardware(); }

private:
    void ctr_at(const std::array<std::uint8_t, 12>& iv, std::uint64_t byte_offset,
                const std::uint8_t* in, std::uint8_t* out, std::size_t len) const;

    Aes256 aes_;
    std::uint8_t h_[16];
    GhashKey ghash_;
};

Bytes ctr_keystream(const SymmetricKey& key, const Nonce& nonce, std::uint64_t offset_block,
                    std::uint64_t n_blocks);
MacTag gmac_serial(const SymmetricKey& key, const Nonce& nonce, ByteView aad, ByteView data);
SealedMessage seal(const SymmetricKey& key, const Nonce& nonce, ByteView plaintext,
                   std::size_t chunk_size = kDefaultChunkSize, ByteView aad_prefix = {});
Bytes open(const SymmetricKey& key, const SealedMessage& msg);

bool constant_time_equal(ByteView a, ByteView b);

}  // namespace teesim::crypto
