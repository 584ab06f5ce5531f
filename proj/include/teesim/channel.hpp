#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "teesim/bytes.hpp"
#include "teesim/crypto/gcm.hpp"
#include "teesim/timing.hpp"

namespace teesim {

inline constexpr int kHost = -1;

// Fixed frame header. With cc on the whole header is the AAD prefix of every
// chunk, so length/chunk/context cannot be altered and a truncated frame fails.
struct FrameHeader {
    std::uint32_t counter = 0;
    std::uint64_t length = 0;
    std::uint32_t chunk_size = 0;
    std::uint32_t n_tags = 0;
    std::uint64_t context = 0;

    static constexpr std::size_t kSize = 28;
    void write(std::uint8_t* p) const;
    static FrameHeader read(const std::uint8_t* p);
};

// What crosses the untrusted link: header, payload (ciphertext or plaintext), tags.
struct DeliveredMessage {
    int from = 0, to = 0;
    Bytes wire;
    double sent_at = 0, arrival = 0;
};

struct TimingRecord {
    double start = 0, end = 0;
    double enc_s = 0, auth_s = 0;  // crypto split; zero with cc off
    double link_s = 0;
    double crypto_s() const { return enc_s + auth_s; }
};

// One direction (local -> remote) of a pairwise channel. The sender owns send_counter, the
// receiver owns recv_high_water; the simulator gives each side a single owner.
class SecureChannel {
public:
    SecureChannel(int local_id, int remote_id, const crypto::SymmetricKey& key,
                  std::array<std::uint8_t, 8> channel_id, LinkSpec link, bool cc_enabled,
                  std::size_t chunk_size = crypto::kDefaultChunkSize);

    // logical_bytes > 0 overrides payload.size() / timing.scale for the timing
    // model. A host-side sender is timed with the CPU crypto throughput.
    std::pair<DeliveredMessage, TimingRecord> send(ByteView payload, double clock, const TimingModel& timing,
                                                   std::uint64_t context = 0, Exec exec = Exec::parallel,
                                                   double logical_bytes = 0);
    std::pair<Bytes, TimingRecord> recv(const DeliveredMessage& msg, double clock, const TimingModel& timing,
                                        Exec exec = Exec::parallel);

    int local_id() const { return local_; }
    int remote_id() const { return remote_; }
    bool cc_enabled() const { return cc_; }
    const LinkSpec& link() const { return link_; }
    std::uint32_t send_counter() const { return send_counter_; }
    std::uint32_t recv_high_water() const { return recv_high_water_; }
    const std::array<std::uint8_t, 8>& channel_id() const { return channel_id_; }

    // Test hook: pretend `c` messages have already been sent.
    void set_send_counter(std::uint32_t c) { send_counter_ = c; }

private:
    int local_, remote_;
    std::array<std::uint8_t, 8> channel_id_;
    std::shared_ptr<const crypto::Gcm> gcm_;
    LinkSpec link_;
    bool cc_;
    std::size_t chunk_size_;
    std::uint32_t send_counter_ = 0;
    std::uint32_t recv_high_water_ = 0;
};

// Derives one key per ordered endpoint pair from a seed; kHost is the CPU TEE.
class ChannelMesh {
public:
    ChannelMesh(int n_workers, std::uint64_t seed, bool cc_enabled, LinkSpec peer, LinkSpec host,
                std::size_t chunk_size = crypto::kDefaultChunkSize);

    SecureChannel& get(int from, int to);
    int size() const { return n_; }
    bool cc_enabled() const { return cc_; }

    // Exposed for the distinct-key property test only.
    crypto::SymmetricKey key_for(int from, int to) const;

private:
    int n_;
    bool cc_;
    LinkSpec peer_, host_;
    std::size_t chunk_size_;
    std::unique_ptr<crypto::Aes256> kdf_;
    std::map<std::pair<int, int>, std::unique_ptr<SecureChannel>> channels_;
};

struct Adversary {
    enum class Mode { none, flip_bit, replay, reorder };

    Adversary() = default;
    Adversary(Mode mode, int from, int to, std::uint64_t message, std::uint64_t bit = 0)
        : mode(mode), from(from), to(to), message(message), bit(bit) {}

    Mode mode = Mode::none;
    int from = 0, to = 1;          // targeted channel
    std::uint64_t message = 0;     // index of the targeted message on that channel
    std::uint64_t bit = 0;         // flip_bit: bit position in the wire frame (mod its length)

    // Returns what the receiver sees: [m], [m'] (flipped), [m, m] (replayed),
    // [] then [m+1, m] (reordered).
    std::vector<DeliveredMessage> transmit(DeliveredMessage m);
    bool fired() const { return fired_; }

private:
    std::map<std::pair<int, int>, std::uint64_t> seen_;
    std::optional<DeliveredMessage> held_;
    bool fired_ = false;
};

}  // namespace teesim
