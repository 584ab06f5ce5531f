#include <gtest/gtest.h>

#include <random>
#include <set>

#include "teesim/channel.hpp"
#include "teesim/errors.hpp"

using namespace teesim;

namespace {

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
    Bytes b(n);
    for (auto& c : b) c = std::uint8_t(rng());
    return b;
}

struct Pair {
    ChannelMesh mesh;
    TimingModel timing;
    explicit Pair(bool cc, std::size_t chunk = 1024) : mesh(2, 42, cc, TimingModel{}.peer_link, TimingModel{}.host_link, chunk) {}
    SecureChannel& tx() { return mesh.get(0, 1); }
};

}  // namespace

TEST(Link, CcOffHundredMegabytesOverHostLink) {
    TimingModel t;
    t.scale = 1.0 / 64;
    ChannelMesh mesh(1, 1, false, t.peer_link, {LinkSpec::Kind::host_link, 25e9, 2e-6});
    Bytes payload(std::size_t(100e6 / 64));
    auto [m, tr] = mesh.get(kHost, 0).send(payload, 0.0, t);
    EXPECT_DOUBLE_EQ(tr.link_s, 0.004 + 2e-6);
    EXPECT_EQ(tr.crypto_s(), 0.0);
    EXPECT_DOUBLE_EQ(m.arrival, 0.004 + 2e-6);
}

TEST(Link, TransferTimeLinearInSize) {
    LinkSpec dyadic{LinkSpec::Kind::peer_link, 17179869184.0, 0.0078125};
    for (double s : {1024.0, 1048576.0, 1073741824.0})
        EXPECT_EQ(dyadic.transfer_time(2 * s) - dyadic.transfer_time(s), s / dyadic.bandwidth);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        LinkSpec l{LinkSpec::Kind::peer_link, 1e9 + double(rng() % 100000) * 1e6, double(rng() % 100) * 1e-6};
        double s = double(rng() % (1u << 30));
        EXPECT_NEAR(l.transfer_time(2 * s) - l.transfer_time(s), s / l.bandwidth, 1e-15);
    }
}

TEST(Link, InvalidSpecRejected) {
    EXPECT_THROW((LinkSpec{LinkSpec::Kind::peer_link, 0, 0}.validate()), ConfigError);
    EXPECT_THROW((LinkSpec{LinkSpec::Kind::peer_link, 1, -1}.validate()), ConfigError);
}

TEST(Channel, CcOnDeliversAllTagsAndVerifies) {
    std::mt19937_64 rng(2);
    Pair p(true, 1000);
    Bytes x = random_bytes(rng, 4500);
    auto [m, tr] = p.tx().send(x, 1.0, p.timing);
    EXPECT_EQ(m.wire.size(), FrameHeader::kSize + x.size() + 5 * 16);
    EXPECT_GT(tr.crypto_s(), 0);
    EXPECT_DOUBLE_EQ(tr.end, 1.0 + p.timing.seal_time(4500));
    auto [pt, rt] = p.mesh.get(0, 1).recv(m, 0.0, p.timing);
    EXPECT_EQ(pt, x);
    EXPECT_DOUBLE_EQ(rt.start, m.arrival);
    EXPECT_DOUBLE_EQ(rt.end - rt.start, p.timing.open_time(4500));
}

TEST(Channel, CcOffFramesIdenticallyWithoutTags) {
    std::mt19937_64 rng(3);
    Pair on(true, 1000), off(false, 1000);
    Bytes x = random_bytes(rng, 3000);
    auto [a, ta] = on.tx().send(x, 0, on.timing);
    auto [b, tb] = off.tx().send(x, 0, off.timing);
    EXPECT_EQ(a.wire.size() - b.wire.size(), 3 * 16u);
    EXPECT_EQ(Bytes(b.wire.begin() + FrameHeader::kSize, b.wire.end()), x);
    auto ha = FrameHeader::read(a.wire.data()), hb = FrameHeader::read(b.wire.data());
    EXPECT_EQ(ha.counter, hb.counter);
    EXPECT_EQ(ha.length, hb.length);
    EXPECT_EQ(hb.n_tags, 0u);
    EXPECT_EQ(off.tx().recv(b, 0, off.timing).first, x);
}

TEST(Channel, CountersStartAtOneAndIncrease) {
    std::mt19937_64 rng(4);
    Pair p(true);
    EXPECT_EQ(p.tx().send_counter(), 0u);
    EXPECT_EQ(p.tx().recv_high_water(), 0u);
    for (std::uint32_t i = 1; i <= 5; ++i) {
        auto [m, tr] = p.tx().send(random_bytes(rng, 10), 0, p.timing);
        EXPECT_EQ(FrameHeader::read(m.wire.data()).counter, i);
        p.tx().recv(m, 0, p.timing);
        EXPECT_EQ(p.tx().recv_high_water(), i);
    }
}

TEST(Channel, ExactResendIsReplay) {
    std::mt19937_64 rng(5);
    Pair p(true);
    auto [m, tr] = p.tx().send(random_bytes(rng, 100), 0, p.timing);
    p.tx().recv(m, 0, p.timing);
    EXPECT_THROW(p.tx().recv(m, 0, p.timing), ReplayDetected);
}

TEST(Channel, AllTwoMessageOrderings) {
    std::mt19937_64 rng(6);
    for (int order = 0; order < 2; ++order) {
        Pair p(true);
        auto [m1, t1] = p.tx().send(random_bytes(rng, 50), 0, p.timing);
        auto [m2, t2] = p.tx().send(random_bytes(rng, 50), 0, p.timing);
        if (order == 0) {
            EXPECT_NO_THROW(p.tx().recv(m1, 0, p.timing));
            EXPECT_NO_THROW(p.tx().recv(m2, 0, p.timing));
        } else {
            EXPECT_NO_THROW(p.tx().recv(m2, 0, p.timing));
            EXPECT_THROW(p.tx().recv(m1, 0, p.timing), ReplayDetected);
        }
    }
}

TEST(Channel, ReorderAdversaryCausesReplayRejection) {
    std::mt19937_64 rng(7);
    Pair p(true);
    Adversary adv{Adversary::Mode::reorder, 0, 1, 0, 0};
    auto [m1, t1] = p.tx().send(random_bytes(rng, 50), 0, p.timing);
    auto [m2, t2] = p.tx().send(random_bytes(rng, 50), 0, p.timing);
    EXPECT_TRUE(adv.transmit(m1).empty());
    auto got = adv.transmit(m2);
    ASSERT_EQ(got.size(), 2u);
    EXPECT_NO_THROW(p.tx().recv(got[0], 0, p.timing));
    EXPECT_THROW(p.tx().recv(got[1], 0, p.timing), ReplayDetected);
}

TEST(Channel, FlipAnywhereInBodyIsAuthenticationFailure) {
    std::mt19937_64 rng(8);
    Pair p(true, 256);
    for (int trial = 0; trial < 300; ++trial) {
        auto [m, tr] = p.tx().send(random_bytes(rng, 1 + rng() % 3000), 0, p.timing);
        std::uint64_t body_bits = (m.wire.size() - FrameHeader::kSize) * 8;
        Adversary adv{Adversary::Mode::flip_bit, 0, 1, 0, FrameHeader::kSize * 8 + rng() % body_bits};
        auto got = adv.transmit(m);
        ASSERT_EQ(got.size(), 1u);
        EXPECT_THROW(p.tx().recv(got[0], 0, p.timing), AuthenticationFailure);
        // a fresh message still goes through: the failure left no state behind
        auto [ok, t2] = p.tx().send(random_bytes(rng, 10), 0, p.timing);
        EXPECT_NO_THROW(p.tx().recv(ok, 0, p.timing));
    }
}

TEST(Channel, FlipInHeaderIsRejected) {
    std::mt19937_64 rng(9);
    Pair p(true, 256);
    for (std::uint64_t bit = 0; bit < FrameHeader::kSize * 8; ++bit) {
        auto [m, tr] = p.tx().send(random_bytes(rng, 700), 0, p.timing);
        Adversary adv{Adversary::Mode::flip_bit, 0, 1, 0, bit};
        auto got = adv.transmit(m);
        bool rejected = false;
        try {
            p.tx().recv(got[0], 0, p.timing);
        } catch (const AuthenticationFailure&) {
            rejected = true;
        } catch (const ReplayDetected&) {
            rejected = true;
        }
        EXPECT_TRUE(rejected) << "header bit " << bit;
    }
}

TEST(Channel, CounterExhaustion) {
    Pair p(true);
    p.tx().set_send_counter(0xffffffffu);
    Bytes x(16);
    EXPECT_THROW(p.tx().send(x, 0, p.timing), NonceExhausted);
}

TEST(Channel, EmptyPayloadRejected) {
    Pair p(false);
    EXPECT_THROW(p.tx().send({}, 0, p.timing), std::invalid_argument);
}

TEST(Channel, MessageForAnotherChannelRejected) {
    std::mt19937_64 rng(10);
    ChannelMesh mesh(3, 1, true, {}, {});
    TimingModel t;
    auto [m, tr] = mesh.get(0, 1).send(random_bytes(rng, 10), 0, t);
    EXPECT_THROW(mesh.get(0, 2).recv(m, 0, t), std::invalid_argument);
}

TEST(Mesh, DistinctKeyPerOrderedPair) {
    ChannelMesh mesh(6, 99, true, {}, {});
    std::set<std::array<std::uint8_t, 32>> keys;
    for (int a = kHost; a < 6; ++a)
        for (int b = kHost; b < 6; ++b)
            if (a != b) keys.insert(mesh.key_for(a, b).bytes);
    EXPECT_EQ(keys.size(), 7u * 6u);
    ChannelMesh again(6, 99, true, {}, {}), other(6, 100, true, {}, {});
    EXPECT_EQ(again.key_for(2, 3).bytes, mesh.key_for(2, 3).bytes);
    EXPECT_NE(other.key_for(2, 3).bytes, mesh.key_for(2, 3).bytes);
}

TEST(Mesh, CrossChannelMessagesDoNotVerify) {
    // a frame moved onto the reverse direction fails: different key and channel id
    std::mt19937_64 rng(11);
    ChannelMesh mesh(2, 5, true, {}, {});
    TimingModel t;
    auto [m, tr] = mesh.get(0, 1).send(random_bytes(rng, 64), 0, t);
    m.from = 1;
    m.to = 0;
    EXPECT_THROW(mesh.get(1, 0).recv(m, 0, t), AuthenticationFailure);
}
