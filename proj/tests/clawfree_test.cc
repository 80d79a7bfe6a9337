#include <cmath>

#include <gtest/gtest.h>

#include "certsamp/clawfree.h"

namespace certsamp {
namespace {

KeyPair fixed_keys(int m, std::uint64_t s) {
    return KeyPair{PublicKey{m, 7, s}, Trapdoor{s, 7}};
}

int parity(std::uint64_t v) {
    return __builtin_popcountll(v) & 1;
}

TEST(Gen, ShiftNonzeroAndCollisionRate) {
    RngStream root(61);
    const int pairs = 1000;
    int collisions = 0;
    for (int i = 0; i < pairs; i++) {
        RngStream a = root.substream(static_cast<std::uint64_t>(i), 0);
        RngStream b = root.substream(static_cast<std::uint64_t>(i), 1);
        KeyPair ka = gen(3, a);
        KeyPair kb = gen(3, b);
        ASSERT_NE(ka.td.s, 0U);
        ASSERT_NE(kb.td.s, 0U);
        ASSERT_LT(ka.td.s, 8U);
        collisions += ka.td.s == kb.td.s ? 1 : 0;
    }
    double p = 1.0 / 7.0;
    EXPECT_NEAR(static_cast<double>(collisions) / pairs, p, 4 * std::sqrt(p * (1 - p) / pairs));
}

TEST(Gen, RejectsBadLength) {
    RngStream rng(62);
    EXPECT_THROW(gen(0, rng), std::invalid_argument);
    EXPECT_THROW(gen(kMaxTailBits + 1, rng), std::invalid_argument);
}

TEST(KeyJson, RoundTripRequiresInsecureMarker) {
    RngStream rng(63);
    KeyPair k = gen(5, rng);
    nlohmann::json j = k;
    EXPECT_TRUE(j.at("insecure_toy").get<bool>());
    KeyPair back = keypair_from_json(j);
    EXPECT_EQ(back.pk, k.pk);
    EXPECT_EQ(back.td, k.td);
    j.erase("insecure_toy");
    EXPECT_THROW(keypair_from_json(j), std::invalid_argument);
}

TEST(Eval, Examples) {
    KeyPair k = fixed_keys(3, 0b101);
    EXPECT_EQ(eval(k.pk, 1, 0b011), 0b110U);
    for (std::uint64_t x = 0; x < 8; x++) {
        EXPECT_EQ(eval(k.pk, 0, x), x);
    }
    EXPECT_THROW(eval(k.pk, 2, 0), std::invalid_argument);
    EXPECT_THROW(eval(k.pk, 0, 8), std::invalid_argument);
}

TEST(Eval, BothPreimagesExhaustive) {
    for (int m = 1; m <= 10; m++) {
        std::uint64_t s = (std::uint64_t{1} << m) - 1;
        KeyPair k = fixed_keys(m, s);
        for (std::uint64_t y = 0; y < (std::uint64_t{1} << m); y++) {
            EXPECT_EQ(eval(k.pk, 0, y), y);
            EXPECT_EQ(eval(k.pk, 1, y ^ s), y);
            EXPECT_EQ(invert(k.td, m, y, 0), encode_preimage(m, 0, y));
            EXPECT_EQ(invert(k.td, m, y, 1), encode_preimage(m, 1, y ^ s));
        }
    }
}

TEST(ClawSum, Examples) {
    KeyPair k = fixed_keys(3, 0b101);
    EXPECT_EQ(claw_sum(k.td, 3), 0b1101U);
    RngStream rng(64);
    for (int m = 1; m <= 8; m++) {
        KeyPair r = gen(m, rng);
        std::uint64_t c = claw_sum(r.td, m);
        EXPECT_EQ(c >> m, 1U);
        for (std::uint64_t d = 0; d < (std::uint64_t{1} << (m + 1)); d++) {
            int direct = static_cast<int>((d >> m) & 1U) ^ parity(d & r.td.s & ((std::uint64_t{1} << m) - 1));
            EXPECT_EQ(parity(d & c), direct);
        }
    }
}

TEST(VerifyResponse, PreimageChecks) {
    KeyPair k = fixed_keys(4, 0b1011);
    for (std::uint64_t y = 0; y < 16; y++) {
        for (int b = 0; b < 2; b++) {
            std::uint64_t pre = invert(k.td, 4, y, b);
            ResponseCheck ok = verify_response(k.pk, k.td, y, 0, pre);
            EXPECT_TRUE(ok.ok);
            EXPECT_EQ(ok.bit, b);
            EXPECT_FALSE(verify_response(k.pk, k.td, y, 0, pre ^ 1U).ok);
        }
    }
}

TEST(VerifyResponse, EquationParityExhaustive) {
    KeyPair k = fixed_keys(3, 0b110);
    for (std::uint64_t y = 0; y < 8; y++) {
        std::uint64_t x0 = invert(k.td, 3, y, 0);
        std::uint64_t x1 = invert(k.td, 3, y, 1);
        for (std::uint64_t d = 0; d < 16; d++) {
            ResponseCheck c = verify_response(k.pk, k.td, y, 1, d);
            EXPECT_TRUE(c.ok);
            EXPECT_EQ(c.bit, parity(d & (x0 ^ x1)));
        }
    }
}

TEST(VerifyResponse, RejectsMalformed) {
    KeyPair k = fixed_keys(3, 0b110);
    EXPECT_THROW(verify_response(k.pk, k.td, 0, 0, 16), std::invalid_argument);
    EXPECT_THROW(verify_response(k.pk, k.td, 0, 2, 0), std::invalid_argument);
    Trapdoor other{0b110, 8};
    EXPECT_THROW(verify_response(k.pk, other, 0, 0, 0), std::invalid_argument);
}

TEST(Insecurity, ShiftRecoverable) {
    RngStream rng(65);
    for (int i = 0; i < 20; i++) {
        KeyPair k = gen(6, rng);
        EXPECT_EQ(recover_shift(k.pk), k.td.s);
    }
}

TEST(Insecurity, CollapsingGameWinsThreeQuarters) {
    RngStream rng(66);
    KeyPair k = gen(3, rng);
    CollapsingGame game(k, 0b010);
    EXPECT_NEAR(game.exact_win_probability(), 0.75, 1e-12);
    const int plays = 20000;
    int wins = 0;
    for (int i = 0; i < plays; i++) {
        wins += game.play(rng) ? 1 : 0;
    }
    EXPECT_NEAR(static_cast<double>(wins) / plays, 0.75, 4 * std::sqrt(0.75 * 0.25 / plays));
}

}  // namespace
}  // namespace certsamp
