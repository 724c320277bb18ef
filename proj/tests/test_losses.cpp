#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "aasgan/losses.hpp"
#include "aasgan/nn.hpp"

using namespace aasgan;

namespace {

std::vector<ad::Value> const_scores(ad::Tape& t, std::initializer_list<double> xs) {
    std::vector<ad::Value> out;
    for (double x : xs) out.push_back(t.constant(Tensor::scalar(x)));
    return out;
}

constexpr double kLn2 = 0.69314718055994530942;

}  // namespace

TEST_CASE("discriminator loss at maximal confusion is 4 ln 2") {
    ad::Tape t;
    auto r = const_scores(t, {0.5, 0.5});
    auto a = const_scores(t, {0.5});
    auto rf = const_scores(t, {0.5, 0.5, 0.5});
    auto af = const_scores(t, {0.5});
    const double loss = losses::discriminator_loss(r, a, rf, af).scalar();
    REQUIRE(loss == Catch::Approx(4.0 * kLn2).margin(1e-9));
}

TEST_CASE("discriminator loss means within classes then sums across them") {
    ad::Tape t;
    // -[mean(log 0.8, log 0.4)] - mean(log(1-0.3)) with the other classes off
    auto r = const_scores(t, {0.8, 0.4});
    auto a = const_scores(t, {0.3});
    const double expect = -0.5 * (std::log(0.8) + std::log(0.4)) - std::log(0.7);
    REQUIRE(losses::discriminator_loss(r, a, {}, {}).scalar() ==
            Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("empty discriminator classes are skipped; all empty is an error") {
    ad::Tape t;
    auto r = const_scores(t, {0.5});
    REQUIRE(losses::discriminator_loss(r, {}, {}, {}).scalar() ==
            Catch::Approx(kLn2).margin(1e-9));
    auto rf = const_scores(t, {0.5, 0.5});
    REQUIRE(losses::discriminator_loss(r, {}, rf, {}).scalar() ==
            Catch::Approx(2.0 * kLn2).margin(1e-9));
    REQUIRE_THROWS_AS(losses::discriminator_loss({}, {}, {}, {}), ArgumentError);
}

TEST_CASE("score clamping keeps the loss finite at saturated scores") {
    ad::Tape t;
    auto zero = const_scores(t, {0.0});
    auto one = const_scores(t, {1.0});
    const double at_zero = losses::discriminator_loss(zero, {}, {}, {}).scalar();
    const double at_one = losses::discriminator_loss({}, one, {}, {}).scalar();
    REQUIRE(std::isfinite(at_zero));
    REQUIRE(std::isfinite(at_one));
    REQUIRE(at_zero == Catch::Approx(-std::log(1e-7)).margin(1e-9));
    REQUIRE(at_one == Catch::Approx(-std::log(1e-7)).margin(1e-9));
}

TEST_CASE("augmenter loss is ln 2 when output matches input at score one half") {
    ad::Tape t;
    std::vector<std::vector<Vec2>> synth = {{{0, 0}, {1, 0}, {2, 0}}, {{0, 0}, {0, 1}, {0, 2}}};
    std::vector<std::vector<ad::Value>> aug;
    for (const auto& row : synth) {
        std::vector<ad::Value> r;
        for (Vec2 p : row) r.push_back(t.constant(Tensor::vec({p.x, p.y})));
        aug.push_back(std::move(r));
    }
    auto scores = const_scores(t, {0.5, 0.5});
    const auto parts = losses::augmenter_loss(t, scores, synth, aug, 3);
    REQUIRE(parts.total.scalar() == Catch::Approx(kLn2).margin(1e-9));
    REQUIRE(parts.adv.scalar() == Catch::Approx(kLn2).margin(1e-9));
    REQUIRE(parts.l2.scalar() == 0.0);
}

TEST_CASE("augmenter alignment sums over timesteps and averages over pedestrians") {
    ad::Tape t;
    // ped 0 offset by (1,0) at 2 of 2 points -> 2; ped 1 offset (0,2) at one point -> 4
    std::vector<std::vector<Vec2>> synth = {{{0, 0}, {1, 0}}, {{5, 5}, {6, 5}}};
    std::vector<std::vector<ad::Value>> aug = {
        {t.constant(Tensor::vec({1.0, 0.0})), t.constant(Tensor::vec({2.0, 0.0}))},
        {t.constant(Tensor::vec({5.0, 7.0})), t.constant(Tensor::vec({6.0, 5.0}))}};
    auto scores = const_scores(t, {0.5, 0.5});
    const auto parts = losses::augmenter_loss(t, scores, synth, aug, 2);
    REQUIRE(parts.l2.scalar() == Catch::Approx((2.0 + 4.0) / 2.0).margin(1e-12));

    REQUIRE_THROWS_AS(losses::augmenter_loss(t, scores, synth, aug, 3), ContractError);
    REQUIRE_THROWS_AS(losses::augmenter_loss(t, {}, synth, aug, 2), ArgumentError);
}

TEST_CASE("variety loss equals the brute-force minimum over candidates") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t peds = 1 + static_cast<std::size_t>(rng.uniform_int(0, 2));
        const std::size_t len = 2 + static_cast<std::size_t>(rng.uniform_int(0, 4));
        const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_int(0, 4));

        std::vector<std::vector<Vec2>> gt(peds, std::vector<Vec2>(len));
        for (auto& row : gt)
            for (Vec2& p : row) p = {rng.normal(), rng.normal()};

        ad::Tape t;
        std::vector<std::vector<std::vector<ad::Value>>> cands(k);
        std::vector<std::vector<std::vector<Vec2>>> raw(k);
        for (std::size_t c = 0; c < k; ++c) {
            cands[c].resize(peds);
            raw[c].resize(peds);
            for (std::size_t i = 0; i < peds; ++i)
                for (std::size_t s = 0; s < len; ++s) {
                    const Vec2 p{rng.normal(), rng.normal()};
                    raw[c][i].push_back(p);
                    cands[c][i].push_back(t.constant(Tensor::vec({p.x, p.y})));
                }
        }

        double brute = 0.0;
        for (std::size_t i = 0; i < peds; ++i) {
            double best = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                double d = 0.0;
                for (std::size_t s = 0; s < len; ++s) d += (raw[c][i][s] - gt[i][s]).norm2();
                if (c == 0 || d < best) best = d;
            }
            brute += best;
        }
        brute /= static_cast<double>(peds);

        REQUIRE(losses::variety_l2(t, gt, cands).scalar() == Catch::Approx(brute).margin(1e-12));
    }
}

TEST_CASE("variety loss backpropagates only into the winning candidate") {
    ad::Tape t;
    std::vector<std::vector<Vec2>> gt = {{{0.0, 0.0}, {1.0, 0.0}}};
    ad::Value near0 = t.input(Tensor::vec({0.1, 0.0}));
    ad::Value near1 = t.input(Tensor::vec({1.1, 0.0}));
    ad::Value far0 = t.input(Tensor::vec({5.0, 5.0}));
    ad::Value far1 = t.input(Tensor::vec({6.0, 5.0}));
    std::vector<std::vector<std::vector<ad::Value>>> cands = {{{near0, near1}}, {{far0, far1}}};
    ad::Value loss = losses::variety_l2(t, gt, cands);
    t.backward(loss);
    REQUIRE(near0.grad().v[0] == Catch::Approx(2.0 * 0.1).margin(1e-12));
    REQUIRE(far0.grad().v[0] == 0.0);
    REQUIRE(far1.grad().v[1] == 0.0);
}

TEST_CASE("variety loss validates candidate shapes") {
    ad::Tape t;
    std::vector<std::vector<Vec2>> gt = {{{0, 0}}};
    REQUIRE_THROWS_AS(losses::variety_l2(t, gt, {}), ArgumentError);
    std::vector<std::vector<std::vector<ad::Value>>> two_peds = {
        {{t.constant(Tensor::vec({0, 0}))}, {t.constant(Tensor::vec({0, 0}))}}};
    REQUIRE_THROWS_AS(losses::variety_l2(t, gt, two_peds), ArgumentError);
}

TEST_CASE("generator branch loss rejects full-length sequences") {
    ad::Tape t;
    auto scores = const_scores(t, {0.5});
    std::vector<std::vector<Vec2>> gt12(1, std::vector<Vec2>(12, {0, 0}));
    std::vector<std::vector<Vec2>> gt20(1, std::vector<Vec2>(20, {0, 0}));
    std::vector<std::vector<std::vector<ad::Value>>> cand12(1);
    cand12[0].resize(1);
    for (int i = 0; i < 12; ++i) cand12[0][0].push_back(t.constant(Tensor::vec({0, 0})));
    std::vector<std::vector<std::vector<ad::Value>>> cand20(1);
    cand20[0].resize(1);
    for (int i = 0; i < 20; ++i) cand20[0][0].push_back(t.constant(Tensor::vec({0, 0})));

    REQUIRE_NOTHROW(losses::generator_branch_loss(t, scores, gt12, cand12, 12));
    // a full 20-point trajectory must not slip into a 12-step alignment
    REQUIRE_THROWS_AS(losses::generator_branch_loss(t, scores, gt20, cand20, 12), ContractError);
    REQUIRE_THROWS_AS(losses::generator_branch_loss(t, scores, gt20, cand12, 20), ContractError);
    REQUIRE_THROWS_AS(losses::generator_branch_loss(t, {}, gt12, cand12, 12), ArgumentError);
}

TEST_CASE("generator loss sums the real and augmented branches") {
    ad::Tape t;
    auto rs = const_scores(t, {0.5});
    auto as = const_scores(t, {0.5});
    std::vector<std::vector<Vec2>> gt(1, std::vector<Vec2>(3, {0, 0}));
    std::vector<std::vector<std::vector<ad::Value>>> cand(1);
    cand[0].resize(1);
    for (int i = 0; i < 3; ++i) cand[0][0].push_back(t.constant(Tensor::vec({0.0, 0.0})));
    // both branches: adv ln2, l2 0 -> total 2 ln2
    const double v = losses::generator_loss(t, rs, as, gt, cand, gt, cand, 3).scalar();
    REQUIRE(v == Catch::Approx(2.0 * kLn2).margin(1e-9));
}

TEST_CASE("loss lines round-trip every double exactly") {
    losses::LossReport r;
    r.step = 123;
    r.d_loss = 4.0 * kLn2;
    r.a_adv = 1.0 / 3.0;
    r.a_l2 = 1e-17;
    r.g_real_adv = 123456.789012345;
    r.g_real_l2 = 5e300;
    r.g_synth_adv = -0.0;
    r.g_synth_l2 = 2.2250738585072014e-308;  // smallest normal double
    const std::string line = losses::format_loss_line(r);

    std::istringstream in(line);
    long long step;
    double vals[7];
    in >> step;
    for (double& v : vals) in >> v;
    REQUIRE(in);
    REQUIRE(step == 123);
    REQUIRE(vals[0] == r.d_loss);
    REQUIRE(vals[1] == r.a_adv);
    REQUIRE(vals[2] == r.a_l2);
    REQUIRE(vals[3] == r.g_real_adv);
    REQUIRE(vals[4] == r.g_real_l2);
    REQUIRE(vals[5] == r.g_synth_adv);
    REQUIRE(vals[6] == r.g_synth_l2);
}
