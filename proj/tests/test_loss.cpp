#include <gtest/gtest.h>

#include <cmath>

#include "docbin/nn/loss.hpp"
#include "docbin/nn/networks.hpp"
#include "support/loss_fixture.hpp"
#include "support/random_nets.hpp"

namespace docbin::nn {
namespace {

using namespace ops;
using namespace testing::loss_fixture;
using testing::random_tensor;

struct DLossValues {
    double total, real, fake, penalty;
};

DLossValues run_d_loss(const LossConfig& cfg, const Critic& critic = quadratic_critic) {
    Tape tape;
    const CriticLoss l = d_loss(critic, tape.constant(kFake), tape.constant(kCond), kReal, kEps, cfg);
    return {l.total.value().item(), l.real_score, l.fake_score, l.penalty};
}

TEST(DLoss, MatchesHandEvaluation) {
    LossConfig cfg;
    cfg.alpha = 7.0;
    const DLossValues l = run_d_loss(cfg);
    const double real = (hand_d(kReal, 0) + hand_d(kReal, 1)) / 2.0;
    const double fake = (hand_d(kFake, 0) + hand_d(kFake, 1)) / 2.0;
    EXPECT_NEAR(l.real, real, 1e-12);
    EXPECT_NEAR(l.fake, fake, 1e-12);
    EXPECT_NEAR(l.penalty, hand_penalty(7.0), 1e-12);
    EXPECT_NEAR(l.total, -real + fake + hand_penalty(7.0), 1e-9);
}

TEST(DLoss, ZeroCriticLeavesOnlyPenalty) {
    LossConfig cfg;
    cfg.alpha = 3.5;
    const Critic zero = [](Var c, Var) { return scale(global_mean(c), 0.0); };
    EXPECT_NEAR(run_d_loss(cfg, zero).total, 3.5, 1e-15);
}

TEST(DLoss, LinearInAlpha) {
    LossConfig a, b;
    a.alpha = 4.0;
    b.alpha = 8.0;
    const DLossValues la = run_d_loss(a), lb = run_d_loss(b);
    EXPECT_NEAR(lb.total - la.total, la.penalty, 1e-12);
}

TEST(DLoss, RejectsDifferentiableFake) {
    Tape tape;
    EXPECT_THROW(d_loss(quadratic_critic, tape.leaf(kFake, true), tape.constant(kCond), kReal, kEps, LossConfig{}),
                 Error);
}

TEST(GLoss, MatchesHandEvaluation) {
    LossConfig cfg;
    cfg.lambda = 50.0;
    Tape tape;
    const GeneratorLoss l = g_loss(quadratic_critic, tape.constant(kFake), tape.constant(kCond), kReal, cfg);
    const double adv = -(hand_d(kFake, 0) + hand_d(kFake, 1)) / 2.0;
    EXPECT_NEAR(l.adversarial, adv, 1e-12);
    EXPECT_NEAR(l.bce, hand_bce(kFake, kReal), 1e-12);
    EXPECT_NEAR(l.total.value().item(), adv + 50.0 * hand_bce(kFake, kReal), 1e-9);
}

TEST(GLoss, LinearInLambda) {
    Tape tape;
    LossConfig cfg;
    auto total = [&](double lambda) {
        cfg.lambda = lambda;
        return g_loss(quadratic_critic, tape.constant(kFake), tape.constant(kCond), kReal, cfg);
    };
    const GeneratorLoss l0 = total(0.0), l1 = total(10.0), l2 = total(20.0);
    EXPECT_EQ(l0.total.value().item(), l0.adversarial);
    EXPECT_NEAR(l2.total.value().item() - l1.total.value().item(), 10.0 * l1.bce, 1e-12);
}

TEST(Bce, ConstantHalfIsLn2) {
    Tape tape;
    EXPECT_NEAR(bce(tape.constant(Tensor(kReal.shape, 0.5)), kReal).value().item(), std::log(2.0), 1e-15);
}

TEST(Bce, PerfectPredictionAtClamp) {
    Tape tape;
    EXPECT_LT(bce(tape.constant(kReal), kReal).value().item(), 1e-6);
    Tensor bad = kReal;
    bad.data[0] = 1.5;
    EXPECT_THROW(bce(tape.constant(kFake), bad), Error);
}

TEST(LossConfig, Validation) {
    LossConfig cfg;
    cfg.alpha = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.alpha = 1.0;
    cfg.lambda = -1.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.lambda = 0.0;
    EXPECT_NO_THROW(cfg.validate());
}

// ---- gradient penalty ----

TEST(GradientPenalty, MeanCritic) {
    Tape tape;
    const Critic mean = [](Var c, Var) { return global_mean(c); };
    Var yh = tape.leaf(Tensor(Shape{1, 1, 2, 2}, 0.3), true);
    // grad = 1/4 per element, norm 1/2, penalty alpha * 1/4.
    EXPECT_NEAR(gradient_penalty(mean, yh, yh, 10.0).value().item(), 2.5, 1e-15);
}

TEST(GradientPenalty, LinearCriticClosedForm) {
    Rng rng(71);
    for (int i = 0; i < 5; ++i) {
        const testing::LinearCriticCheck c = testing::check_linear_critic(rng, 10.0);
        EXPECT_NEAR(c.penalty, c.expected_penalty, 1e-9);
        EXPECT_LT(c.max_grad_error, 1e-9);
    }
}

TEST(GradientPenalty, ParameterGradientMatchesFiniteDifferences) {
    Rng rng(72);
    for (int i = 0; i < 6; ++i) {
        const testing::RandomCritic d = testing::make_random_critic(rng);
        const testing::GradCheck c = testing::check_random_critic(d);
        EXPECT_LT(c.max_rel, 1e-3) << "critic " << i;
        EXPECT_GT(c.checked, 0u);
    }
}

TEST(GradientPenalty, FiniteDifferenceModeAgreesWithReverse) {
    DiscriminatorConfig small;
    small.widths[0] = small.widths[1] = small.widths[2] = 2;
    const Discriminator disc(small);
    const NetParams params = disc.init(4);
    Rng rng(73);
    const Tensor y_hat = random_tensor(rng, Shape{2, 1, 16, 16}, 0, 1);
    const Tensor cond = random_tensor(rng, Shape{2, 3, 16, 16}, 0, 1);

    const CriticFactory make = [&](Tape& t, const std::vector<Tensor>& values) {
        NetParams p = params;
        p.tensors = values;
        auto bound = std::make_shared<BoundParams>(bind(t, p, false));
        return Critic([&disc, bound](Var c, Var k) { return disc.forward(*bound, c, k); });
    };
    const auto numeric = penalty_gradient_fd(make, params.tensors, y_hat, cond, 10.0);

    Tape tape;
    const BoundParams bp = bind(tape, params, true);
    const Critic critic = [&](Var c, Var k) { return disc.forward(bp, c, k); };
    const Var gp = gradient_penalty(critic, tape.leaf(y_hat, true), tape.constant(cond), 10.0);
    std::vector<Tensor> analytic;
    for (const auto& g : tape.grad(gp, bp.vars)) analytic.push_back(g.value());
    EXPECT_LT(testing::max_relative_error(analytic, numeric, 1e-4), 1e-3);
}

TEST(Interpolate, PerSampleWeights) {
    const Tensor y = interpolate(kReal, kFake, kEps);
    for (int n = 0; n < 2; ++n) {
        for (int i = 0; i < 4; ++i) {
            const int k = 4 * n + i;
            EXPECT_DOUBLE_EQ(y.data[k], kEps[n] * kReal.data[k] + (1 - kEps[n]) * kFake.data[k]);
        }
    }
    EXPECT_THROW(interpolate(kReal, kFake, {0.5}), Error);
}

}  // namespace
}  // namespace docbin::nn
