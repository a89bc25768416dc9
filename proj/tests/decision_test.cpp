#include "wishful/decision.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace wishful;

namespace {

DecisionProblem dissonance() {
    DecisionProblem p;
    p.action_labels = {"a1", "a2", "a3"};
    p.state_labels = {"w1", "w2"};
    p.utilities = {{4, 0}, testgen::Vec{3, 3}, {0, 4}};
    p.prior = {0.5, 0.5};
    p.delta = 1.0;
    p.divergence = builtin_divergence(DivergenceKind::mod_chi2);
    return p;
}

DecisionProblem risky_asset(double tax = 0.0) {
    DecisionProblem p;
    p.action_labels = {"a_R", "a_S"};
    p.state_labels = {"w_H", "w_L"};
    p.utilities = {{4 * (1 - tax), 0}, {1, 1}};
    p.prior = {0.0, 1.0};
    p.delta = 1.0;
    p.divergence = builtin_divergence(DivergenceKind::burg);
    return p;
}

DecisionProblem random_problem(std::mt19937_64& rng, DivergenceKind kind) {
    std::uniform_int_distribution<std::size_t> actions(1, 5);
    const auto inst = testgen::random_instance(rng, 2, 5);
    DecisionProblem p;
    const std::size_t m = actions(rng);
    for (std::size_t a = 0; a < m; ++a) {
        p.action_labels.push_back("a" + std::to_string(a));
        p.utilities.push_back(testgen::random_utilities(rng, inst.q.size()));
    }
    for (std::size_t i = 0; i < inst.q.size(); ++i) p.state_labels.push_back("w" + std::to_string(i));
    p.prior = inst.q;
    p.delta = inst.delta;
    p.divergence = builtin_divergence(kind);
    return p;
}

} // namespace

TEST(Analyze, DissonanceExample) {
    const auto result = analyze(dissonance());
    ASSERT_EQ(result.per_action.size(), 3u);
    for (const auto& r : result.per_action) EXPECT_NEAR(r.dual.value, 3.0, 1e-9);
    EXPECT_EQ(result.wt_optimal, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(result.eu_optimal, std::vector<std::size_t>{1});
    const std::vector<std::vector<double>> beliefs{{1, 0}, testgen::Vec{0.5, 0.5}, {0, 1}};
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(result.per_action[a].profile.beliefs[i], beliefs[a][i], 1e-9);
    EXPECT_EQ(result.per_action[0].profile.censored, std::vector<std::size_t>{1});
    EXPECT_EQ(result.per_action[2].profile.censored, std::vector<std::size_t>{0});
    EXPECT_NEAR(result.value_gap, 0.0, 1e-9);
}

TEST(Analyze, RiskyAsset) {
    const auto result = analyze(risky_asset());
    EXPECT_NEAR(result.per_action[0].dual.value, 3.0 - std::log(4.0), 1e-12);
    EXPECT_NEAR(result.per_action[1].dual.value, 1.0, 1e-12);
    EXPECT_EQ(result.wt_optimal, std::vector<std::size_t>{0});
    EXPECT_EQ(result.eu_optimal, std::vector<std::size_t>{1});
    EXPECT_NEAR(result.per_action[0].profile.beliefs[0], 0.75, 1e-12);
    EXPECT_NEAR(result.per_action[0].profile.beliefs[1], 0.25, 1e-12);
    EXPECT_GT(result.value_gap, 0.0);
}

TEST(Analyze, SingleConstantAction) {
    DecisionProblem p;
    p.action_labels = {"only"};
    p.state_labels = {"x", "y", "z"};
    p.utilities = {{2.5, 2.5, 2.5}};
    p.prior = {0.2, 0.3, 0.5};
    for (auto kind : kAllDivergences) {
        p.divergence = builtin_divergence(kind);
        const auto result = analyze(p);
        EXPECT_NEAR(result.per_action[0].dual.value, 2.5, 1e-12);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(result.per_action[0].profile.beliefs[i], p.prior[i], 1e-12);
    }
}

TEST(Analyze, SolverErrorsCarryActionContext) {
    auto p = risky_asset();
    p.divergence.conj_prime = [](double) { return 2.0; };
    try {
        analyze(p);
        FAIL() << "expected solver_error";
    } catch (const solver_error& e) {
        EXPECT_NE(std::string(e.what()).find("a_R"), std::string::npos) << e.what();
    }
}

TEST(Analyze, ParallelMatchesSerial) {
    std::mt19937_64 rng(61);
    for (int k = 0; k < 20; ++k) {
        const auto p = random_problem(rng, kAllDivergences[k % 4]);
        const auto serial = analyze(p);
        const auto parallel = analyze(p, kDefaultTolerance, true);
        EXPECT_EQ(serial.wt_optimal, parallel.wt_optimal);
        for (std::size_t a = 0; a < p.num_actions(); ++a)
            EXPECT_EQ(serial.per_action[a].dual.lambda_star, parallel.per_action[a].dual.lambda_star);
    }
}

TEST(Validate, RejectsBrokenProblems) {
    auto p = dissonance();
    p.prior = {0.5, 0.4};
    try {
        validate(p);
        FAIL();
    } catch (const input_error& e) {
        EXPECT_NE(std::string(e.what()).find("prior"), std::string::npos);
    }
    p = dissonance();
    p.delta = 0.0;
    EXPECT_THROW(validate(p), input_error);
    p = dissonance();
    p.utilities[1].pop_back();
    EXPECT_THROW(validate(p), input_error);
    p = dissonance();
    p.utilities[0][0] = std::nan("");
    EXPECT_THROW(validate(p), input_error);
    p = dissonance();
    p.prior = {0.0, 0.0};
    EXPECT_THROW(validate(p), input_error);
}

TEST(EuArgmax, Examples) {
    EXPECT_EQ(eu_argmax(dissonance()), std::vector<std::size_t>{1});
    EXPECT_EQ(eu_argmax(risky_asset()), std::vector<std::size_t>{1});
    auto same = dissonance();
    same.utilities = {{1, 2}, testgen::Vec{1, 2}, {1, 2}};
    EXPECT_EQ(eu_argmax(same), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(SaddleReport, Dissonance) {
    const auto p = dissonance();
    const auto a1 = saddle_report(p, 0);
    EXPECT_NEAR(a1.lambda_star, 2.0, 1e-9);
    EXPECT_NEAR(a1.psi_at_lambda, 3.0, 1e-9);
    EXPECT_TRUE(a1.matches_value);
    const auto a2 = saddle_report(p, 1);
    EXPECT_NEAR(a2.lambda_star, 3.0, 1e-9);
    EXPECT_NEAR(a2.psi_at_lambda, 3.0, 1e-9);
    EXPECT_TRUE(a2.matches_value);
    EXPECT_TRUE(saddle_report(risky_asset(), 0).matches_value);
    EXPECT_THROW(saddle_report(p, 3), input_error);
}

TEST(SaddleReport, MatchesOnRandomInstances) {
    std::mt19937_64 rng(67);
    for (int k = 0; k < 100; ++k) {
        const auto p = random_problem(rng, kAllDivergences[k % 4]);
        for (std::size_t a = 0; a < p.num_actions(); ++a) EXPECT_TRUE(saddle_report(p, a).matches_value);
    }
}

TEST(SweepPrior, TwoStateEndpoints) {
    DecisionProblem p;
    p.action_labels = {"a"};
    p.state_labels = {"H", "L"};
    p.utilities = {{4, 0}};
    p.prior = {0.5, 0.5};
    const std::vector<double> grid{0.0, 0.5, 1.0};

    p.divergence = builtin_divergence(DivergenceKind::burg);
    auto rows = sweep_prior(p, 0, grid);
    EXPECT_NEAR(rows[0].p_star, 0.75, 1e-12);
    EXPECT_TRUE(rows[0].emergent);
    EXPECT_EQ(rows[2].p_star, 1.0);
    EXPECT_EQ(rows[2].lambda_star, 4.0);

    p.divergence = builtin_divergence(DivergenceKind::mod_chi2);
    rows = sweep_prior(p, 0, grid);
    EXPECT_NEAR(rows[1].p_star, 1.0, 1e-9);
    EXPECT_FALSE(rows[1].censored);

    p.divergence = builtin_divergence(DivergenceKind::kl);
    rows = sweep_prior(p, 0, grid);
    EXPECT_EQ(rows[0].p_star, 0.0);
    EXPECT_FALSE(rows[0].emergent);
    EXPECT_EQ(rows[2].p_star, 1.0);

    // Sweeping the low state: it is censored once its prior is at most 1/2.
    p.divergence = builtin_divergence(DivergenceKind::mod_chi2);
    rows = sweep_prior(p, 1, std::vector<double>{0.3, 0.5, 0.7});
    EXPECT_TRUE(rows[0].censored);
    EXPECT_TRUE(rows[1].censored);
    EXPECT_FALSE(rows[2].censored);
}

TEST(SweepPrior, RejectsBadInput) {
    auto p = dissonance();
    EXPECT_THROW(sweep_prior(p, 0, std::vector<double>{1.5}), input_error);
    EXPECT_THROW(sweep_prior(p, 2, std::vector<double>{0.5}), input_error);
    p.state_labels.push_back("w3");
    for (auto& row : p.utilities) row.push_back(0);
    p.prior = {0.2, 0.3, 0.5};
    EXPECT_THROW(sweep_prior(p, 0, std::vector<double>{0.5}), input_error);
}

class DecisionProperties : public ::testing::TestWithParam<DivergenceKind> {};

TEST_P(DecisionProperties, TransformedUtilityEquivalence) {
    std::mt19937_64 rng(71);
    for (int k = 0; k < 100; ++k) {
        const auto p = random_problem(rng, GetParam());
        const auto result = analyze(p);
        EXPECT_EQ(result.wt_optimal, transformed_eu_argmax(result));
        EXPECT_GE(result.value_gap, -1e-9);
    }
}

TEST_P(DecisionProperties, GapPositiveForNonconstantActions) {
    std::mt19937_64 rng(73);
    for (int k = 0; k < 50; ++k) {
        const auto p = random_problem(rng, GetParam());
        EXPECT_GT(analyze(p).value_gap, 0.0);
    }
}

TEST_P(DecisionProperties, ScaleCoherence) {
    std::mt19937_64 rng(79);
    for (int k = 0; k < 50; ++k) {
        const auto p = random_problem(rng, GetParam());
        auto unit = p;
        for (auto& row : unit.utilities)
            for (auto& x : row) x /= p.delta;
        unit.delta = 1.0;
        const auto a = analyze(p);
        const auto b = analyze(unit);
        EXPECT_EQ(a.wt_optimal, b.wt_optimal);
        for (std::size_t i = 0; i < p.num_actions(); ++i)
            EXPECT_NEAR(a.per_action[i].dual.value, p.delta * b.per_action[i].dual.value, 1e-8);
    }
}

TEST_P(DecisionProperties, RowShiftMovesValueOnly) {
    std::mt19937_64 rng(83);
    for (int k = 0; k < 50; ++k) {
        const auto p = random_problem(rng, GetParam());
        auto shifted = p;
        for (auto& x : shifted.utilities[0]) x += 1.75;
        const auto a = analyze(p);
        const auto b = analyze(shifted);
        EXPECT_NEAR(b.per_action[0].dual.value, a.per_action[0].dual.value + 1.75, 1e-9);
        for (std::size_t i = 0; i < p.num_states(); ++i)
            EXPECT_NEAR(b.per_action[0].profile.beliefs[i], a.per_action[0].profile.beliefs[i], 1e-9);
    }
}

INSTANTIATE_TEST_SUITE_P(All, DecisionProperties, ::testing::ValuesIn(kAllDivergences),
                         [](const auto& info) { return std::string(to_string(info.param)); });
