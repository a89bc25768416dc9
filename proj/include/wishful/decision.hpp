#pragma once

#include "wishful/beliefs.hpp"
#include "wishful/divergence.hpp"
#include "wishful/dual_solver.hpp"
#include "wishful/errors.hpp"
#include "wishful/probability.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace wishful {

/// Values within this distance of the best one count as tied.
inline constexpr double kTieTolerance = 1e-9;

struct DecisionProblem {
    std::vector<std::string> action_labels;
    std::vector<std::string> state_labels;
    std::vector<std::vector<double>> utilities; ///< [action][state]
    std::vector<double> prior;
    double delta = 1.0;
    DivergenceSpec divergence = builtin_divergence(DivergenceKind::kl);

    std::size_t num_actions() const { return utilities.size(); }
    std::size_t num_states() const { return prior.size(); }
    std::span<const double> row(std::size_t a) const { return utilities.at(a); }
};

/// Throws input_error naming the first violated invariant.
inline void validate(const DecisionProblem& problem) {
    if (problem.action_labels.empty()) throw input_error("actions: at least one action is required");
    if (problem.state_labels.empty()) throw input_error("states: at least one state is required");
    if (problem.utilities.size() != problem.action_labels.size()) {
        std::ostringstream msg;
        msg << "utilities: " << problem.utilities.size() << " rows for " << problem.action_labels.size()
            << " actions";
        throw input_error(msg.str());
    }
    for (std::size_t a = 0; a < problem.utilities.size(); ++a) {
        const auto& row = problem.utilities[a];
        if (row.size() != problem.state_labels.size()) {
            std::ostringstream msg;
            msg << "utilities: row " << a << " has " << row.size() << " entries for "
                << problem.state_labels.size() << " states";
            throw input_error(msg.str());
        }
        for (double x : row)
            if (!std::isfinite(x)) throw input_error("utilities: row " + std::to_string(a) + " has a non-finite entry");
    }
    if (problem.prior.size() != problem.state_labels.size()) {
        std::ostringstream msg;
        msg << "prior: " << problem.prior.size() << " entries for " << problem.state_labels.size() << " states";
        throw input_error(msg.str());
    }
    check_probability_vector(problem.prior, "prior");
    if (!(problem.delta > 0.0) || !std::isfinite(problem.delta))
        throw input_error("delta: must be a positive finite number");
}

struct ActionResult {
    DualSolution dual;
    BeliefProfile profile;
};

struct WTAnalysis {
    std::vector<ActionResult> per_action;
    std::vector<std::size_t> wt_optimal;
    std::vector<std::size_t> eu_optimal;
    std::vector<double> expected_utilities;    ///< E_q u(a) under the prior.
    /// u-hat(a) = lambda*_a + delta * E_q phi*((u - lambda*_a)/delta); constant in the state.
    std::vector<double> transformed_utilities;
    double value_gap = 0.0; ///< max_a V(a) - max_a E_q u(a)
};

/// Indices whose score is within kTieTolerance of the maximum.
inline std::vector<std::size_t> argmax_set(std::span<const double> scores) {
    std::vector<std::size_t> out;
    if (scores.empty()) return out;
    const double best = *std::max_element(scores.begin(), scores.end());
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (scores[i] >= best - kTieTolerance) out.push_back(i);
    return out;
}

inline std::vector<std::size_t> eu_argmax(const DecisionProblem& problem) {
    validate(problem);
    std::vector<double> eu;
    for (std::size_t a = 0; a < problem.num_actions(); ++a) eu.push_back(expectation(problem.row(a), problem.prior));
    return argmax_set(eu);
}

inline ActionResult solve_action(const DecisionProblem& problem, std::size_t a, double tol) {
    try {
        ActionResult r;
        r.dual = solve_dual(problem.divergence, problem.row(a), problem.prior, problem.delta, tol);
        r.profile = recover_beliefs(problem.divergence, problem.row(a), problem.prior, problem.delta, r.dual);
        return r;
    } catch (const solver_error& e) {
        throw solver_error("action '" + problem.action_labels[a] + "': " + e.what());
    }
}

/**
 * Solves the joint action/belief problem. Each action is solved independently
 * (in parallel when `parallel` is set); assembly is ordered by action index, so
 * the result does not depend on scheduling.
 */
inline WTAnalysis analyze(const DecisionProblem& problem, double tol = kDefaultTolerance, bool parallel = false) {
    validate(problem);
    const std::size_t n = problem.num_actions();

    WTAnalysis out;
    out.per_action.resize(n);
    if (parallel && n > 1) {
        std::vector<std::future<ActionResult>> jobs;
        for (std::size_t a = 0; a < n; ++a)
            jobs.push_back(std::async(std::launch::async, [&problem, a, tol] { return solve_action(problem, a, tol); }));
        for (std::size_t a = 0; a < n; ++a) out.per_action[a] = jobs[a].get();
    } else {
        for (std::size_t a = 0; a < n; ++a) out.per_action[a] = solve_action(problem, a, tol);
    }

    std::vector<double> values;
    for (std::size_t a = 0; a < n; ++a) {
        const auto& dual = out.per_action[a].dual;
        values.push_back(dual.value);
        out.expected_utilities.push_back(expectation(problem.row(a), problem.prior));
        out.transformed_utilities.push_back(
            dual_objective(problem.divergence, problem.row(a), problem.prior, problem.delta, dual.lambda_star));
    }
    out.wt_optimal = argmax_set(values);
    out.eu_optimal = argmax_set(out.expected_utilities);
    out.value_gap = *std::max_element(values.begin(), values.end()) -
                    *std::max_element(out.expected_utilities.begin(), out.expected_utilities.end());
    return out;
}

/// Argmax of expected transformed utility; equals wt_optimal.
inline std::vector<std::size_t> transformed_eu_argmax(const WTAnalysis& analysis) {
    return argmax_set(analysis.transformed_utilities);
}

struct SaddleReport {
    double lambda_star = 0.0;
    double psi_at_lambda = 0.0; ///< inner min of Psi(a, .)
    double primal_value = 0.0;  ///< E_{p*} u - delta * C(p* || q)
    bool matches_value = false;
};

/// Max-min view of one action: the inner dual minimum against the primal
/// objective at the recovered beliefs.
inline SaddleReport saddle_report(const DecisionProblem& problem, std::size_t action, double tol = kDefaultTolerance) {
    validate(problem);
    if (action >= problem.num_actions()) throw input_error("saddle_report: action index out of range");
    const auto r = solve_action(problem, action, tol);
    const auto u = problem.row(action);

    double expected = 0.0;
    double divergence = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        expected += r.profile.beliefs[i] * u[i];
        divergence += cost_term(problem.divergence, r.profile.beliefs[i], problem.prior[i]);
    }
    SaddleReport rep;
    rep.lambda_star = r.dual.lambda_star;
    rep.psi_at_lambda = dual_objective(problem.divergence, u, problem.prior, problem.delta, r.dual.lambda_star);
    rep.primal_value = expected - problem.delta * divergence;
    rep.matches_value = std::abs(rep.psi_at_lambda - rep.primal_value) <= 1e-9 * std::max(1.0, std::abs(rep.psi_at_lambda));
    return rep;
}

struct SweepRow {
    double q = 0.0;
    double lambda_star = 0.0;
    double p_star = 0.0;
    bool censored = false;
    bool emergent = false;
};

/**
 * Re-solves a two-state template with the swept state's prior set to each grid
 * value and the other state's to the complement. Flags refer to the swept state.
 */
inline std::vector<SweepRow> sweep_prior(const DecisionProblem& problem, std::size_t state, std::span<const double> grid,
                                         std::size_t action = 0, double tol = kDefaultTolerance) {
    validate(problem);
    if (problem.num_states() != 2) throw input_error("sweep: the problem must have exactly two states");
    if (state >= 2) throw input_error("sweep: state index out of range");
    if (action >= problem.num_actions()) throw input_error("sweep: action index out of range");

    const std::size_t other = 1 - state;
    const auto u = problem.row(action);
    std::vector<SweepRow> rows;
    for (double g : grid) {
        if (!(g >= 0.0 && g <= 1.0)) {
            std::ostringstream msg;
            msg << "sweep: grid value " << g << " outside [0, 1]";
            throw input_error(msg.str());
        }
        std::vector<double> q(2);
        q[state] = g;
        q[other] = 1.0 - g;
        DualSolution dual;
        try {
            dual = solve_dual(problem.divergence, u, q, problem.delta, tol);
        } catch (const solver_error& e) {
            std::ostringstream msg;
            msg << "sweep at q = " << g << ": " << e.what();
            throw solver_error(msg.str());
        }
        auto profile = recover_beliefs(problem.divergence, u, q, problem.delta, dual);
        SweepRow row;
        row.q = g;
        row.lambda_star = dual.lambda_star;
        row.p_star = profile.beliefs[state];
        row.censored = std::find(profile.censored.begin(), profile.censored.end(), state) != profile.censored.end();
        row.emergent = std::find(profile.emergent.begin(), profile.emergent.end(), state) != profile.emergent.end();
        rows.push_back(row);
    }
    return rows;
}

} // namespace wishful
