#pragma once

#include "wishful/divergence.hpp"
#include "wishful/errors.hpp"
#include "wishful/probability.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <utility>

namespace wishful {

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr int kMaxDualIterations = 200;

/// Outcome of the one-dimensional dual problem for a single action.
struct DualSolution {
    double lambda_star = 0.0;
    double value = 0.0;                      ///< V_phi(U(a)) = psi(lambda_star).
    std::pair<double, double> bracket{0, 0}; ///< Interval actually searched.
    /// |sum_q q * phi*'((u - lambda*)/delta) - 1|. In the pinned case this is
    /// the mass left over for the emergent state.
    double foc_residual = 0.0;
    /// lambda* sits at u - delta*b of a zero-prior state (cognitive emergence).
    bool constrained_at_emergence = false;
    int iterations = 0;
};

namespace detail {

inline void check_dual_inputs(std::span<const double> u, std::span<const double> q, double delta) {
    check_same_size(u, q, "utilities", "prior");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw input_error("delta must be a positive finite number");
    for (double x : u)
        if (!std::isfinite(x)) throw input_error("utilities must be finite");
}

} // namespace detail

/// psi(lambda) = lambda + delta * E_q[phi*((u - lambda)/delta)]. Zero-prior
/// states contribute nothing; +inf when a supported state leaves dom phi*.
inline double dual_objective(const DivergenceSpec& spec, std::span<const double> u, std::span<const double> q,
                             double delta, double lambda) {
    detail::check_dual_inputs(u, q, delta);
    double expectation = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (q[i] <= 0.0) continue;
        double c = spec.conj((u[i] - lambda) / delta);
        if (c == kInf) return kInf;
        expectation += q[i] * c;
    }
    return lambda + delta * expectation;
}

/// psi'(lambda) = 1 - E_q[phi*'((u - lambda)/delta)]; nondecreasing in lambda.
inline double dual_derivative(const DivergenceSpec& spec, std::span<const double> u, std::span<const double> q,
                              double delta, double lambda) {
    double mass = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (q[i] <= 0.0) continue;
        double w = spec.conj_prime((u[i] - lambda) / delta);
        if (w == kInf) return -kInf;
        mass += q[i] * w;
    }
    return 1.0 - mass;
}

/**
 * Minimizes psi over its feasible bracket.
 *
 * The bracket's lower end is the largest of min(u), the emergence constraint
 * u(w) - delta*b over zero-prior states, and the conjugate-domain boundary
 * u(w) - delta*sup(dom phi*) over supported states. The upper end is max(u),
 * where psi' >= 0 always holds. When psi' is already nonnegative at the lower
 * end, that end is the answer (pinned at emergence when the zero-prior
 * constraint set it). Otherwise the smallest root of psi' is located by
 * bisection to width `tol`, followed by one secant step inside the final
 * bracket.
 */
inline DualSolution solve_dual(const DivergenceSpec& spec, std::span<const double> u, std::span<const double> q,
                               double delta, double tol = kDefaultTolerance) {
    detail::check_dual_inputs(u, q, delta);
    check_probability_vector(q, "prior");
    if (!(tol > 0.0)) throw input_error("tol must be positive");

    const double u_min = *std::min_element(u.begin(), u.end());
    const double u_max = *std::max_element(u.begin(), u.end());

    double zero_prior_bound = -kInf;
    double domain_bound = -kInf;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (q[i] > 0.0) {
            if (std::isfinite(spec.conj_domain_upper))
                domain_bound = std::max(domain_bound, u[i] - delta * spec.conj_domain_upper);
        } else if (std::isfinite(spec.slope_at_infinity)) {
            zero_prior_bound = std::max(zero_prior_bound, u[i] - delta * spec.slope_at_infinity);
        }
    }

    const double lower = std::max({u_min, zero_prior_bound, domain_bound});
    if (lower > u_max) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "empty feasible bracket [" << lower << ", " << u_max << "]";
        throw solver_error(msg.str());
    }

    DualSolution sol;
    const bool open_at_lower = domain_bound >= lower;
    double lo = lower;
    if (open_at_lower) {
        lo = lower + tol * std::max(1.0, std::abs(u_max));
        if (lo >= u_max) lo = 0.5 * (lower + u_max);
    }
    double hi = u_max;
    sol.bracket = {lo, hi};

    auto dpsi = [&](double lambda) { return dual_derivative(spec, u, q, delta, lambda); };

    double d_lo = dpsi(lo);
    if (d_lo >= 0.0) {
        sol.lambda_star = lo;
        sol.constrained_at_emergence = !open_at_lower && zero_prior_bound == lower;
    } else {
        double d_hi = dpsi(hi);
        if (d_hi < -1e-12)
            throw solver_error("dual derivative negative at max utility; conjugate derivative is not consistent");
        int it = 0;
        while (hi - lo > tol) {
            if (it >= kMaxDualIterations) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "dual bisection did not converge in " << kMaxDualIterations << " iterations (bracket [" << lo
                    << ", " << hi << "])";
                throw solver_error(msg.str());
            }
            double mid = lo + 0.5 * (hi - lo);
            if (mid <= lo || mid >= hi) break;
            ++it;
            double d_mid = dpsi(mid);
            if (d_mid >= 0.0) {
                hi = mid;
                d_hi = d_mid;
            } else {
                lo = mid;
                d_lo = d_mid;
            }
        }
        sol.iterations = it;
        double root = hi;
        if (std::isfinite(d_lo) && d_hi > d_lo) {
            root = hi - d_hi * (hi - lo) / (d_hi - d_lo);
            root = std::clamp(root, lo, hi);
        }
        sol.lambda_star = root;
    }

    sol.value = dual_objective(spec, u, q, delta, sol.lambda_star);
    if (!std::isfinite(sol.value)) throw solver_error("dual value is not finite at the computed multiplier");
    sol.foc_residual = std::abs(dpsi(sol.lambda_star));
    return sol;
}

/// Entropic risk delta * log E_q exp(u/delta); the KL closed form.
inline double value_closed_form_kl(std::span<const double> u, std::span<const double> q, double delta) {
    detail::check_dual_inputs(u, q, delta);
    double shift = -kInf;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (q[i] > 0.0) shift = std::max(shift, u[i] / delta);
    if (shift == -kInf) throw input_error("prior has no positive entry");
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (q[i] > 0.0) sum += q[i] * std::exp(u[i] / delta - shift);
    return delta * (shift + std::log(sum));
}

/// Mean-variance closed form for the modified chi-squared divergence. Valid
/// only while no state is censored, i.e. delta >= (E_q u - min u) / 2.
inline double value_closed_form_chi2(std::span<const double> u, std::span<const double> q, double delta) {
    detail::check_dual_inputs(u, q, delta);
    const double mean = expectation(u, q);
    const double u_min = *std::min_element(u.begin(), u.end());
    if (delta < (mean - u_min) / 2.0) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "mean-variance form requires delta >= (E_q u - min u)/2 = " << (mean - u_min) / 2.0
            << "; use solve_dual";
        throw input_error(msg.str());
    }
    double var = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (q[i] > 0.0) var += q[i] * (u[i] - mean) * (u[i] - mean);
    return mean + var / (4.0 * delta);
}

} // namespace wishful
