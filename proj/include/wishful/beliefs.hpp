#pragma once

#include "wishful/divergence.hpp"
#include "wishful/dual_solver.hpp"
#include "wishful/errors.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wishful {

/// Negative leftover mass down to this size is rounding noise and clamps to 0.
inline constexpr double kResidualClamp = 1e-9;
inline constexpr double kOverprecisionSlack = 1e-12;

/// Optimal distorted beliefs for one action.
struct BeliefProfile {
    /// w(w) = phi*'((u - lambda*)/delta) for supported states; empty for
    /// zero-prior states, where the weight is undefined.
    std::vector<std::optional<double>> weights;
    std::vector<double> beliefs;
    std::vector<std::size_t> censored;    ///< q > 0 and p* = 0
    std::vector<std::size_t> emergent;    ///< q = 0 and p* > 0
    std::vector<std::size_t> overprecise; ///< w > 1
    double residual_mass = 0.0;           ///< Mass placed on the emergent state.
    std::vector<std::string> warnings;
};

namespace detail {

// Slack on the censorship test, in utility units. lambda* is only known to the
// solver tolerance, so a state sitting exactly on the cutoff must not flip.
inline double censor_slack(double lambda) { return 1e-9 * std::max(1.0, std::abs(lambda)); }

inline bool is_censored(const DivergenceSpec& spec, double u, double lambda, double delta) {
    if (!std::isfinite(spec.censor_threshold)) return false;
    return u <= lambda + delta * spec.censor_threshold + censor_slack(lambda);
}

} // namespace detail

/// p*(w) = phi*'((u(w) - lambda*)/delta) q(w) on supported states; in the
/// pinned case the leftover mass goes to the top-utility zero-prior state.
inline BeliefProfile recover_beliefs(const DivergenceSpec& spec, std::span<const double> u,
                                     std::span<const double> q, double delta, const DualSolution& dual) {
    detail::check_dual_inputs(u, q, delta);
    const std::size_t n = u.size();
    const double lambda = dual.lambda_star;

    BeliefProfile profile;
    profile.weights.assign(n, std::nullopt);
    profile.beliefs.assign(n, 0.0);

    double supported_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (q[i] <= 0.0) continue;
        double w = detail::is_censored(spec, u[i], lambda, delta) ? 0.0 : spec.conj_prime((u[i] - lambda) / delta);
        if (!std::isfinite(w)) throw solver_error("belief weight is not finite; multiplier outside dom phi*");
        profile.weights[i] = w;
        profile.beliefs[i] = w * q[i];
        supported_mass += profile.beliefs[i];
    }

    if (dual.constrained_at_emergence) {
        double residual = 1.0 - supported_mass;
        if (residual < -kResidualClamp) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "negative residual mass " << residual << " at the emergence pin";
            throw solver_error(msg.str());
        }
        residual = std::max(residual, 0.0);

        double top = -kInf;
        for (std::size_t i = 0; i < n; ++i)
            if (q[i] <= 0.0) top = std::max(top, u[i]);
        std::vector<std::size_t> tied;
        for (std::size_t i = 0; i < n; ++i)
            if (q[i] <= 0.0 && u[i] == top) tied.push_back(i);
        if (tied.size() > 1)
            profile.warnings.push_back("emergent mass split equally among " + std::to_string(tied.size()) +
                                       " zero-prior states tied at the top utility");
        for (std::size_t i : tied) profile.beliefs[i] = residual / static_cast<double>(tied.size());
        profile.residual_mass = residual;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (q[i] > 0.0 && profile.beliefs[i] == 0.0) profile.censored.push_back(i);
        if (q[i] <= 0.0 && profile.beliefs[i] > 0.0) profile.emergent.push_back(i);
        if (profile.weights[i] && *profile.weights[i] > 1.0 + kOverprecisionSlack) profile.overprecise.push_back(i);
    }
    if (profile.emergent.empty()) profile.residual_mass = 0.0;
    return profile;
}

/// p*(i) / p*(j): +inf over a censored denominator, empty when both are zero.
inline std::optional<double> likelihood_ratio(const BeliefProfile& profile, std::size_t i, std::size_t j) {
    const std::size_t n = profile.beliefs.size();
    if (i >= n || j >= n) throw std::out_of_range("likelihood_ratio: state index out of range");
    const double num = profile.beliefs[i];
    const double den = profile.beliefs[j];
    if (den == 0.0) {
        if (num == 0.0) return std::nullopt;
        return kInf;
    }
    return num / den;
}

struct CensorshipClass {
    bool possible = false;
    std::string reason;
};

/// Necessary conditions for censorship: phi and phi' both bounded at 0+.
inline CensorshipClass classify_censorship(const DivergenceSpec& spec) {
    const bool phi_finite = std::isfinite(spec.limit_phi_at_zero);
    const bool slope_finite = std::isfinite(spec.limit_phi_prime_at_zero);
    CensorshipClass out;
    out.possible = phi_finite && slope_finite;
    if (out.possible) {
        out.reason = "limit_phi_at_zero and limit_phi_prime_at_zero are both finite";
    } else if (!phi_finite && !slope_finite) {
        out.reason = "limit_phi_at_zero = +inf and limit_phi_prime_at_zero = -inf";
    } else if (!phi_finite) {
        out.reason = "limit_phi_at_zero = +inf";
    } else {
        out.reason = "limit_phi_prime_at_zero = -inf";
    }
    return out;
}

struct EmergenceClass {
    bool possible = false;
    double b = kInf;
};

inline EmergenceClass classify_emergence(const DivergenceSpec& spec) {
    return {std::isfinite(spec.slope_at_infinity), spec.slope_at_infinity};
}

/// Utility level at or below which supported states are censored, if any are.
inline std::optional<double> censorship_cutoff(const DivergenceSpec& spec, std::span<const double> u,
                                               std::span<const double> q, double delta, const DualSolution& dual) {
    detail::check_dual_inputs(u, q, delta);
    if (!std::isfinite(spec.censor_threshold)) return std::nullopt;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (q[i] > 0.0 && detail::is_censored(spec, u[i], dual.lambda_star, delta))
            return dual.lambda_star + delta * spec.censor_threshold;
    return std::nullopt;
}

} // namespace wishful
