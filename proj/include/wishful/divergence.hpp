#pragma once

#include "wishful/errors.hpp"
#include "wishful/probability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wishful {

using ScalarFn = std::function<double(double)>;

/**
 * A phi-divergence generator together with its convex conjugate.
 *
 * Extended reals are IEEE doubles: +inf marks "outside the domain" for phi and
 * conj, and the limit constants may be +/-inf. All four callables must be pure;
 * a spec is immutable once built and may be shared across threads.
 *
 * User-supplied specs should be checked with validate() before use.
 */
struct DivergenceSpec {
    std::string name;

    ScalarFn phi;        ///< phi(t); +inf for t < 0, closure value at t = 0.
    ScalarFn phi_prime;  ///< phi'(t) on (0, inf); the limit at 0 for t <= 0.
    ScalarFn conj;       ///< phi*(s); +inf outside dom phi*.
    ScalarFn conj_prime; ///< phi*'(s); nondecreasing, >= 0, +inf past the domain.

    double conj_domain_upper = kInf;        ///< sup dom phi*.
    double limit_phi_at_zero = 1.0;         ///< lim_{t->0+} phi(t).
    double limit_phi_prime_at_zero = -kInf; ///< lim_{t->0+} phi'(t).
    double slope_at_infinity = kInf;        ///< b = lim_{t->inf} phi(t)/t.

    /// Largest s with phi*'(s) = 0, or -inf when phi*' is positive everywhere.
    /// States whose scaled utility gap falls at or below it are censored.
    double censor_threshold = -kInf;
};

enum class DivergenceKind { kl, hellinger, mod_chi2, burg };

inline constexpr std::array<DivergenceKind, 4> kAllDivergences = {
    DivergenceKind::kl, DivergenceKind::hellinger, DivergenceKind::mod_chi2, DivergenceKind::burg};

inline std::string_view to_string(DivergenceKind kind) {
    switch (kind) {
    case DivergenceKind::kl: return "kl";
    case DivergenceKind::hellinger: return "hellinger";
    case DivergenceKind::mod_chi2: return "mod_chi2";
    case DivergenceKind::burg: return "burg";
    }
    return "?";
}

inline DivergenceKind parse_divergence_kind(std::string_view name) {
    for (auto kind : kAllDivergences)
        if (to_string(kind) == name) return kind;
    throw input_error("unknown divergence '" + std::string(name) +
                      "' (expected kl, hellinger, mod_chi2 or burg)");
}

namespace detail {

// Wraps a formula valid on (0, inf) with the closure conventions at the boundary.
inline ScalarFn on_positive_axis(std::function<double(double)> f, double at_zero) {
    return [f = std::move(f), at_zero](double t) {
        if (t < 0.0) return kInf;
        if (t == 0.0) return at_zero;
        return f(t);
    };
}

inline ScalarFn derivative_on_positive_axis(std::function<double(double)> f, double at_zero) {
    return [f = std::move(f), at_zero](double t) { return t <= 0.0 ? at_zero : f(t); };
}

} // namespace detail

inline DivergenceSpec builtin_divergence(DivergenceKind kind) {
    DivergenceSpec spec;
    spec.name = std::string(to_string(kind));
    switch (kind) {
    case DivergenceKind::kl:
        spec.limit_phi_at_zero = 1.0;
        spec.limit_phi_prime_at_zero = -kInf;
        spec.slope_at_infinity = kInf;
        spec.conj_domain_upper = kInf;
        spec.phi = detail::on_positive_axis([](double t) { return t * std::log(t) - t + 1.0; }, 1.0);
        spec.phi_prime = detail::derivative_on_positive_axis([](double t) { return std::log(t); }, -kInf);
        spec.conj = [](double s) { return std::expm1(s); };
        spec.conj_prime = [](double s) { return std::exp(s); };
        break;
    case DivergenceKind::hellinger:
        spec.limit_phi_at_zero = 1.0;
        spec.limit_phi_prime_at_zero = -kInf;
        spec.slope_at_infinity = 1.0;
        spec.conj_domain_upper = 1.0;
        spec.phi = detail::on_positive_axis(
            [](double t) {
                double r = 1.0 - std::sqrt(t);
                return r * r;
            },
            1.0);
        spec.phi_prime =
            detail::derivative_on_positive_axis([](double t) { return 1.0 - 1.0 / std::sqrt(t); }, -kInf);
        spec.conj = [](double s) { return s < 1.0 ? s / (1.0 - s) : kInf; };
        spec.conj_prime = [](double s) {
            if (s >= 1.0) return kInf;
            double r = 1.0 - s;
            return 1.0 / (r * r);
        };
        break;
    case DivergenceKind::mod_chi2:
        spec.limit_phi_at_zero = 1.0;
        spec.limit_phi_prime_at_zero = -2.0;
        spec.slope_at_infinity = kInf;
        spec.conj_domain_upper = kInf;
        spec.censor_threshold = -2.0;
        spec.phi = detail::on_positive_axis(
            [](double t) {
                double r = t - 1.0;
                return r * r;
            },
            1.0);
        spec.phi_prime = detail::derivative_on_positive_axis([](double t) { return 2.0 * (t - 1.0); }, -2.0);
        spec.conj = [](double s) { return s < -2.0 ? -1.0 : s + s * s / 4.0; };
        // Left limit at the kink.
        spec.conj_prime = [](double s) { return s <= -2.0 ? 0.0 : 1.0 + s / 2.0; };
        break;
    case DivergenceKind::burg:
        spec.limit_phi_at_zero = kInf;
        spec.limit_phi_prime_at_zero = -kInf;
        spec.slope_at_infinity = 1.0;
        spec.conj_domain_upper = 1.0;
        spec.phi = detail::on_positive_axis([](double t) { return -std::log(t) + t - 1.0; }, kInf);
        spec.phi_prime = detail::derivative_on_positive_axis([](double t) { return 1.0 - 1.0 / t; }, -kInf);
        spec.conj = [](double s) { return s < 1.0 ? -std::log1p(-s) : kInf; };
        spec.conj_prime = [](double s) { return s < 1.0 ? 1.0 / (1.0 - s) : kInf; };
        break;
    }
    return spec;
}

inline DivergenceSpec builtin_divergence(std::string_view name) {
    return builtin_divergence(parse_divergence_kind(name));
}

/// One state's contribution q * phi(p / q) with the zero-probability conventions.
inline double cost_term(const DivergenceSpec& spec, double p, double q) {
    if (q > 0.0) {
        if (p == 0.0) return q * spec.limit_phi_at_zero;
        return q * spec.phi(p / q);
    }
    if (p == 0.0) return 0.0;
    return p * spec.slope_at_infinity;
}

/// C_phi(p || q). Returns +inf when p puts mass where the divergence forbids it.
inline double cost(const DivergenceSpec& spec, std::span<const double> p, std::span<const double> q) {
    check_same_size(p, q, "p", "q");
    check_probability_vector(p, "p");
    check_probability_vector(q, "q");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += cost_term(spec, p[i], q[i]);
    return total;
}

struct ValidationReport {
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/**
 * Checks a divergence spec against the properties the solver relies on:
 * phi(1) = 0 and phi >= 0, convexity of phi, the Fenchel inequality and
 * equality at t = phi*'(s), phi*(0) = 0, phi*'(0) = 1, phi*' nondecreasing and
 * nonnegative, phi*' matching a central difference of phi*, and agreement of
 * the declared limit constants with the callables. All checks run on fixed
 * sample grids, so a passing report is evidence rather than proof.
 */
inline ValidationReport validate(const DivergenceSpec& spec) {
    ValidationReport report;
    auto fail = [&](const std::string& what, double at) {
        std::ostringstream msg;
        msg.precision(12);
        msg << spec.name << ": " << what << " (at " << at << ")";
        report.failures.push_back(msg.str());
    };
    if (!spec.phi || !spec.phi_prime || !spec.conj || !spec.conj_prime) {
        report.failures.push_back(spec.name + ": missing callable");
        return report;
    }

    std::vector<double> ts;
    for (int k = -30; k <= 30; ++k) ts.push_back(std::pow(10.0, k / 10.0));

    const double s_hi = std::isfinite(spec.conj_domain_upper) ? std::min(6.0, spec.conj_domain_upper - 0.05) : 6.0;
    const double s_lo = -8.0;
    std::vector<double> ss;
    for (int k = 0; k <= 60; ++k) ss.push_back(s_lo + (s_hi - s_lo) * k / 60.0);
    ss.push_back(0.0);
    std::sort(ss.begin(), ss.end());

    if (std::abs(spec.phi(1.0)) > 1e-12) fail("phi(1) != 0", 1.0);
    for (double t : ts)
        if (!(spec.phi(t) >= -1e-12)) fail("phi negative", t);

    for (std::size_t i = 0; i < ts.size(); i += 3)
        for (std::size_t j = i + 3; j < ts.size(); j += 3)
            for (double a : {0.25, 0.5, 0.75}) {
                double lhs = spec.phi(a * ts[i] + (1 - a) * ts[j]);
                double rhs = a * spec.phi(ts[i]) + (1 - a) * spec.phi(ts[j]);
                if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) fail("phi not convex", ts[i]);
            }

    for (double s : ss) {
        const double cs = spec.conj(s);
        for (double t : ts) {
            double affine = s * t - spec.phi(t);
            if (cs < affine - 1e-9 * (1.0 + std::abs(affine))) {
                fail("Fenchel inequality violated", s);
                break;
            }
        }
        const double t_hat = spec.conj_prime(s);
        const double tangent = s * t_hat - spec.phi(t_hat);
        if (std::abs(cs - tangent) > 1e-9 * std::max(1.0, std::abs(cs))) fail("Fenchel equality violated", s);
    }

    if (std::abs(spec.conj(0.0)) > 1e-12) fail("phi*(0) != 0", 0.0);
    if (std::abs(spec.conj_prime(0.0) - 1.0) > 1e-12) fail("phi*'(0) != 1", 0.0);
    double prev = -kInf;
    for (double s : ss) {
        double d = spec.conj_prime(s);
        if (!(d >= 0.0)) fail("phi*' negative", s);
        if (d < prev) fail("phi*' decreasing", s);
        prev = d;
    }
    constexpr double h = 1e-5;
    for (double s : ss) {
        if (s + h >= spec.conj_domain_upper) continue;
        double fd = (spec.conj(s + h) - spec.conj(s - h)) / (2 * h);
        if (std::abs(spec.conj_prime(s) - fd) > 1e-6 * std::max(1.0, std::abs(fd)))
            fail("phi*' disagrees with finite difference of phi*", s);
    }

    if (std::isfinite(spec.censor_threshold)) {
        const double c = spec.censor_threshold;
        if (spec.conj_prime(c) != 0.0 || spec.conj_prime(c - 1.0) != 0.0) fail("phi*' not zero below censor_threshold", c);
        if (!(spec.conj_prime(c + 1e-6) > 0.0)) fail("phi*' zero above censor_threshold", c);
    } else {
        for (double s : ss)
            if (!(spec.conj_prime(s) > 0.0)) fail("phi*' vanishes but censor_threshold is -inf", s);
    }

    const double big = 1e8;
    const double slope = spec.phi(big) / big;
    if (std::isfinite(spec.slope_at_infinity)) {
        if (std::abs(slope - spec.slope_at_infinity) > 1e-3) fail("slope_at_infinity disagrees with phi(t)/t", big);
    } else if (slope < 10.0) {
        fail("slope_at_infinity is +inf but phi(t)/t stays small", big);
    }
    if (std::isfinite(spec.slope_at_infinity) && std::isfinite(spec.conj_domain_upper) &&
        std::abs(spec.slope_at_infinity - spec.conj_domain_upper) > 1e-12)
        fail("slope_at_infinity != sup dom phi*", spec.conj_domain_upper);
    if (std::isfinite(spec.slope_at_infinity) != std::isfinite(spec.conj_domain_upper))
        fail("slope_at_infinity and sup dom phi* disagree on finiteness", spec.conj_domain_upper);

    const double tiny = 1e-12;
    if (std::isfinite(spec.limit_phi_at_zero)) {
        if (std::abs(spec.phi(tiny) - spec.limit_phi_at_zero) > 1e-5) fail("limit_phi_at_zero mismatch", tiny);
    } else if (spec.phi(tiny) < 20.0) {
        fail("limit_phi_at_zero is +inf but phi stays bounded near 0", tiny);
    }
    if (std::isfinite(spec.limit_phi_prime_at_zero)) {
        if (std::abs(spec.phi_prime(tiny) - spec.limit_phi_prime_at_zero) > 1e-4)
            fail("limit_phi_prime_at_zero mismatch", tiny);
    } else if (spec.phi_prime(tiny) > -20.0) {
        fail("limit_phi_prime_at_zero is -inf but phi' stays bounded near 0", tiny);
    }
    return report;
}

} // namespace wishful
