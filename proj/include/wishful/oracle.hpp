#pragma once

// Brute-force primal maximizer used to cross-check the dual solver. Depends on
// the divergence callables only; nothing here calls into the dual machinery.

#include "wishful/divergence.hpp"
#include "wishful/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

namespace wishful::oracle {

inline constexpr std::size_t kMaxStates = 5;

struct GridSpec {
    int resolution = 60;          ///< Subdivisions per simplex edge (N).
    bool include_boundary = true; ///< Whether lattice points with a zero coordinate are visited.
};

/// Largest lattice resolution allowed for `states` states.
inline int max_resolution(std::size_t states) {
    if (states <= 2) return 2000;
    if (states == 3) return 200;
    return 60;
}

struct GridResult {
    double value = -kInf;
    std::vector<double> argmax_p;
    double grid_error_bound = kInf; ///< Lipschitz bound on max - lattice max.
    std::size_t points_visited = 0;
};

struct RefineResult {
    double value = -kInf;
    std::vector<double> p;
    double certified_gap = kInf; ///< Frank-Wolfe gap: max - value <= gap by concavity.
};

/// Sum of q * phi(p/q). Zero-mass states are evaluated through phi's closure
/// at 0 and unsupported mass through the slope at infinity.
inline double reference_cost(const DivergenceSpec& spec, std::span<const double> p, std::span<const double> q) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] == 0.0) {
            if (p[i] > 0.0) total += p[i] * spec.slope_at_infinity;
            continue;
        }
        double v = spec.phi(p[i] / q[i]);
        total += q[i] * v;
    }
    return total;
}

/// E_p u - delta * C(p || q); -inf where the cost is infinite.
inline double primal_objective(const DivergenceSpec& spec, std::span<const double> u, std::span<const double> q,
                               double delta, std::span<const double> p) {
    double c = reference_cost(spec, p, q);
    if (c == kInf) return -kInf;
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) e += p[i] * u[i];
    return e - delta * c;
}

namespace detail {

inline void check_inputs(std::span<const double> u, std::span<const double> q, double delta) {
    if (u.size() != q.size()) throw input_error("oracle: utilities and prior differ in length");
    if (u.empty()) throw input_error("oracle: no states");
    if (!(delta > 0.0)) throw input_error("oracle: delta must be positive");
}

// States that cannot carry mass: zero prior and an infinite slope at infinity.
inline bool pinned_to_zero(const DivergenceSpec& spec, double q) {
    return q == 0.0 && !std::isfinite(spec.slope_at_infinity);
}

// Partial derivative of the primal objective in p_i (one-sided at p_i = 0).
inline double objective_slope(const DivergenceSpec& spec, double u, double q, double delta, double p) {
    if (q == 0.0) return u - delta * spec.slope_at_infinity;
    return u - delta * spec.phi_prime(p / q);
}

inline void enumerate(std::size_t n, int total, bool boundary, std::vector<int>& k, std::size_t pos,
                      const std::function<void(const std::vector<int>&)>& visit) {
    const int used = [&] {
        int s = 0;
        for (std::size_t i = 0; i < pos; ++i) s += k[i];
        return s;
    }();
    const int left = total - used;
    if (pos + 1 == n) {
        if (!boundary && left == 0) return;
        k[pos] = left;
        visit(k);
        return;
    }
    const int first = boundary ? 0 : 1;
    const int reserve = boundary ? 0 : static_cast<int>(n - pos - 1);
    for (int v = first; v <= left - reserve; ++v) {
        k[pos] = v;
        enumerate(n, total, boundary, k, pos + 1, visit);
    }
}

} // namespace detail

/**
 * Exhaustive search over the lattice {k/N} of the simplex. Ties keep the
 * lexicographically first point. The error bound is L * n / N with L the
 * largest |u| plus delta times the largest |phi'| over ratios within n/N of
 * the lattice argmax; it is +inf when that neighborhood reaches a boundary
 * where phi' is unbounded.
 */
inline GridResult primal_grid_max(const DivergenceSpec& spec, std::span<const double> u, std::span<const double> q,
                                  double delta, const GridSpec& grid) {
    detail::check_inputs(u, q, delta);
    const std::size_t n = u.size();
    if (n > kMaxStates) {
        std::ostringstream msg;
        msg << "oracle: " << n << " states exceeds the enumeration bound of " << kMaxStates;
        throw input_error(msg.str());
    }
    if (grid.resolution < 2 || grid.resolution > max_resolution(n)) {
        std::ostringstream msg;
        msg << "oracle: resolution " << grid.resolution << " outside [2, " << max_resolution(n) << "] for " << n
            << " states";
        throw input_error(msg.str());
    }

    const int N = grid.resolution;
    GridResult best;
    std::vector<int> k(n, 0);
    std::vector<double> p(n, 0.0);
    detail::enumerate(n, N, grid.include_boundary, k, 0, [&](const std::vector<int>& ks) {
        ++best.points_visited;
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(ks[i]) / N;
        double f = primal_objective(spec, u, q, delta, p);
        if (f > best.value) {
            best.value = f;
            best.argmax_p = p;
        }
    });
    if (best.argmax_p.empty()) throw solver_error("oracle: every lattice point has infinite cost");

    const double h = static_cast<double>(n) / N;
    double u_abs = 0.0;
    for (double x : u) u_abs = std::max(u_abs, std::abs(x));
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (detail::pinned_to_zero(spec, q[i])) continue;
        if (q[i] == 0.0) {
            slope = std::max(slope, std::abs(spec.slope_at_infinity));
            continue;
        }
        const double pi = best.argmax_p[i];
        const double lo = std::max(pi - h, 0.0) / q[i];
        const double hi = std::min(pi + h, 1.0) / q[i];
        slope = std::max({slope, std::abs(spec.phi_prime(lo)), std::abs(spec.phi_prime(hi))});
    }
    best.grid_error_bound = (u_abs + delta * slope) * h;
    return best;
}

/// Frank-Wolfe gap of the concave primal objective at p; an upper bound on
/// (true maximum) - objective(p).
inline double certified_gap(const DivergenceSpec& spec, std::span<const double> u, std::span<const double> q,
                            double delta, std::span<const double> p) {
    double top = -kInf;
    double inner = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (detail::pinned_to_zero(spec, q[i])) {
            if (p[i] > 0.0) return kInf;
            continue;
        }
        double g = detail::objective_slope(spec, u[i], q[i], delta, p[i]);
        if (std::isnan(g)) return kInf;
        top = std::max(top, g);
        if (p[i] > 0.0) inner += p[i] * g;
    }
    if (!std::isfinite(top) || !std::isfinite(inner)) return kInf;
    return std::max(0.0, top - inner);
}

/**
 * Polishes a simplex point by golden-section line searches that move mass
 * between pairs of states. Each accepted move strictly improves the
 * objective, so the value never decreases. `iterations` caps the number of
 * sweeps over all pairs.
 */
inline RefineResult refine_local(const DivergenceSpec& spec, std::span<const double> u, std::span<const double> q,
                                 double delta, std::span<const double> p0, int iterations) {
    detail::check_inputs(u, q, delta);
    if (p0.size() != u.size()) throw input_error("oracle: start point has the wrong length");
    const std::size_t n = u.size();

    RefineResult out;
    out.p.assign(p0.begin(), p0.end());
    out.value = primal_objective(spec, u, q, delta, out.p);

    std::vector<double> trial(n);
    auto along = [&](std::size_t i, std::size_t j, double t) {
        trial = out.p;
        const double pair = out.p[i] + out.p[j];
        trial[i] = std::clamp(out.p[i] + t, 0.0, pair);
        trial[j] = pair - trial[i];
        return primal_objective(spec, u, q, delta, trial);
    };

    constexpr double ratio = 0.6180339887498949;
    for (int sweep = 0; sweep < iterations; ++sweep) {
        const double before = out.value;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double a = -out.p[i];
                double b = out.p[j];
                if (b - a <= 0.0) continue;
                double c = b - ratio * (b - a);
                double d = a + ratio * (b - a);
                double fc = along(i, j, c);
                double fd = along(i, j, d);
                for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
                    if (fc >= fd) {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - ratio * (b - a);
                        fc = along(i, j, c);
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + ratio * (b - a);
                        fd = along(i, j, d);
                    }
                }
                double best_t = 0.0;
                double best_f = out.value;
                for (double t : {0.5 * (a + b), -out.p[i], out.p[j]}) {
                    double f = along(i, j, t);
                    if (f > best_f) {
                        best_f = f;
                        best_t = t;
                    }
                }
                if (best_f > out.value) {
                    along(i, j, best_t);
                    out.p = trial;
                    out.value = best_f;
                }
            }
        if (!(out.value - before > 1e-15 * std::max(1.0, std::abs(out.value)))) break;
    }
    out.certified_gap = certified_gap(spec, u, q, delta, out.p);
    return out;
}

} // namespace wishful::oracle
