#pragma once

#include "wishful/divergence.hpp"
#include "wishful/dual_solver.hpp"
#include "wishful/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace wishful {

/// Dual value against the brute-force primal for one action.
struct VerifyRow {
    double dual_value = 0.0;
    double oracle_value = 0.0;   ///< Lattice max after local refinement.
    double lattice_value = 0.0;  ///< Lattice max before refinement.
    double gap = 0.0;            ///< |dual - oracle|
    double grid_bound = 0.0;     ///< L * n / N from the lattice search.
    double certified_gap = 0.0;  ///< Frank-Wolfe gap at the refined point.
    double bound = 0.0;          ///< Tolerance the gap is checked against.
    bool pass = false;
};

/**
 * Weak duality puts the oracle at or below the dual value; strong duality puts
 * it within the error bound below. The bound is the smaller of the lattice
 * Lipschitz bound and the refined point's Frank-Wolfe gap, plus 1e-9 relative
 * slack for rounding.
 */
inline VerifyRow verify_action(const DivergenceSpec& spec, std::span<const double> u, std::span<const double> q,
                               double delta, const oracle::GridSpec& grid, int refine_iterations,
                               double tol = kDefaultTolerance) {
    VerifyRow row;
    row.dual_value = solve_dual(spec, u, q, delta, tol).value;
    const auto lattice = oracle::primal_grid_max(spec, u, q, delta, grid);
    const auto refined = oracle::refine_local(spec, u, q, delta, lattice.argmax_p, refine_iterations);
    row.lattice_value = lattice.value;
    row.oracle_value = refined.value;
    row.grid_bound = lattice.grid_error_bound;
    row.certified_gap = refined.certified_gap;

    const double slack = 1e-9 * std::max(1.0, std::abs(row.dual_value));
    row.bound = std::min(row.grid_bound, row.certified_gap) + slack;
    row.gap = std::abs(row.dual_value - row.oracle_value);
    const bool weak = row.oracle_value <= row.dual_value + slack;
    const bool strong = row.dual_value - row.oracle_value <= row.bound;
    row.pass = weak && strong;
    return row;
}

} // namespace wishful
