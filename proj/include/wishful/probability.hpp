#pragma once

#include "wishful/errors.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>

namespace wishful {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tolerance on the total mass of a probability vector.
inline constexpr double kMassTolerance = 1e-9;

inline void check_same_size(std::span<const double> a, std::span<const double> b,
                            std::string_view a_name, std::string_view b_name) {
    if (a.size() != b.size()) {
        std::ostringstream msg;
        msg << "dimension mismatch: " << a_name << " has " << a.size() << " entries, "
            << b_name << " has " << b.size();
        throw input_error(msg.str());
    }
}

/// Throws input_error naming `what` unless `p` is a finite, nonnegative vector
/// whose entries sum to 1 within `tol`.
inline void check_probability_vector(std::span<const double> p, std::string_view what,
                                     double tol = kMassTolerance) {
    if (p.empty()) throw input_error(std::string(what) + ": empty probability vector");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i]) || p[i] < 0.0) {
            std::ostringstream msg;
            msg << what << ": entry " << i << " = " << p[i] << " is not a nonnegative finite number";
            throw input_error(msg.str());
        }
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > tol) {
        std::ostringstream msg;
        msg.precision(12);
        msg << what << ": entries sum to " << sum << " (expected 1 within " << tol << ")";
        throw input_error(msg.str());
    }
}

inline double expectation(std::span<const double> u, std::span<const double> q) {
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (q[i] > 0.0) e += q[i] * u[i];
    return e;
}

} // namespace wishful
