#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace optlab {

// Dense parameter / gradient vector. Dimension is fixed for the lifetime
// of an optimization run; entries must stay finite.
using ParamVector = std::vector<double>;

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// Index of the first non-finite entry, or npos.
inline std::size_t first_non_finite(std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) return i;
    }
    return static_cast<std::size_t>(-1);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

inline void require_same_dim(std::span<const double> a, std::span<const double> b,
                             const char* what) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
}

}  // namespace optlab
