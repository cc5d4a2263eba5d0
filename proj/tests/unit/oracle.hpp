#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's solvers.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Direct evaluation of the mode-selection objective: for every junction,
// minus the halting count of each selected mode plus phi times the squared
// one-hot residual.
inline double selection_energy(const std::vector<std::vector<int>>& c, const std::vector<std::uint8_t>& x,
                               double phi) {
    double e = 0.0;
    std::size_t k = 0;
    for (const auto& row : c) {
        int on = 0;
        for (int count : row) {
            if (x[k]) {
                e -= count;
                ++on;
            }
            ++k;
        }
        e += phi * (1 - on) * (1 - on);
    }
    return e;
}

// Dense upper-triangular QUBO.
struct Dense {
    std::size_t n = 0;
    std::vector<std::vector<double>> q;  // q[i][j], i <= j
    double offset = 0.0;

    double energy(const std::vector<std::uint8_t>& x) const {
        double e = offset;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) e += q[i][j] * x[i] * x[j];
        }
        return e;
    }
};

inline std::vector<std::uint8_t> bits(std::uint64_t k, std::size_t n) {
    std::vector<std::uint8_t> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (k >> i) & 1U;
    return x;
}

inline double min_energy(const Dense& d) {
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << d.n); ++k) best = std::min(best, d.energy(bits(k, d.n)));
    return best;
}

}  // namespace oracle
