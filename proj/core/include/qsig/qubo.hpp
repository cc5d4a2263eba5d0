#pragma once

// QUBO and Ising problem types, energy evaluation, conversion between the two
// formalisms, and two solvers: exhaustive enumeration (small n, exact) and
// single-flip simulated annealing.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qsig {

/// Binary assignment x (0/1 per variable). The spin view maps 0 -> -1, 1 -> +1.
using Assignment = std::vector<std::uint8_t>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using IndexPair = std::pair<std::size_t, std::size_t>;

/// Minimise offset + sum_{i<=j} Q_ij x_i x_j. Diagonal entries are the linear
/// terms (x^2 = x). Keys are kept normalised to i <= j.
class QuboProblem {
public:
    explicit QuboProblem(std::size_t n, double offset = 0.0);

    std::size_t size() const noexcept { return n_; }
    double offset() const noexcept { return offset_; }
    void set_offset(double offset) noexcept { offset_ = offset; }
    void add_offset(double delta) noexcept { offset_ += delta; }

    /// Accumulates onto the (min(i,j), max(i,j)) entry.
    void add(std::size_t i, std::size_t j, double value);
    void add_linear(std::size_t i, double value) { add(i, i, value); }

    double coefficient(std::size_t i, std::size_t j) const;
    const std::map<IndexPair, double>& coefficients() const noexcept { return coeffs_; }

    /// Throws std::invalid_argument on a non-finite coefficient or offset.
    void validate() const;

private:
    std::size_t n_;
    std::map<IndexPair, double> coeffs_;
    double offset_;
};

/// H(s) = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i + offset, s_i in {-1, +1}.
struct IsingProblem {
    std::vector<double> h;
    std::map<IndexPair, double> j;
    double offset = 0.0;

    std::size_t size() const noexcept { return h.size(); }
};

struct AnnealConfig {
    std::uint32_t num_reads = 20;
    std::uint32_t sweeps = 500;
    double beta_start = 0.1;
    double beta_end = 10.0;
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr std::size_t kExactSolverMaxVariables = 24;

double evaluate_qubo(const QuboProblem& problem, std::span<const std::uint8_t> x);

/// Energy of a spin configuration with entries -1/+1.
double evaluate_ising(const IsingProblem& problem, std::span<const int> spins);

/// Spin vector for a binary assignment (x = (1 + s) / 2).
std::vector<int> to_spins(std::span<const std::uint8_t> x);

IsingProblem qubo_to_ising(const QuboProblem& problem);

/// True when `a` precedes `b` in the tie-break order: compare as unsigned
/// integers with variable 0 as the least significant bit.
bool tie_break_less(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Exhaustive minimiser. Ties resolve to the first assignment in tie-break
/// order. Refuses problems above kExactSolverMaxVariables.
Assignment solve_exact(const QuboProblem& problem);

/// Best of `num_reads` independent Metropolis anneals over a geometric beta
/// schedule. Each read seeds its own engine from (seed, read index), so the
/// result does not depend on the order reads are run in.
Assignment solve_anneal(const QuboProblem& problem, const AnnealConfig& config);

}  // namespace qsig
