#include "qsig/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qsig/random.hpp"

namespace qsig {

QuboProblem::QuboProblem(std::size_t n, double offset) : n_(n), offset_(offset) {
    if (n == 0) throw std::invalid_argument("QUBO must have at least one variable");
}

void QuboProblem::add(std::size_t i, std::size_t j, double value) {
    if (i > j) std::swap(i, j);
    if (j >= n_) {
        throw DimensionError("QUBO index (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") out of range for n = " + std::to_string(n_));
    }
    coeffs_[{i, j}] += value;
}

double QuboProblem::coefficient(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    auto it = coeffs_.find({i, j});
    return it == coeffs_.end() ? 0.0 : it->second;
}

void QuboProblem::validate() const {
    if (!std::isfinite(offset_)) throw std::invalid_argument("QUBO offset is not finite");
    for (const auto& [key, value] : coeffs_) {
        if (!std::isfinite(value)) {
            throw std::invalid_argument("QUBO coefficient (" + std::to_string(key.first) + ", " +
                                        std::to_string(key.second) + ") is not finite");
        }
    }
}

void AnnealConfig::validate() const {
    if (num_reads < 1) throw std::invalid_argument("num_reads must be >= 1");
    if (sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
    if (!(beta_start > 0.0) || !(beta_end > 0.0))
        throw std::invalid_argument("beta endpoints must be positive");
    if (!(beta_start < beta_end)) throw std::invalid_argument("beta_start must be < beta_end");
}

double evaluate_qubo(const QuboProblem& problem, std::span<const std::uint8_t> x) {
    if (x.size() != problem.size()) {
        throw DimensionError("assignment has " + std::to_string(x.size()) +
                             " bits, problem has " + std::to_string(problem.size()));
    }
    double energy = problem.offset();
    for (const auto& [key, value] : problem.coefficients()) {
        if (x[key.first] && x[key.second]) energy += value;
    }
    return energy;
}

double evaluate_ising(const IsingProblem& problem, std::span<const int> spins) {
    if (spins.size() != problem.size()) {
        throw DimensionError("spin vector has " + std::to_string(spins.size()) +
                             " entries, problem has " + std::to_string(problem.size()));
    }
    double energy = problem.offset;
    for (std::size_t i = 0; i < problem.h.size(); ++i) energy -= problem.h[i] * spins[i];
    for (const auto& [key, value] : problem.j) energy -= value * spins[key.first] * spins[key.second];
    return energy;
}

std::vector<int> to_spins(std::span<const std::uint8_t> x) {
    std::vector<int> s(x.size());
    std::transform(x.begin(), x.end(), s.begin(), [](std::uint8_t b) { return b ? 1 : -1; });
    return s;
}

IsingProblem qubo_to_ising(const QuboProblem& problem) {
    problem.validate();
    IsingProblem out;
    out.h.assign(problem.size(), 0.0);
    out.offset = problem.offset();
    // x_i = (1 + s_i) / 2; the Hamiltonian carries a leading minus on h and J.
    for (const auto& [key, q] : problem.coefficients()) {
        const auto [i, j] = key;
        if (i == j) {
            out.h[i] -= q / 2.0;
            out.offset += q / 2.0;
        } else {
            out.j[{i, j}] -= q / 4.0;
            out.h[i] -= q / 4.0;
            out.h[j] -= q / 4.0;
            out.offset += q / 4.0;
        }
    }
    return out;
}

bool tie_break_less(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    for (std::size_t k = a.size(); k-- > 0;) {
        if (a[k] != b[k]) return a[k] < b[k];
    }
    return false;
}

Assignment solve_exact(const QuboProblem& problem) {
    const std::size_t n = problem.size();
    if (n > kExactSolverMaxVariables) {
        throw std::invalid_argument("solve_exact supports at most " +
                                    std::to_string(kExactSolverMaxVariables) +
                                    " variables, got " + std::to_string(n));
    }
    problem.validate();

    // Counting upward with bit i as variable i visits assignments in
    // tie-break order, so keeping the first strict minimum resolves ties.
    Assignment x(n, 0), best(n, 0);
    double best_energy = std::numeric_limits<double>::infinity();
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t k = 0; k < total; ++k) {
        for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>((k >> i) & 1U);
        const double e = evaluate_qubo(problem, x);
        if (e < best_energy) {
            best_energy = e;
            best = x;
        }
    }
    return best;
}

namespace {

struct Neighbour {
    std::size_t index;
    double weight;
};

// Sparse adjacency for O(degree) flip deltas.
struct FlipModel {
    std::vector<double> linear;
    std::vector<std::vector<Neighbour>> adjacency;

    explicit FlipModel(const QuboProblem& p) : linear(p.size(), 0.0), adjacency(p.size()) {
        for (const auto& [key, q] : p.coefficients()) {
            const auto [i, j] = key;
            if (i == j) {
                linear[i] += q;
            } else {
                adjacency[i].push_back({j, q});
                adjacency[j].push_back({i, q});
            }
        }
    }

    double flip_delta(const Assignment& x, std::size_t i) const {
        double field = linear[i];
        for (const auto& nb : adjacency[i]) {
            if (x[nb.index]) field += nb.weight;
        }
        return x[i] ? -field : field;
    }
};

Assignment anneal_once(const FlipModel& model, const AnnealConfig& cfg, std::uint64_t read) {
    const std::size_t n = model.linear.size();
    Engine rng(derive_seed(cfg.seed, {read}));

    Assignment x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);

    double energy = 0.0;  // relative to the initial state
    double best_energy = 0.0;
    Assignment best = x;

    const double ratio = cfg.beta_end / cfg.beta_start;
    for (std::uint32_t s = 0; s < cfg.sweeps; ++s) {
        const double frac = cfg.sweeps == 1 ? 1.0 : static_cast<double>(s) / (cfg.sweeps - 1);
        const double beta = cfg.beta_start * std::pow(ratio, frac);
        for (std::size_t i = 0; i < n; ++i) {
            const double delta = model.flip_delta(x, i);
            if (delta <= 0.0 || uniform01(rng) < std::exp(-beta * delta)) {
                x[i] ^= 1U;
                energy += delta;
                if (energy < best_energy) {
                    best_energy = energy;
                    best = x;
                }
            }
        }
    }
    return best;
}

}  // namespace

Assignment solve_anneal(const QuboProblem& problem, const AnnealConfig& config) {
    config.validate();
    problem.validate();
    const FlipModel model(problem);

    Assignment best;
    double best_energy = std::numeric_limits<double>::infinity();
    for (std::uint32_t r = 0; r < config.num_reads; ++r) {
        Assignment candidate = anneal_once(model, config, r);
        const double e = evaluate_qubo(problem, candidate);
        if (e < best_energy || (e == best_energy && tie_break_less(candidate, best))) {
            best_energy = e;
            best = std::move(candidate);
        }
    }
    return best;
}

}  // namespace qsig
