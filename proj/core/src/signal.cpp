#include "qsig/signal.hpp"

#include <algorithm>
#include <cmath>

namespace qsig {

double SignalPlan::cycle_length() const {
    double total = 0.0;
    for (const auto& m : modes) total += m.fixed_green + yellow;
    return total;
}

void SignalPlan::validate() const {
    if (modes.size() < 2) {
        throw std::invalid_argument("signal plan for junction '" + junction_id +
                                    "' needs at least two green modes");
    }
    if (!(yellow > 0.0)) throw std::invalid_argument("yellow duration must be positive");
    for (const auto& m : modes) {
        if (!(m.fixed_green > 0.0)) {
            throw std::invalid_argument("green duration of mode '" + m.name + "' must be positive");
        }
    }
}

HaltCountMatrix::HaltCountMatrix(std::vector<std::vector<int>> counts) : counts_(std::move(counts)) {
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i].empty()) {
            throw std::invalid_argument("junction " + std::to_string(i) + " has no green modes");
        }
        for (int c : counts_[i]) {
            if (c < 0) throw std::invalid_argument("halt counts must be non-negative");
        }
    }
}

int HaltCountMatrix::max_count() const noexcept {
    int best = 0;
    for (const auto& row : counts_) {
        for (int c : row) best = std::max(best, c);
    }
    return best;
}

VariableLayout::VariableLayout(const HaltCountMatrix& halts) {
    for (std::size_t i = 0; i < halts.junction_count(); ++i) {
        first_.push_back(slots_.size());
        counts_.push_back(halts.mode_count(i));
        for (std::size_t j = 0; j < halts.mode_count(i); ++j) slots_.push_back({i, j});
    }
}

std::size_t VariableLayout::index_of(std::size_t junction, std::size_t mode) const {
    if (junction >= first_.size() || mode >= counts_[junction]) {
        throw std::out_of_range("no variable for junction " + std::to_string(junction) + " mode " +
                                std::to_string(mode));
    }
    return first_[junction] + mode;
}

ConstraintViolation::ConstraintViolation(std::size_t junction, std::size_t active_bits)
    : std::runtime_error("junction " + std::to_string(junction) + " has " +
                         std::to_string(active_bits) + " active modes, expected exactly one"),
      junction_(junction) {}

std::pair<QuboProblem, VariableLayout> build_traffic_qubo(const HaltCountMatrix& halts, double phi) {
    if (!(phi > 0.0) || !std::isfinite(phi)) throw std::invalid_argument("penalty phi must be positive");
    if (halts.junction_count() == 0) throw std::invalid_argument("halt matrix has no junctions");

    VariableLayout layout(halts);
    QuboProblem qubo(layout.size());
    for (std::size_t i = 0; i < halts.junction_count(); ++i) {
        const std::size_t modes = halts.mode_count(i);
        for (std::size_t j = 0; j < modes; ++j) {
            const std::size_t a = layout.index_of(i, j);
            qubo.add_linear(a, -static_cast<double>(halts.at(i, j)) - phi);
            for (std::size_t k = j + 1; k < modes; ++k) qubo.add(a, layout.index_of(i, k), 2.0 * phi);
        }
        qubo.add_offset(phi);
    }
    return {std::move(qubo), std::move(layout)};
}

double penalty_floor(const HaltCountMatrix& halts) {
    return std::max(1.0, 1.0 + static_cast<double>(halts.max_count()));
}

std::vector<std::size_t> decode_selection(std::span<const std::uint8_t> x, const VariableLayout& layout) {
    if (x.size() != layout.size()) {
        throw DimensionError("assignment has " + std::to_string(x.size()) + " bits, layout has " +
                             std::to_string(layout.size()));
    }
    std::vector<std::size_t> selected(layout.junction_count());
    for (std::size_t i = 0; i < layout.junction_count(); ++i) {
        std::size_t on = 0;
        for (std::size_t j = 0; j < layout.mode_count(i); ++j) {
            if (x[layout.index_of(i, j)]) {
                ++on;
                selected[i] = j;
            }
        }
        if (on != 1) throw ConstraintViolation(i, on);
    }
    return selected;
}

double dynamic_green_duration(int halt_count, double t_d, double cap) {
    if (!(t_d > 0.0) || t_d > 2.0) {
        throw std::invalid_argument("t_d must lie in (0, 2], got " + std::to_string(t_d));
    }
    if (halt_count < 0) throw std::invalid_argument("halt count must be non-negative");
    if (!(cap >= kMinDynamicGreen)) throw std::invalid_argument("dynamic green cap must be >= 10 s");
    return std::clamp(static_cast<double>(halt_count) * t_d, kMinDynamicGreen, cap);
}

}  // namespace qsig
