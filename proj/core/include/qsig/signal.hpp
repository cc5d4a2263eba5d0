#pragma once

// Traffic objective as a QUBO: one binary variable per (junction, green mode),
// rewarded by the number of halting vehicles that mode would release and held
// to one mode per junction by a quadratic penalty.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsig/qubo.hpp"

namespace qsig {

struct MovementRef {
    std::string from;  // inbound lane or waiting box
    std::string to;    // target lane or waiting box

    friend bool operator==(const MovementRef&, const MovementRef&) = default;
};

struct GreenMode {
    std::string name;  // "G1", "G2", ...
    std::vector<MovementRef> movements;
    double fixed_green = 30.0;  // seconds, used by the fixed-cycle controller
};

struct SignalPlan {
    std::string junction_id;
    std::vector<GreenMode> modes;
    double yellow = 5.0;

    std::size_t mode_count() const noexcept { return modes.size(); }
    double cycle_length() const;
    /// N >= 2, yellow > 0 and positive green durations.
    void validate() const;
};

/// C_ij: halting vehicles on inbound lanes served by mode j of junction i.
class HaltCountMatrix {
public:
    HaltCountMatrix() = default;
    explicit HaltCountMatrix(std::vector<std::vector<int>> counts);

    std::size_t junction_count() const noexcept { return counts_.size(); }
    std::size_t mode_count(std::size_t junction) const { return counts_.at(junction).size(); }
    int at(std::size_t junction, std::size_t mode) const { return counts_.at(junction).at(mode); }
    std::span<const int> row(std::size_t junction) const { return counts_.at(junction); }
    const std::vector<std::vector<int>>& rows() const noexcept { return counts_; }
    int max_count() const noexcept;

private:
    std::vector<std::vector<int>> counts_;
};

struct VariableSlot {
    std::size_t junction;
    std::size_t mode;

    friend bool operator==(const VariableSlot&, const VariableSlot&) = default;
};

/// Bijection between QUBO variable indices and (junction, mode) slots.
/// Variables of one junction are contiguous, in mode order.
class VariableLayout {
public:
    explicit VariableLayout(const HaltCountMatrix& halts);

    std::size_t size() const noexcept { return slots_.size(); }
    std::size_t junction_count() const noexcept { return first_.size(); }
    std::size_t mode_count(std::size_t junction) const { return counts_.at(junction); }
    std::size_t index_of(std::size_t junction, std::size_t mode) const;
    const VariableSlot& slot(std::size_t index) const { return slots_.at(index); }

private:
    std::vector<VariableSlot> slots_;
    std::vector<std::size_t> first_;
    std::vector<std::size_t> counts_;
};

class ConstraintViolation : public std::runtime_error {
public:
    ConstraintViolation(std::size_t junction, std::size_t active_bits);
    std::size_t junction() const noexcept { return junction_; }

private:
    std::size_t junction_;
};

/// Per junction: linear -(C_ij + phi), pairwise 2 phi between that junction's
/// modes, offset +phi. Over one-hot assignments the energy is -sum of the
/// selected C_ij, so minimisation picks the mode with the most halting vehicles.
std::pair<QuboProblem, VariableLayout> build_traffic_qubo(const HaltCountMatrix& halts, double phi);

/// 1 + max C_ij (at least 1): the smallest integer penalty for which every
/// optimum of build_traffic_qubo is one-hot at each junction.
double penalty_floor(const HaltCountMatrix& halts);

/// Selected mode per junction. Throws ConstraintViolation unless exactly one
/// bit is set per junction.
std::vector<std::size_t> decode_selection(std::span<const std::uint8_t> x, const VariableLayout& layout);

inline constexpr double kMinDynamicGreen = 10.0;
inline constexpr double kDefaultDynamicGreenCap = 120.0;

/// Green time proportional to the queue it serves: halt_count * t_d seconds,
/// clamped to [10 s, cap]. t_d must lie in (0, 2].
double dynamic_green_duration(int halt_count, double t_d, double cap = kDefaultDynamicGreenCap);

}  // namespace qsig
