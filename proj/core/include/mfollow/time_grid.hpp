#pragma once

#include <cstddef>
#include <vector>

namespace mfollow {

/// Strictly increasing time points t_0 = 0 < t_1 < ... < t_M = horizon.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> times);

    static TimeGrid uniform(std::size_t steps, double horizon);

    double horizon() const { return times_.back(); }
    /// Number of steps M (grid has M+1 points).
    std::size_t num_steps() const { return times_.size() - 1; }
    std::size_t num_times() const { return times_.size(); }
    double time(std::size_t i) const { return times_[i]; }
    /// Step size t_i - t_{i-1}; valid for i in [1, M].
    double dt(std::size_t i) const { return times_[i] - times_[i - 1]; }
    const std::vector<double>& times() const { return times_; }

    bool operator==(const TimeGrid& other) const { return times_ == other.times_; }

private:
    std::vector<double> times_;
};

} // namespace mfollow
