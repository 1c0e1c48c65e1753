#include "mfollow/time_grid.hpp"

#include "mfollow/errors.hpp"

namespace mfollow {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2)
        throw precondition_error("TimeGrid needs at least two points (M >= 1)");
    if (times_.front() != 0.0)
        throw precondition_error("TimeGrid must start at t = 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw precondition_error("TimeGrid times must be strictly increasing");
}

TimeGrid TimeGrid::uniform(std::size_t steps, double horizon) {
    if (steps == 0)
        throw precondition_error("TimeGrid::uniform needs steps >= 1");
    if (!(horizon > 0.0))
        throw precondition_error("TimeGrid::uniform needs a positive horizon");
    std::vector<double> ts(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        ts[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
    ts[0] = 0.0;
    ts[steps] = horizon;
    return TimeGrid(std::move(ts));
}

} // namespace mfollow
