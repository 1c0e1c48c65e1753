#pragma once

#include <stdexcept>
#include <string>

namespace mfollow {

/// Invalid or rejected experiment configuration (schema violation,
/// unknown key, failed convexity audit, unverified coercivity).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// An operation was called outside its contract (index out of range,
/// infeasible plan, uncertified input, missing gradients).
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Mismatched vector/process dimensions.
class dimension_error : public precondition_error {
public:
    explicit dimension_error(const std::string& what) : precondition_error(what) {}
};

/// A user-supplied cost evaluator produced a non-finite value.
/// The message names the node at which evaluation failed.
class evaluation_error : public std::runtime_error {
public:
    explicit evaluation_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mfollow
