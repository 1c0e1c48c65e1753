#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfollow/cost.hpp"
#include "mfollow/scenario_tree.hpp"

namespace mfollow {

/// A finite time-0 lottery xi, independent of L, plus one control plan per
/// outcome: the canonical carrier of randomized (weakly admissible)
/// controls at desk scale.
struct RandomizedModel {
    const ScenarioTree* tree = nullptr;
    std::size_t k = 1;
    std::vector<double> outcome_probs;           // positive, sum to 1
    std::vector<std::vector<double>> initial_jumps;  // per outcome, R^k
    /// increments[outcome][node][component]
    std::vector<std::vector<std::vector<double>>> increments;

    void validate() const;
    ControlPlan plan_for_outcome(std::size_t r) const;
};

/// Finite joint law of (L, A): rows of (L-path index, A values at every
/// grid time, probability). The L-marginal must match the tree's path law.
struct JointLaw {
    const ScenarioTree* tree = nullptr;
    std::size_t k = 1;
    struct Row {
        std::size_t path_index = 0;               // into enumerate_paths(tree)
        std::vector<std::vector<double>> a_values; // per time, R^k
        double probability = 0.0;
    };
    std::vector<Row> rows;

    void validate() const;
};

JointLaw joint_law_from_model(const RandomizedModel& model);

struct IndependenceWitness {
    std::size_t time_index = 0;
    std::size_t node = 0;
    std::string detail;
    double gap = 0.0;
};

struct IndependenceReport {
    bool independent = true;
    std::optional<IndependenceWitness> witness;
};

/// Conditional-independence test at one time index: given each L-history
/// node, the joint law of (A-history, L-future) must factorize into the
/// product of its marginals within 1e-10 total variation.
IndependenceReport check_conditional_independence(const JointLaw& law, std::size_t time_index);
IndependenceReport check_conditional_independence(const RandomizedModel& model,
                                                  std::size_t time_index);

struct ProjectionResult {
    ControlPlan projected;     // the optional projection onto the tree filtration
    double cost_before = 0.0;  // E over xi of J(plan_for_outcome)
    double cost_after = 0.0;   // J(projected)
};

/// Average the randomized control over xi at every node. Monotonicity
/// survives the averaging and the cost never goes up (convexity).
ProjectionResult optional_project(const RandomizedModel& model, const CostSpec& spec);

/// Conditionally independent coupling of two joint laws that share the
/// L-marginal: per L-path, the product of the two conditional laws.
struct CoupledLaw {
    const ScenarioTree* tree = nullptr;
    struct Row {
        std::size_t path_index = 0;
        std::vector<std::vector<double>> q_values;
        std::vector<std::vector<double>> r_values;
        double probability = 0.0;
    };
    std::vector<Row> rows;
};

CoupledLaw couple_conditionally_independent(const JointLaw& law_q, const JointLaw& law_r);

/// The three coupling conditions, re-verified on an output: both marginals
/// within TV tolerance and Q, R conditionally independent given L.
struct CouplingCheck {
    double marginal_q_tv = 0.0;
    double marginal_r_tv = 0.0;
    bool conditionally_independent = true;
    bool passed = false;
};

CouplingCheck verify_coupling(const CoupledLaw& coupled, const JointLaw& law_q,
                              const JointLaw& law_r, double tolerance = 1e-12);

} // namespace mfollow
