#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bootrl/dynamics.hpp"
#include "bootrl/execution.hpp"
#include "bootrl/rng.hpp"
#include "bootrl/study.hpp"

namespace bootrl {

struct SolverConfig {
  double gamma = 0.85;
  double tolerance = 1e-8;  // sup-norm change between sweeps
  int max_iterations = 10000;

  void validate() const;
};

enum class Objective { maximize, minimize };

// Finite MDP with sparse transition rows (CSR over flattened (s, a)).
struct TabularMdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> reward;         // s*A + a
  std::vector<std::size_t> row_begin; // S*A + 1 offsets into next/prob
  std::vector<std::uint32_t> next;
  std::vector<double> prob;

  static TabularMdp from_dynamics(const DynamicsModel& dyn);
  // Throws Error(invariant) on bad shapes, negative entries or row sums off
  // by more than 1e-9.
  void check() const;
};

struct ValueFunction {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> v;
  std::vector<double> q;  // s*A + a
  Objective objective = Objective::maximize;
  bool converged = false;
  int iterations = 0;
  // sup_s |v(s) - best_a q(s, a)| for the returned tables.
  double bellman_residual = 0.0;

  double value(std::size_t s, std::size_t a) const { return q[s * num_actions + a]; }
};

// Synchronous Bellman backups q(s,a) = R(s,a) + gamma * sum T(s,a,s') v(s'),
// v(s) = max_a (or min_a) q(s,a), until the sup-norm change drops below the
// tolerance or max_iterations is reached.
ValueFunction value_iteration(const TabularMdp& mdp, const SolverConfig& cfg,
                              Objective objective = Objective::maximize,
                              Execution exec = Execution::parallel);
ValueFunction value_iteration(const DynamicsModel& dyn, const SolverConfig& cfg,
                              Objective objective = Objective::maximize,
                              Execution exec = Execution::parallel);

enum class PolicyRole { optimal, worst, random, no_learned_dynamics, human, generated };
enum class PolicyMode { best, worst };

std::string_view to_string(PolicyRole role);
PolicyRole parse_policy_role(std::string_view s);

// Deterministic policies map planning states (learned state x deterministic
// abstraction, index learned*D + d) to action ids. A sampling policy draws a
// fresh uniform action at every step.
struct Policy {
  PolicyRole role = PolicyRole::optimal;
  std::string label;
  std::vector<int> action_per_state;
  std::size_t num_actions = 0;
  std::size_t learned_states = 0;
  std::size_t deterministic_states = 1;
  bool sampling = false;
  std::uint64_t seed = 0;

  int action_for(std::size_t planning_state, Rng& rng) const;
  bool operator==(const Policy&) const = default;
};

// argmax (best) or argmin (worst) of q per state; ties go to the lowest id.
Policy derive_policy(const ValueFunction& vf, PolicyMode mode);

// The study's planning problem: learned dynamics combined with the
// deterministic hook. Actions are raw action ids; each uses its cluster's
// learned dynamics.
struct PlanningModel {
  TabularMdp mdp;
  std::size_t learned_states = 0;
  std::size_t deterministic_states = 1;
};
PlanningModel build_planning_model(const StudySpec& spec, const DynamicsModel& learned);

// optimal/human/generated: maximize then argmax. worst: minimize then argmin.
Policy solve_policy(const StudySpec& spec, const DynamicsModel& learned, const SolverConfig& cfg,
                    PolicyRole role = PolicyRole::optimal, Execution exec = Execution::parallel);
Policy random_policy(const StudySpec& spec, std::uint64_t seed);
// Learned reward replaced by the range midpoint and learned transitions by
// uniform rows; only the deterministic hook separates actions. Rejected for
// studies without a hook.
Policy no_learned_dynamics_policy(const StudySpec& spec, const SolverConfig& cfg,
                                  Execution exec = Execution::parallel);

}  // namespace bootrl
