#include "bootrl/solver.hpp"

#include <algorithm>
#include <cmath>

#include "bootrl/error.hpp"
#include "bootrl/hooks.hpp"
#include "bootrl/kernels.hpp"

namespace bootrl {

void SolverConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorKind::invariant, "gamma must be in [0, 1)");
  if (!(tolerance > 0.0)) throw Error(ErrorKind::invariant, "tolerance must be positive");
  if (max_iterations < 1) throw Error(ErrorKind::invariant, "max_iterations must be >= 1");
}

TabularMdp TabularMdp::from_dynamics(const DynamicsModel& dyn) {
  TabularMdp mdp;
  mdp.num_states = dyn.num_states();
  mdp.num_actions = dyn.num_actions();
  mdp.reward = dyn.reward_table();
  mdp.row_begin.reserve(mdp.num_states * mdp.num_actions + 1);
  mdp.row_begin.push_back(0);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      auto row = dyn.row(s, a);
      for (std::size_t next = 0; next < row.size(); ++next) {
        if (row[next] == 0.0) continue;
        mdp.next.push_back(static_cast<std::uint32_t>(next));
        mdp.prob.push_back(row[next]);
      }
      mdp.row_begin.push_back(mdp.next.size());
    }
  return mdp;
}

void TabularMdp::check() const {
  const std::size_t sa = num_states * num_actions;
  if (num_states == 0 || num_actions == 0) throw Error(ErrorKind::invariant, "empty MDP");
  if (reward.size() != sa || row_begin.size() != sa + 1 || next.size() != prob.size() ||
      row_begin.back() != next.size())
    throw Error(ErrorKind::invariant, "MDP tables have the wrong shape");
  for (std::size_t i = 0; i < sa; ++i) {
    if (!std::isfinite(reward[i])) throw Error(ErrorKind::invariant, "reward is not finite");
    double sum = 0.0;
    for (std::size_t k = row_begin[i]; k < row_begin[i + 1]; ++k) {
      if (!(prob[k] >= 0.0) || next[k] >= num_states)
        throw Error(ErrorKind::invariant, "invalid transition entry");
      sum += prob[k];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::invariant, "transition row does not sum to 1");
  }
}

ValueFunction value_iteration(const TabularMdp& mdp, const SolverConfig& cfg, Objective objective,
                              Execution exec) {
  cfg.validate();
  mdp.check();
  const std::size_t S = mdp.num_states;
  const std::size_t A = mdp.num_actions;
  auto backup = exec == Execution::serial ? kernels::bellman_backup_serial : kernels::bellman_backup_omp;

  ValueFunction vf;
  vf.num_states = S;
  vf.num_actions = A;
  vf.objective = objective;
  vf.q.assign(S * A, 0.0);
  std::vector<double> v(S, 0.0), v_next(S, 0.0);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const double change = backup(mdp, cfg.gamma, objective, v, vf.q, v_next);
    v.swap(v_next);
    vf.iterations = it;
    if (change < cfg.tolerance) {
      vf.converged = true;
      break;
    }
  }
  // One more backup so that q is consistent with the returned v.
  vf.bellman_residual = backup(mdp, cfg.gamma, objective, v, vf.q, v_next);
  vf.v = std::move(v);
  return vf;
}

ValueFunction value_iteration(const DynamicsModel& dyn, const SolverConfig& cfg, Objective objective,
                              Execution exec) {
  return value_iteration(TabularMdp::from_dynamics(dyn), cfg, objective, exec);
}

std::string_view to_string(PolicyRole role) {
  switch (role) {
    case PolicyRole::optimal: return "optimal";
    case PolicyRole::worst: return "worst";
    case PolicyRole::random: return "random";
    case PolicyRole::no_learned_dynamics: return "no_learned_dynamics";
    case PolicyRole::human: return "human";
    case PolicyRole::generated: return "generated";
  }
  return "?";
}

PolicyRole parse_policy_role(std::string_view s) {
  for (auto r : {PolicyRole::optimal, PolicyRole::worst, PolicyRole::random,
                 PolicyRole::no_learned_dynamics, PolicyRole::human, PolicyRole::generated})
    if (to_string(r) == s) return r;
  throw Error(ErrorKind::parse, "unknown policy role '" + std::string(s) + "'");
}

int Policy::action_for(std::size_t planning_state, Rng& rng) const {
  if (sampling) return static_cast<int>(rng.below(num_actions));
  if (planning_state >= action_per_state.size())
    throw Error(ErrorKind::out_of_range, "planning state " + std::to_string(planning_state) +
                                             " outside policy '" + label + "'");
  return action_per_state[planning_state];
}

Policy derive_policy(const ValueFunction& vf, PolicyMode mode) {
  Policy p;
  p.role = mode == PolicyMode::best ? PolicyRole::optimal : PolicyRole::worst;
  p.label = std::string(to_string(p.role));
  p.num_actions = vf.num_actions;
  p.learned_states = vf.num_states;
  p.action_per_state.resize(vf.num_states);
  for (std::size_t s = 0; s < vf.num_states; ++s) {
    std::size_t pick = 0;
    double best = vf.value(s, 0);
    for (std::size_t a = 1; a < vf.num_actions; ++a) {
      const double x = vf.value(s, a);
      if (!std::isfinite(x)) throw Error(ErrorKind::invariant, "non-finite action value");
      if (mode == PolicyMode::best ? x > best : x < best) {
        best = x;
        pick = a;
      }
    }
    p.action_per_state[s] = static_cast<int>(pick);
  }
  return p;
}

PlanningModel build_planning_model(const StudySpec& spec, const DynamicsModel& learned) {
  const std::size_t S = spec.num_learned_states();
  if (learned.num_states() != S || learned.num_actions() != spec.num_clusters())
    throw Error(ErrorKind::invariant, "dynamics shape does not match study " + spec.study_id);
  learned.check_rows();

  const std::size_t D = deterministic_abstraction_size(spec);
  const std::size_t A = spec.actions.size();
  PlanningModel pm;
  pm.learned_states = S;
  pm.deterministic_states = D;
  TabularMdp& mdp = pm.mdp;
  mdp.num_states = S * D;
  mdp.num_actions = A;
  mdp.reward.resize(S * D * A);
  mdp.row_begin.push_back(0);

  const double lambda = spec.reward.diversity_weight.value_or(0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t d = 0; d < D; ++d) {
      const std::vector<int> counts =
          spec.hook == DeterministicHook::diversity ? counters_from_abstraction(spec, d) : std::vector<int>{};
      for (std::size_t a = 0; a < A; ++a) {
        const ActionDef& act = spec.actions[a];
        const auto c = static_cast<std::size_t>(act.cluster_id);
        const double r = learned.reward(s, c);
        const std::size_t sa = (s * D + d) * A + a;
        auto row = learned.row(s, c);
        switch (spec.hook) {
          case DeterministicHook::none:
            mdp.reward[sa] = r;
            for (std::size_t n = 0; n < S; ++n)
              if (row[n] > 0.0) {
                mdp.next.push_back(static_cast<std::uint32_t>(n * D + d));
                mdp.prob.push_back(row[n]);
              }
            break;
          case DeterministicHook::competency: {
            double total = 0.0;
            for (double w : act.contribution) total += w;
            mdp.reward[sa] = 0.5 * (r + 1.0) * total;
            for (std::size_t n = 0; n < S; ++n)
              if (row[n] > 0.0) {
                mdp.next.push_back(static_cast<std::uint32_t>(n * D + d));
                mdp.prob.push_back(row[n]);
              }
            break;
          }
          case DeterministicHook::diversity: {
            const double p = std::clamp(r, 0.0, 1.0);
            const auto k = static_cast<std::size_t>(*act.strategy);
            const bool saturated = counts[k] >= kDiversityTarget;
            mdp.reward[sa] = p * (1.0 - (saturated ? lambda : 0.0));
            std::size_t d_done = d;
            if (!saturated) {
              std::size_t stride = 1;
              for (std::size_t j = 0; j < k; ++j) stride *= kDiversityTarget + 1;
              d_done = d + stride;
            }
            for (std::size_t n = 0; n < S; ++n) {
              if (row[n] <= 0.0) continue;
              if (d_done == d) {
                mdp.next.push_back(static_cast<std::uint32_t>(n * D + d));
                mdp.prob.push_back(row[n]);
                continue;
              }
              if (p > 0.0) {
                mdp.next.push_back(static_cast<std::uint32_t>(n * D + d_done));
                mdp.prob.push_back(p * row[n]);
              }
              if (p < 1.0) {
                mdp.next.push_back(static_cast<std::uint32_t>(n * D + d));
                mdp.prob.push_back((1.0 - p) * row[n]);
              }
            }
            break;
          }
        }
        mdp.row_begin.push_back(mdp.next.size());
      }
    }
  }
  return pm;
}

Policy solve_policy(const StudySpec& spec, const DynamicsModel& learned, const SolverConfig& cfg,
                    PolicyRole role, Execution exec) {
  if (role == PolicyRole::random || role == PolicyRole::no_learned_dynamics)
    throw Error(ErrorKind::precondition, "solve_policy does not build " + std::string(to_string(role)) + " policies");
  const PlanningModel pm = build_planning_model(spec, learned);
  const bool worst = role == PolicyRole::worst;
  const ValueFunction vf =
      value_iteration(pm.mdp, cfg, worst ? Objective::minimize : Objective::maximize, exec);
  Policy p = derive_policy(vf, worst ? PolicyMode::worst : PolicyMode::best);
  p.role = role;
  p.label = std::string(to_string(role));
  p.learned_states = pm.learned_states;
  p.deterministic_states = pm.deterministic_states;
  return p;
}

Policy random_policy(const StudySpec& spec, std::uint64_t seed) {
  Policy p;
  p.role = PolicyRole::random;
  p.label = "random";
  p.sampling = true;
  p.seed = seed;
  p.num_actions = spec.actions.size();
  p.learned_states = spec.num_learned_states();
  p.deterministic_states = deterministic_abstraction_size(spec);
  return p;
}

Policy no_learned_dynamics_policy(const StudySpec& spec, const SolverConfig& cfg, Execution exec) {
  if (spec.hook == DeterministicHook::none)
    throw Error(ErrorKind::unsupported, "study " + spec.study_id +
                                            " has no deterministic dynamics; the no-learned-dynamics "
                                            "policy is undefined");
  const DynamicsModel flat = baseline_equal_probability(spec);
  Policy p = solve_policy(spec, flat, cfg, PolicyRole::optimal, exec);
  p.role = PolicyRole::no_learned_dynamics;
  p.label = "no_learned_dynamics";
  return p;
}

}  // namespace bootrl
