#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bootrl/study.hpp"

namespace bootrl {

// A strategy counts as covered after this many completed challenges.
inline constexpr int kDiversityTarget = 4;

// Competencies in [0, 1] (competency hook) or challenge counters (diversity
// hook), one per deterministic feature. Empty for studies without a hook.
std::vector<double> initial_deterministic_state(const StudySpec& spec);

// competency: c_j <- min(1, c_j + (effort/10) * contribution(a, j)) with
//             effort = 5 * (reward + 1);
// diversity:  count_k += 1 when the challenge of strategy k was completed;
// none:       identity.
void deterministic_step(DeterministicHook hook, const StudySpec& spec, std::vector<double>& det,
                        int action_id, double reward);

// Size of the finite deterministic abstraction the planner sees: 1 for none
// and competency, (kDiversityTarget + 1)^K for diversity (counters capped).
std::size_t deterministic_abstraction_size(const StudySpec& spec);
std::size_t abstract_deterministic_state(const StudySpec& spec, std::span<const double> det);
std::vector<int> counters_from_abstraction(const StudySpec& spec, std::size_t index);

// mean_reward: the step reward; competency_fraction: mean competency;
// diversity_fraction: sum_k min(count_k, 4) / (4K).
double criterion_value(Criterion criterion, double reward, std::span<const double> det);

}  // namespace bootrl
