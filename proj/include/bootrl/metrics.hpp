#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bootrl/dynamics.hpp"
#include "bootrl/execution.hpp"
#include "bootrl/simulator.hpp"
#include "bootrl/study.hpp"

namespace bootrl {

struct L1Options {
  // When false, (state, action) pairs the estimate never observed are left
  // out; if nothing is left the distance is NaN.
  bool include_fallback = true;
};

// Mean absolute difference over all (state, action) reward entries.
double l1_reward(const DynamicsModel& estimate, const DynamicsModel& reference, L1Options options = {});
// Mean absolute difference over all (state, action, next state) entries.
double l1_transition(const DynamicsModel& estimate, const DynamicsModel& reference,
                     L1Options options = {});

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Central percentile interval with linear interpolation between order
// statistics (position p*(n-1)). Needs at least two values.
Interval credible_interval(std::span<const double> values, double level = 0.95);

// Combines one series per policy instance into a mean series with a
// percentile interval across instances; a single instance gives a degenerate
// interval at the mean. The interval is widened to contain the mean.
CriterionSeries aggregate_series(std::span<const CriterionSeries> instances, const std::string& label,
                                 double level = 0.95);

enum class SweepSourceKind { generated, human };

// A generated source is split into instances by prompt variant; at size n
// each instance keeps, per action cluster, its first n samples in slot
// order. A human source is one instance over all its samples at every n.
struct SweepSource {
  std::string label;
  SweepSourceKind kind = SweepSourceKind::generated;
  std::vector<Sample> samples;
};

struct SweepConfig {
  std::vector<std::size_t> n_grid;
  std::size_t oracle_draws = 10;
  std::uint64_t seed = 0;
  double smoothing = 0.0;
  L1Options l1;
  double level = 0.95;
};

struct SweepStat {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t instances = 0;

  bool operator==(const SweepStat&) const = default;
};

enum class SweepEntityKind { source, oracle, baseline };

struct SweepCell {
  std::string entity;
  SweepEntityKind kind = SweepEntityKind::source;
  std::size_t n = 0;
  // Every instance lacked n samples for some cluster.
  bool missing = false;
  std::optional<SweepStat> reward;
  std::optional<SweepStat> transition;

  bool operator==(const SweepCell&) const = default;
};

struct L1Sweep {
  std::vector<std::size_t> n_grid;
  std::vector<SweepCell> cells;  // entity-major, n ascending

  bool operator==(const L1Sweep&) const = default;
};

// L1 distances to `reference` for every source, the oracle (real-data
// subsamples, `oracle_draws` per n) and the constant baselines (mean reward;
// equal probability and stay in state) at every n in the grid.
L1Sweep sweep(std::span<const SweepSource> sources, std::span<const Sample> real,
              const StudySpec& spec, const DynamicsModel& reference, const SweepConfig& config,
              Execution exec = Execution::parallel);

std::string_view to_string(SweepEntityKind kind);

}  // namespace bootrl
