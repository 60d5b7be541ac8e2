#include "bootrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>

#include "bootrl/error.hpp"
#include "bootrl/rng.hpp"

namespace bootrl {

namespace {

void check_shapes(const DynamicsModel& a, const DynamicsModel& b) {
  if (a.num_states() != b.num_states() || a.num_actions() != b.num_actions())
    throw Error(ErrorKind::precondition, "dynamics models have different shapes");
}

double percentile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SweepStat summarize(const std::vector<double>& values, double level) {
  SweepStat st;
  st.instances = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) {
    st.ci_low = st.ci_high = st.mean;
  } else {
    const Interval ci = credible_interval(values, level);
    st.ci_low = std::min(ci.low, st.mean);
    st.ci_high = std::max(ci.high, st.mean);
  }
  return st;
}

}  // namespace

double l1_reward(const DynamicsModel& est, const DynamicsModel& ref, L1Options options) {
  check_shapes(est, ref);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < est.num_states(); ++s)
    for (std::size_t a = 0; a < est.num_actions(); ++a) {
      if (!options.include_fallback && est.is_fallback(s, a)) continue;
      sum += std::abs(est.reward(s, a) - ref.reward(s, a));
      ++count;
    }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

double l1_transition(const DynamicsModel& est, const DynamicsModel& ref, L1Options options) {
  check_shapes(est, ref);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < est.num_states(); ++s)
    for (std::size_t a = 0; a < est.num_actions(); ++a) {
      if (!options.include_fallback && est.is_fallback(s, a)) continue;
      const auto x = est.row(s, a);
      const auto y = ref.row(s, a);
      for (std::size_t t = 0; t < x.size(); ++t) sum += std::abs(x[t] - y[t]);
      count += x.size();
    }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

Interval credible_interval(std::span<const double> values, double level) {
  if (values.size() < 2) throw Error(ErrorKind::precondition, "an interval needs at least two values");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::precondition, "interval level must be in (0, 1)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  return {percentile(sorted, tail), percentile(sorted, 1.0 - tail)};
}

CriterionSeries aggregate_series(std::span<const CriterionSeries> instances, const std::string& label,
                                 double level) {
  if (instances.empty()) throw Error(ErrorKind::precondition, "no series to aggregate");
  CriterionSeries out;
  out.label = label;
  out.criterion = instances.front().criterion;
  out.timesteps = instances.front().timesteps;
  out.instances = instances.size();
  for (const auto& x : instances)
    if (x.timesteps != out.timesteps || x.criterion != out.criterion)
      throw Error(ErrorKind::precondition, "series to aggregate differ in length or criterion");
  std::vector<double> column(instances.size());
  for (std::size_t t = 0; t < out.timesteps; ++t) {
    for (std::size_t i = 0; i < instances.size(); ++i) column[i] = instances[i].mean[t];
    const SweepStat st = summarize(column, level);
    double var = 0.0;
    for (double v : column) var += (v - st.mean) * (v - st.mean);
    const double n = static_cast<double>(column.size());
    out.mean.push_back(st.mean);
    out.ci_low.push_back(st.ci_low);
    out.ci_high.push_back(st.ci_high);
    out.std_error.push_back(column.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0);
  }
  return out;
}

std::string_view to_string(SweepEntityKind kind) {
  switch (kind) {
    case SweepEntityKind::source: return "source";
    case SweepEntityKind::oracle: return "oracle";
    case SweepEntityKind::baseline: return "baseline";
  }
  return "?";
}

namespace {

// Samples of one instance grouped by cluster, each group in slot order.
using Instance = std::vector<std::vector<const Sample*>>;

std::vector<Instance> split_instances(const SweepSource& source, const StudySpec& spec) {
  std::map<int, Instance> groups;
  for (const Sample& x : source.samples) {
    const int key = source.kind == SweepSourceKind::human ? 0 : x.prompt_variant.value_or(0);
    auto& inst = groups[key];
    inst.resize(spec.num_clusters());
    inst[static_cast<std::size_t>(spec.cluster_of(x.action_id))].push_back(&x);
  }
  std::vector<Instance> out;
  for (auto& [key, inst] : groups) {
    for (auto& cluster : inst)
      std::stable_sort(cluster.begin(), cluster.end(), [](const Sample* a, const Sample* b) {
        return a->slot.value_or(0) < b->slot.value_or(0);
      });
    out.push_back(std::move(inst));
  }
  return out;
}

// One L1 evaluation in the flattened work list.
struct Task {
  std::size_t cell;
  std::vector<Sample> samples;
  bool oracle = false;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

}  // namespace

L1Sweep sweep(std::span<const SweepSource> sources, std::span<const Sample> real, const StudySpec& spec,
              const DynamicsModel& reference, const SweepConfig& config, Execution exec) {
  if (config.n_grid.empty()) throw Error(ErrorKind::precondition, "sweep needs a non-empty n grid");
  if (config.oracle_draws == 0) throw Error(ErrorKind::precondition, "oracle_draws must be positive");
  if (reference.num_states() != spec.num_learned_states() || reference.num_actions() != spec.num_clusters())
    throw Error(ErrorKind::precondition, "reference model does not match the study");
  L1Sweep out;
  out.n_grid = config.n_grid;
  std::sort(out.n_grid.begin(), out.n_grid.end());

  std::vector<Task> tasks;
  for (const SweepSource& src : sources) {
    const auto instances = split_instances(src, spec);
    for (std::size_t n : out.n_grid) {
      SweepCell cell{src.label, SweepEntityKind::source, n, false, std::nullopt, std::nullopt};
      const std::size_t id = out.cells.size();
      bool any = false;
      for (const Instance& inst : instances) {
        Task task{id, {}, false, n, 0};
        bool enough = true;
        for (const auto& cluster : inst) {
          if (src.kind == SweepSourceKind::generated && cluster.size() < n) enough = false;
          const std::size_t take = src.kind == SweepSourceKind::human ? cluster.size() : std::min(n, cluster.size());
          for (std::size_t j = 0; j < take; ++j) task.samples.push_back(*cluster[j]);
        }
        if (!enough) continue;
        any = true;
        tasks.push_back(std::move(task));
      }
      cell.missing = !any;
      out.cells.push_back(std::move(cell));
    }
  }
  for (std::size_t n : out.n_grid) {
    const std::size_t id = out.cells.size();
    out.cells.push_back({"oracle", SweepEntityKind::oracle, n, false, std::nullopt, std::nullopt});
    for (std::size_t d = 0; d < config.oracle_draws; ++d)
      tasks.push_back({id, {}, true, n, derive_seed({config.seed, n, d})});
  }

  std::vector<double> l1r(tasks.size()), l1t(tasks.size());
  auto evaluate = [&](std::size_t i) {
    const Task& task = tasks[i];
    DynamicsModel est;
    if (task.oracle) {
      const OracleDraw draw = oracle_subsample(real, spec, task.n, task.seed);
      est = estimate_dynamics(draw.samples, spec, config.smoothing);
    } else {
      est = estimate_dynamics(task.samples, spec, config.smoothing);
    }
    l1r[i] = l1_reward(est, reference, config.l1);
    l1t[i] = l1_transition(est, reference, config.l1);
  };
  const auto count = static_cast<std::ptrdiff_t>(tasks.size());
  if (exec == Execution::parallel) {
#if defined(BOOTRL_HAVE_OPENMP)
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        evaluate(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
#else
    for (std::ptrdiff_t i = 0; i < count; ++i) evaluate(static_cast<std::size_t>(i));
#endif
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) evaluate(static_cast<std::size_t>(i));
  }

  std::vector<std::vector<double>> rewards(out.cells.size()), transitions(out.cells.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    rewards[tasks[i].cell].push_back(l1r[i]);
    transitions[tasks[i].cell].push_back(l1t[i]);
  }
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    if (rewards[c].empty()) continue;
    out.cells[c].reward = summarize(rewards[c], config.level);
    out.cells[c].transition = summarize(transitions[c], config.level);
  }

  auto constant = [&](const std::string& name, std::optional<double> r, std::optional<double> t) {
    for (std::size_t n : out.n_grid) {
      SweepCell cell{name, SweepEntityKind::baseline, n, false, std::nullopt, std::nullopt};
      if (r) cell.reward = SweepStat{*r, *r, *r, 1};
      if (t) cell.transition = SweepStat{*t, *t, *t, 1};
      out.cells.push_back(cell);
    }
  };
  constant("mean_reward", l1_reward(baseline_mean_reward(real, spec), reference), std::nullopt);
  constant("equal_probability", std::nullopt, l1_transition(baseline_equal_probability(spec), reference));
  constant("stay_in_state", std::nullopt, l1_transition(baseline_stay_in_state(spec), reference));
  return out;
}

}  // namespace bootrl
