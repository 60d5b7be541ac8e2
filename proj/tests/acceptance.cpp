// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bootrl/dynamics.hpp"
#include "bootrl/harness.hpp"
#include "bootrl/metrics.hpp"
#include "bootrl/simulator.hpp"
#include "bootrl/solver.hpp"
#include "corpus.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bootrl;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kSolverSeconds = 5.0;
constexpr double kConsistencySeconds = 30.0;
constexpr double kConsistencyL1 = 0.02;
constexpr double kOrderingSeconds = 10.0;
constexpr double kOrderingSE = 2.0;
constexpr double kEndToEndSeconds = 60.0;
constexpr double kPlateau = 0.02;
constexpr double kIntervalTol = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Result {
  bool pass = false;
  std::string detail;
};

Result criterion_solver() {
  const auto t0 = Clock::now();
  Rng rng(20240101);
  int matched = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t S = 1 + rng.below(4), A = 1 + rng.below(3);
    const double gamma = i % 2 ? 0.9 : 0.5;
    const auto m = oracle::random_mdp(S, A, rng);
    SolverConfig cfg;
    cfg.gamma = gamma;
    cfg.tolerance = 1e-12;
    const auto best = derive_policy(value_iteration(m, cfg, Objective::maximize), PolicyMode::best);
    const auto worst = derive_policy(value_iteration(m, cfg, Objective::minimize), PolicyMode::worst);
    const auto ref = oracle::enumerate_policies(m, gamma);
    matched += best.action_per_state == ref.best && worst.action_per_state == ref.worst;
  }
  const double secs = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d/50 MDPs match enumeration, %.3f s (limit %.0f s)", matched, secs,
                kSolverSeconds);
  return {matched == 50 && secs < kSolverSeconds, buf};
}

Result criterion_consistency() {
  const auto t0 = Clock::now();
  const auto spec = test_support::tiny4();
  const std::vector<std::size_t> grid{10, 100, 1000, 10000};
  std::vector<double> mean_r(grid.size(), 0.0), mean_t(grid.size(), 0.0);
  double last_r = 0.0, last_t = 0.0;
  bool last_ok = true;
  const int seeds = 20;
  const auto truth = make_synthetic_truth(spec, 404);
  for (int seed = 0; seed < seeds; ++seed) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto xs = sample_from_truth(truth, spec, grid[g], derive_seed({77, static_cast<std::uint64_t>(seed)}));
      const auto est = estimate_dynamics(xs, spec);
      const double r = l1_reward(est, truth.learned), t = l1_transition(est, truth.learned);
      mean_r[g] += r / seeds;
      mean_t[g] += t / seeds;
      if (grid[g] == 10000) {
        last_r = std::max(last_r, r);
        last_t = std::max(last_t, t);
        last_ok = last_ok && r < kConsistencyL1 && t < kConsistencyL1;
      }
    }
  }
  bool monotone = true;
  for (std::size_t g = 1; g < grid.size(); ++g)
    monotone = monotone && mean_r[g] <= mean_r[g - 1] && mean_t[g] <= mean_t[g - 1];
  const double secs = seconds_since(t0);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "worst L1 at n=10000 reward %.4f transition %.4f (limit %.2f); mean reward L1 %.4f>%.4f>%.4f>%.4f, "
                "transition %.4f>%.4f>%.4f>%.4f; %.2f s",
                last_r, last_t, kConsistencyL1, mean_r[0], mean_r[1], mean_r[2], mean_r[3], mean_t[0], mean_t[1],
                mean_t[2], mean_t[3], secs);
  return {last_ok && monotone && secs < kConsistencySeconds, buf};
}

Result criterion_baselines() {
  bool ok = true;
  for (int n = 1; n <= 4; ++n) {
    const auto spec = load_study_spec(bundled_study_path(n));
    const auto eq = baseline_equal_probability(spec);
    ok = ok && l1_transition(eq, eq) == 0.0;
    const std::size_t S = spec.num_learned_states(), A = spec.num_clusters();
    std::vector<double> identity(S * A * S, 0.0);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t a = 0; a < A; ++a) identity[(s * A + a) * S + s] = 1.0;
    const auto truth = DynamicsModel::from_tables(S, A, std::vector<double>(S * A, spec.reward.lo), identity,
                                                  spec.reward.lo, spec.reward.hi);
    ok = ok && l1_transition(baseline_stay_in_state(spec), truth) == 0.0;
  }
  const auto spec = test_support::tiny4();
  const std::vector<Sample> xs{test_support::sample({0, 0}, 0, -1.0, {0, 1}),
                               test_support::sample({1, 0}, 1, 1.0, {1, 1}),
                               test_support::sample({0, 1}, 1, -1.0, {0, 0}),
                               test_support::sample({1, 1}, 0, 1.0, {1, 0})};
  const auto mean_reward = baseline_mean_reward(xs, spec);
  for (double r : mean_reward.reward_table()) ok = ok && r == 0.0;
  return {ok, "equal-probability self L1, stay-in-state vs identity truth, mean reward of {-1, 1} all exactly 0"};
}

// Per-user average of the criterion over the horizon; returns mean and SE.
std::pair<double, double> long_run(const Policy& p, const GroundTruth& truth, const StudySpec& spec,
                                   std::uint64_t seed) {
  const std::size_t users = 200, horizon = 20;
  const auto v = simulate_users(p, truth, spec, users, horizon, seed);
  std::vector<double> per_user(users, 0.0);
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t t = 0; t < horizon; ++t) per_user[u] += v[u * horizon + t] / horizon;
  double mean = 0.0;
  for (double x : per_user) mean += x / users;
  double ss = 0.0;
  for (double x : per_user) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (users - 1) / users)};
}

Result criterion_ordering() {
  const auto t0 = Clock::now();
  const auto spec = load_study_spec(bundled_study_path(1));
  const auto truth = make_synthetic_truth(spec, 31, {.action_gap = 0.3, .state_noise = 0.1});
  SolverConfig cfg;
  const auto best = solve_policy(spec, truth.learned, cfg, PolicyRole::optimal);
  const auto worst = solve_policy(spec, truth.learned, cfg, PolicyRole::worst);
  const auto rnd = random_policy(spec, 5);
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto [mb, sb] = long_run(best, truth, spec, seed);
    const auto [mr, sr] = long_run(rnd, truth, spec, seed);
    const auto [mw, sw] = long_run(worst, truth, spec, seed);
    ok = ok && mb - mr > kOrderingSE * std::hypot(sb, sr) && mr - mw > kOrderingSE * std::hypot(sr, sw);
    char buf[128];
    std::snprintf(buf, sizeof buf, "seed %llu: %.3f > %.3f > %.3f; ", static_cast<unsigned long long>(seed), mb, mr,
                  mw);
    detail += buf;
  }
  const double secs = seconds_since(t0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f s", secs);
  return {ok && secs < kOrderingSeconds, detail + buf};
}

const char* kEndToEndConfig = R"(
[run]
study = 3
seed = 2024

[data]
truth = "synthetic"
synthetic_samples = 500
action_gap = 0.6
state_noise = 0.1
support = 3

[plan]
endpoint = "mock"
variants = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
n_per_action = 500

[simulator]
users = 200
horizon = 20

[sweep]
n_grid = [10, 20, 50, 100, 200, 300, 400, 500]
oracle_draws = 10
)";

RunConfig end_to_end_config(const fs::path& dir) {
  auto cfg = parse_run_config(kEndToEndConfig, "acceptance", test_support::data_dir());
  cfg.run_dir = dir;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

struct EndToEnd {
  fs::path dir;
  double seconds = 0.0;
};

EndToEnd run_end_to_end(const std::string& name) {
  EndToEnd e{test_support::scratch(name), 0.0};
  const auto t0 = Clock::now();
  Run run(end_to_end_config(e.dir));
  run.pipeline();
  e.seconds = seconds_since(t0);
  return e;
}

const SweepCell* find_cell(const L1Sweep& sw, const std::string& entity, std::size_t n) {
  for (const auto& c : sw.cells)
    if (c.entity == entity && c.n == n) return &c;
  return nullptr;
}

Result criterion_end_to_end(const EndToEnd& e) {
  const auto spec = load_study_spec(bundled_study_path(3));
  bool ok = spec.num_learned_states() <= 12;
  const auto optimal = policy_from_json(read_json(e.dir / "policies/optimal.json"));
  // Independent check that the stored optimum is optimal for the stored truth.
  const auto truth = truth_from_json(read_json(e.dir / "dynamics/truth.json"));
  SolverConfig tight;
  tight.tolerance = 1e-12;
  ok = ok && oracle::enumerate_policies(truth.learned, tight.gamma).best == optimal.action_per_state;

  int policies = 0, identical = 0;
  std::string label;
  for (const auto& dir : fs::directory_iterator(e.dir / "policies/generated"))
    for (const auto& f : fs::directory_iterator(dir.path())) {
      const auto p = policy_from_json(read_json(f.path()));
      label = p.label;
      ++policies;
      identical += p.action_per_state == optimal.action_per_state;
    }
  ok = ok && policies == 10 && identical == policies;

  const auto sw = sweep_from_json(read_json(e.dir / "sweep/l1_sweep.json"));
  const SweepCell* g200 = find_cell(sw, label, 200);
  const SweepCell* g500 = find_cell(sw, label, 500);
  const SweepCell* mr = find_cell(sw, "mean_reward", 200);
  const SweepCell* ep = find_cell(sw, "equal_probability", 200);
  const SweepCell* st = find_cell(sw, "stay_in_state", 200);
  double r200 = NAN, t200 = NAN, r500 = NAN, t500 = NAN;
  if (g200 && g500 && mr && ep && st && g200->reward && g500->reward && mr->reward && ep->transition &&
      st->transition) {
    r200 = g200->reward->mean;
    t200 = g200->transition->mean;
    r500 = g500->reward->mean;
    t500 = g500->transition->mean;
    ok = ok && r200 < mr->reward->mean && t200 < ep->transition->mean && t200 < st->transition->mean;
    ok = ok && std::abs(r500 - r200) < kPlateau && std::abs(t500 - t200) < kPlateau;
  } else {
    ok = false;
  }
  ok = ok && e.seconds < kEndToEndSeconds;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "%d/%d variant policies equal pi*; L1 reward %.4f@200 %.4f@500 (mean-reward baseline %.4f), "
                "transition %.4f@200 %.4f@500 (equal-prob %.4f, stay %.4f); %.2f s (limit %.0f s)",
                identical, policies, r200, r500, mr && mr->reward ? mr->reward->mean : NAN, t200, t500,
                ep && ep->transition ? ep->transition->mean : NAN, st && st->transition ? st->transition->mean : NAN,
                e.seconds, kEndToEndSeconds);
  return {ok, buf};
}

Result criterion_parser() {
  const auto outcomes = corpus::run(test_support::data_dir() / "parser_corpus");
  int failures = 0, malformed = 0, malformed_ok = 0;
  bool reward_ok = false, next_ok = false;
  std::string first_bad;
  for (const auto& o : outcomes) {
    if (!o.ok && first_bad.empty()) first_bad = "; first mismatch " + o.item.file + " -> " + o.got;
    failures += !o.ok;
    if (o.item.file.rfind("malformed_", 0) == 0) {
      ++malformed;
      malformed_ok += o.ok && o.got.rfind("error:", 0) == 0;
    }
    if (o.item.file == "cot_reward_example.txt") reward_ok = o.ok && o.got == "8";
    if (o.item.file == "cot_next_state_example.txt") next_ok = o.ok && o.got == "4,5,7";
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "long reward example -> %s, long next-state example -> %s, %d/%d malformed rejected "
                "with the declared kind, %d mismatches over %zu items%s",
                reward_ok ? "8" : "wrong", next_ok ? "(4, 5, 7)" : "wrong", malformed_ok, malformed, failures,
                outcomes.size(), first_bad.c_str());
  return {failures == 0 && reward_ok && next_ok && malformed == 30 && malformed_ok == 30, buf};
}

Result criterion_specs() {
  struct Want {
    std::size_t states, actions, clusters;
  };
  const Want want[] = {{8, 5, 5}, {8, 53, 14}, {12, 2, 2}, {8, 4, 4}};
  bool ok = true;
  std::string detail;
  for (int n = 1; n <= 4; ++n) {
    const auto spec = load_study_spec(bundled_study_path(n));
    const Want& w = want[n - 1];
    ok = ok && spec.num_learned_states() == w.states && spec.actions.size() == w.actions &&
         spec.num_clusters() == w.clusters;
    detail += "study " + std::to_string(n) + ": " + std::to_string(spec.num_learned_states()) + " states, " +
              std::to_string(spec.actions.size()) + " actions, " + std::to_string(spec.num_clusters()) +
              " clusters" + (n < 4 ? "; " : "");
  }
  return {ok, detail};
}

Result criterion_determinism(const EndToEnd& a, const EndToEnd& b) {
  std::size_t compared = 0, differing = 0;
  std::string first;
  for (const char* sub : {"samples", "reports", "sweep", "policies", "dynamics", "series"}) {
    for (const auto& f : fs::recursive_directory_iterator(a.dir / sub)) {
      if (!f.is_regular_file()) continue;
      const auto rel = fs::relative(f.path(), a.dir);
      ++compared;
      if (!fs::exists(b.dir / rel) || slurp(f.path()) != slurp(b.dir / rel)) {
        ++differing;
        if (first.empty()) first = " (first: " + rel.string() + ")";
      }
    }
  }
  const bool has_store = fs::exists(a.dir / "samples/generated.jsonl");
  const bool has_reports = fs::exists(a.dir / "reports/l1_reward.tsv");
  return {compared > 0 && differing == 0 && has_store && has_reports,
          std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ" + first};
}

Result criterion_interval() {
  const std::vector<double> equal(10, 0.37);
  const auto d = credible_interval(equal);
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  const auto ci = credible_interval(v);
  // Position p*(n-1) = 0.225 and 8.775 between order statistics.
  const double lo = 1.0 + 0.225 * (2.0 - 1.0), hi = 9.0 + 0.775 * (10.0 - 9.0);
  const bool ok = d.low == 0.37 && d.high == 0.37 && std::abs(ci.low - lo) < kIntervalTol &&
                  std::abs(ci.high - hi) < kIntervalTol;
  char buf[160];
  std::snprintf(buf, sizeof buf, "equal values -> (%.2f, %.2f); 1..10 -> (%.12f, %.12f), expected (%.3f, %.3f)", d.low,
                d.high, ci.low, ci.high, lo, hi);
  return {ok, buf};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const char* name, const std::function<Result()>& f) {
    Result r;
    try {
      r = f();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::printf("criterion %d %-28s %s  %s\n", n, name, r.pass ? "PASS" : "FAIL", r.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "solver correctness", criterion_solver);
  report(2, "estimator consistency", criterion_consistency);
  report(3, "baseline identities", criterion_baselines);
  report(4, "policy ordering", criterion_ordering);
  EndToEnd first, second;
  report(5, "mock end-to-end", [&] {
    first = run_end_to_end("acceptance_e2e_a");
    return criterion_end_to_end(first);
  });
  report(6, "parser corpus", criterion_parser);
  report(7, "bundled study sizes", criterion_specs);
  report(8, "determinism", [&] {
    if (first.dir.empty()) first = run_end_to_end("acceptance_e2e_a");
    second = run_end_to_end("acceptance_e2e_b");
    return criterion_determinism(first, second);
  });
  report(9, "credible interval contract", criterion_interval);
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
