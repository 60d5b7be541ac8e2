#include "bootrl/generation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "bootrl/answer_parser.hpp"
#include "bootrl/error.hpp"
#include "bootrl/prompts.hpp"
#include "bootrl/rng.hpp"

namespace bootrl {

void GenerationPlan::validate(const StudySpec& spec, bool have_real_samples) const {
  if (variants.empty()) throw Error(ErrorKind::precondition, "no prompt variants selected");
  for (int v : variants)
    if (v < 1 || v > 10) throw Error(ErrorKind::precondition, "prompt variant " + std::to_string(v) + " outside 1..10");
  if (n_per_action == 0) throw Error(ErrorKind::precondition, "n_per_action must be positive");
  if (few_shot_k < 0) throw Error(ErrorKind::precondition, "few_shot_k must be >= 0");
  if (few_shot_k > 0 && !have_real_samples)
    throw Error(ErrorKind::precondition, "few-shot prompting needs a real sample set");
  if (max_retries < 0) throw Error(ErrorKind::precondition, "max_retries must be >= 0");
  if (max_parallel < 1) throw Error(ErrorKind::precondition, "max_parallel must be >= 1");
  if (temperature < 0.0) throw Error(ErrorKind::precondition, "temperature must be >= 0");
  bool offered = false;
  for (auto l : spec.prompt_lengths) offered = offered || l == length;
  if (!offered)
    throw Error(ErrorKind::precondition,
                "study " + spec.study_id + " has no " + std::string(to_string(length)) + " prompts");
}

std::vector<std::string> GenerationPlan::warnings() const {
  std::vector<std::string> out;
  if (temperature != 0.1 && temperature != 0.6 && temperature != 0.9)
    out.push_back("temperature " + std::to_string(temperature) + " is not one of the studied settings 0.1, 0.6, 0.9");
  return out;
}

std::string chat_complete(CompletionEndpoint& endpoint, const GenerationPlan& plan, std::string prompt,
                          std::uint64_t seed, std::optional<QueryContext> context) {
  CompletionRequest req;
  req.model = plan.model;
  req.prompt = std::move(prompt);
  req.temperature = plan.temperature;
  req.top_p = plan.top_p;
  req.max_tokens = plan.max_tokens;
  req.seed = seed;
  req.context = std::move(context);
  return endpoint.complete(req);
}

namespace {

struct Slot {
  int variant;
  int cluster;
  int index;
};

bool same_provenance(const Sample& x, const GenerationPlan& plan, SampleSource source) {
  return x.source == source && x.model_id == plan.model && x.prompt_length == plan.length &&
         x.prompt_style == plan.style && x.few_shot_k == plan.few_shot_k &&
         x.temperature == plan.temperature && x.seed == plan.seed && x.slot.has_value() &&
         x.prompt_variant.has_value();
}

struct SlotOutcome {
  std::optional<Sample> sample;
  std::size_t parse_failures = 0;
  std::size_t endpoint_errors = 0;
};

class SlotRunner {
 public:
  SlotRunner(const StudySpec& spec, const GenerationPlan& plan, CompletionEndpoint& endpoint,
             std::span<const Sample> real)
      : spec_(spec), plan_(plan), endpoint_(endpoint), prompts_(spec) {
    by_cluster_.resize(spec.num_clusters());
    for (const Sample& x : real) by_cluster_[static_cast<std::size_t>(spec.cluster_of(x.action_id))].push_back(&x);
  }

  SlotOutcome run(const Slot& slot) {
    SlotOutcome out;
    const std::size_t S = spec_.num_learned_states();
    const auto actions = spec_.actions_in_cluster(slot.cluster);
    const auto i = static_cast<std::size_t>(slot.index);
    const State state = decode_state(i % S, spec_);
    const ActionDef& action = spec_.action(actions[(i / S) % actions.size()]);
    const std::vector<Sample> shots = few_shot(slot);

    std::optional<RewardAnswer> reward;
    std::optional<NextStateAnswer> next;
    for (QuestionKind kind : {QuestionKind::reward, QuestionKind::next_state}) {
      const PromptTemplate& tpl = prompts_.get(kind, plan_.length, plan_.style, slot.variant);
      const std::string prompt = render_prompt(tpl, state, action, shots, spec_);
      for (int attempt = 0; attempt <= plan_.max_retries; ++attempt) {
        const std::uint64_t seed =
            derive_seed({plan_.seed, static_cast<std::uint64_t>(slot.variant), static_cast<std::uint64_t>(slot.cluster),
                         i, static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(attempt)});
        try {
          const std::string text =
              chat_complete(endpoint_, plan_, prompt, seed, QueryContext{kind, state, action.id});
          if (kind == QuestionKind::reward)
            reward = parse_reward(text, spec_);
          else
            next = parse_next_state(text, spec_);
          break;
        } catch (const AnswerParseError&) {
          ++out.parse_failures;
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::precondition || e.kind() == ErrorKind::invariant) throw;
          ++out.endpoint_errors;
        }
      }
      if (kind == QuestionKind::reward && !reward) return out;
    }
    if (!next) return out;

    Sample x;
    x.state = state;
    x.action_id = action.id;
    x.reward = reward->reward;
    x.next_state = next->state;
    x.source = endpoint_.source();
    x.model_id = plan_.model;
    x.prompt_variant = slot.variant;
    x.prompt_length = plan_.length;
    x.prompt_style = plan_.style;
    x.few_shot_k = plan_.few_shot_k;
    x.temperature = plan_.temperature;
    x.seed = plan_.seed;
    x.slot = slot.index;
    out.sample = std::move(x);
    return out;
  }

 private:
  std::vector<Sample> few_shot(const Slot& slot) const {
    std::vector<Sample> shots;
    if (plan_.few_shot_k == 0) return shots;
    const auto& pool = by_cluster_[static_cast<std::size_t>(slot.cluster)];
    const std::size_t k = std::min(pool.size(), static_cast<std::size_t>(plan_.few_shot_k));
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    Rng rng(derive_seed({plan_.seed, static_cast<std::uint64_t>(slot.variant),
                         static_cast<std::uint64_t>(slot.cluster), static_cast<std::uint64_t>(slot.index),
                         0x66657773686f74ULL}));
    for (std::size_t j = 0; j < k; ++j) {
      std::swap(idx[j], idx[j + rng.below(idx.size() - j)]);
      shots.push_back(*pool[idx[j]]);
    }
    return shots;
  }

  const StudySpec& spec_;
  const GenerationPlan& plan_;
  CompletionEndpoint& endpoint_;
  PromptLibrary prompts_;
  std::vector<std::vector<const Sample*>> by_cluster_;
};

}  // namespace

CampaignStats run_campaign(const StudySpec& spec, const GenerationPlan& plan,
                           CompletionEndpoint& endpoint, std::span<const Sample> real_samples,
                           SampleStore& store) {
  plan.validate(spec, !real_samples.empty());
  CampaignStats stats;
  stats.warnings = plan.warnings();

  std::set<std::tuple<int, int, int>> present;
  for (const Sample& x : store.load())
    if (same_provenance(x, plan, endpoint.source()))
      present.emplace(*x.prompt_variant, spec.cluster_of(x.action_id), *x.slot);

  std::vector<Slot> todo;
  for (int v : plan.variants)
    for (int c = 0; c < static_cast<int>(spec.num_clusters()); ++c)
      for (int i = 0; i < static_cast<int>(plan.n_per_action); ++i) {
        ++stats.planned;
        if (present.count({v, c, i})) {
          ++stats.already_present;
          continue;
        }
        todo.push_back({v, c, i});
      }
  if (plan.stop_after && *plan.stop_after < todo.size()) {
    todo.resize(*plan.stop_after);
    stats.interrupted = true;
  }

  SlotRunner runner(spec, plan, endpoint, real_samples);
  const std::size_t workers = static_cast<std::size_t>(plan.max_parallel);
  const std::size_t chunk = workers * 4;
  for (std::size_t begin = 0; begin < todo.size(); begin += chunk) {
    const std::size_t end = std::min(todo.size(), begin + chunk);
    std::vector<SlotOutcome> outcomes(end - begin);
    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
      for (std::size_t j; (j = next.fetch_add(1)) < end;) {
        try {
          outcomes[j - begin] = runner.run(todo[j]);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(workers, end - begin); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<Sample> batch;
    for (auto& o : outcomes) {
      stats.parse_failures += o.parse_failures;
      stats.endpoint_errors += o.endpoint_errors;
      if (o.sample)
        batch.push_back(std::move(*o.sample));
      else
        ++stats.failed;
    }
    store.append(batch);
    stats.generated += batch.size();
  }
  store.compact();
  return stats;
}

}  // namespace bootrl
