#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jitai/env.hpp"
#include "jitai/llm.hpp"
#include "jitai/llm_client.hpp"
#include "jitai/rng.hpp"
#include "jitai/thompson.hpp"
#include "jitai/walk.hpp"

namespace jitai {

enum class FilterMode {
  None,        // standard Thompson Sampling, filter never consulted
  MockOracle,  // deterministic stand-in with configurable mistake rate
  LiveLLM,     // chat-completion endpoint
};

struct FilterConfig {
  FilterMode mode = FilterMode::None;
  double ambiguity_rate = 0.06;  // MockOracle mistake probability
  LLMClientConfig llm;
  std::filesystem::path audit_log;  // optional JSONL of live exchanges
};

struct TrialConfig {
  EnvParams env;
  WalkParams walk;
  TSConfig ts;
  FilterConfig filter;
  std::uint64_t seed = 0;
  int history_window = 4;  // prompt rows offered to the LLM
  // Defaults to featurize(); swap in a custom map to change the state vector.
  std::function<FeatureVector(const EnvState&)> feature_map;
};

struct StepLog {
  int t = 0;
  int candidate = 0;                      // TS pick
  int executed = 0;                       // after the filter: 0 or candidate
  std::optional<Verdict> verdict;         // set when the filter was consulted
  std::optional<std::string> preference;  // active preference during the day
  int w = 1;                              // walk state during the day
  int context = 0;                        // true context the action was judged against
  double h = 0.0;                         // behavioral state after the day,
  double d = 0.0;                         //   cannot-walk inflation included
  double p = 0.5;
  double reward = 0.0;  // realized reward, zeroed while unable to walk
};

struct TrialRecord {
  std::vector<StepLog> steps;
  double total_reward = 0.0;
  bool terminated_early = false;
  long filter_queries = 0;       // decisions requested (mock or live)
  long llm_http_calls = 0;       // live chat-completion calls issued
  long llm_transport_errors = 0; // calls that fell back to the candidate
};

inline nlohmann::json to_json(const StepLog& step) {
  nlohmann::json j = {
      {"t", step.t},        {"candidate", step.candidate},
      {"executed", step.executed},
      {"w", step.w},        {"context", step.context},
      {"h", step.h},        {"d", step.d},
      {"p", step.p},        {"reward", step.reward},
  };
  j["verdict"] = step.verdict ? nlohmann::json(std::string(to_string(*step.verdict)))
                              : nlohmann::json(nullptr);
  j["preference"] = step.preference ? nlohmann::json(*step.preference) : nlohmann::json(nullptr);
  return j;
}

// One step per line, then a type-tagged summary object line.
inline std::string to_jsonl(const TrialRecord& record) {
  std::string out;
  for (const auto& step : record.steps) {
    out += to_json(step).dump();
    out += '\n';
  }
  nlohmann::json summary = {
      {"summary",
       {{"total_reward", record.total_reward},
        {"steps", record.steps.size()},
        {"terminated_early", record.terminated_early},
        {"filter_queries", record.filter_queries},
        {"llm_http_calls", record.llm_http_calls},
        {"llm_transport_errors", record.llm_transport_errors}}},
  };
  out += summary.dump();
  out += '\n';
  return out;
}

inline void write_jsonl(const TrialRecord& record, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot write trial log: " + file.string());
  out << to_jsonl(record);
}

// One participant study. Each day: TS proposes a candidate action; if it is a
// message and a preference is active, the filter may veto it down to "no
// message"; the behavioral dynamics run the executed action; the cannot-walk
// constraint zeroes the reward and inflates the state; the walk chain
// advances; the executed arm's posterior absorbs the realized reward.
class Trial {
 public:
  explicit Trial(TrialConfig cfg)
      : cfg_(std::move(cfg)),
        env_rng_(make_stream(cfg_.seed, Stream::Env)),
        walk_rng_(make_stream(cfg_.seed, Stream::Walk)),
        ts_rng_(make_stream(cfg_.seed, Stream::Thompson)),
        oracle_rng_(make_stream(cfg_.seed, Stream::Oracle)) {
    validate(cfg_.env);
    validate(cfg_.walk);
    validate(cfg_.ts);
    if (cfg_.history_window < 0) throw std::invalid_argument("history_window must be >= 0");
    if (!cfg_.feature_map) cfg_.feature_map = [](const EnvState& s) { return featurize(s); };
    if (cfg_.filter.mode == FilterMode::LiveLLM && !cfg_.filter.audit_log.empty()) {
      audit_ = AuditLog(cfg_.filter.audit_log);
    }
    env_state_ = reset_env(env_rng_, cfg_.env);
    posteriors_ = make_priors(cfg_.ts);
  }

  bool done() const { return done_; }
  const EnvState& env_state() const { return env_state_; }
  const WalkState& walk_state() const { return walk_state_; }
  const ArmSet& posteriors() const { return posteriors_; }
  const TrialRecord& record() const { return record_; }

  void step() {
    if (done_) throw std::logic_error("step called on a finished trial");
    const FeatureVector features = cfg_.feature_map(env_state_);
    const Action candidate = select_action(posteriors_, features, ts_rng_);

    Action executed = candidate;
    std::optional<Verdict> verdict;
    if (cfg_.filter.mode != FilterMode::None && candidate.is_message() &&
        walk_state_.preference.has_value()) {
      const Decision decision = consult_filter();
      verdict = decision.verdict;
      if (decision.verdict == Verdict::NotSend) executed = Action(0);
      // Send, Unparseable and transport fallbacks keep the candidate.
    }

    auto [next_env, reward, env_done] = env_step(env_state_, executed, env_rng_, cfg_.env);
    if (walk_state_.w == 0) {
      const bool inflate =
          cfg_.walk.constraint_mode == ConstraintMode::PerStep || !constraint_applied_;
      if (inflate) {
        auto constrained = apply_constraint(next_env, cfg_.walk);
        next_env = constrained.state;
        reward = constrained.reward_override;
        constraint_applied_ = true;
      } else {
        reward = 0.0;  // the user cannot walk
      }
    }

    StepLog log;
    log.t = env_state_.t;
    log.candidate = candidate.value();
    log.executed = executed.value();
    log.verdict = verdict;
    log.preference = walk_state_.preference;
    log.w = walk_state_.w;
    log.context = env_state_.c;
    log.h = next_env.h;
    log.d = next_env.d;
    log.p = next_env.p;
    log.reward = reward;
    record_.steps.push_back(std::move(log));
    record_.total_reward += reward;

    const WalkState next_walk = walk_step(walk_state_, walk_rng_, cfg_.walk);
    if (walk_state_.w == 1 && next_walk.w == 0) constraint_applied_ = false;

    posteriors_[executed.value()] =
        update_posterior(posteriors_[executed.value()], features, reward, cfg_.ts.reward_noise_var);

    env_state_ = next_env;
    walk_state_ = next_walk;
    if (env_done) {
      done_ = true;
      record_.terminated_early = next_env.t < cfg_.env.t_max;
    }
  }

  TrialRecord run() {
    while (!done_) step();
    return record_;
  }

 private:
  Decision consult_filter() {
    ++record_.filter_queries;
    if (cfg_.filter.mode == FilterMode::MockOracle) {
      return mock_oracle(walk_state_.preference, cfg_.filter.ambiguity_rate, oracle_rng_);
    }
    PromptSpec spec;
    spec.history_window = cfg_.history_window;
    const std::size_t window = std::min<std::size_t>(record_.steps.size(),
                                                     static_cast<std::size_t>(cfg_.history_window));
    for (std::size_t i = record_.steps.size() - window; i < record_.steps.size(); ++i) {
      const auto& s = record_.steps[i];
      spec.state_rows.push_back({s.t, s.context, s.h, s.d, s.reward, s.executed});
    }
    spec.preference = *walk_state_.preference;
    const std::string prompt = build_prompt(spec);
    Decision decision;
    try {
      ++record_.llm_http_calls;
      decision = parse_decision(query_llm(cfg_.filter.llm, prompt));
    } catch (const TransportError& e) {
      ++record_.llm_transport_errors;
      decision.verdict = Verdict::Unparseable;  // fall back to the candidate action
      decision.raw = e.what();
    }
    if (audit_.enabled()) audit_.record(env_state_.t, prompt, decision);
    return decision;
  }

  TrialConfig cfg_;
  Rng env_rng_;
  Rng walk_rng_;
  Rng ts_rng_;
  Rng oracle_rng_;
  EnvState env_state_;
  WalkState walk_state_;  // starts able to walk, no preference
  ArmSet posteriors_;
  TrialRecord record_;
  AuditLog audit_;
  bool constraint_applied_ = false;
  bool done_ = false;
};

inline TrialRecord run_trial(const TrialConfig& cfg) { return Trial(cfg).run(); }

}  // namespace jitai
