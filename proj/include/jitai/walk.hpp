#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "jitai/env.hpp"
#include "jitai/errors.hpp"
#include "jitai/rng.hpp"

namespace jitai {

// When the cannot-walk penalty inflates habituation/disengagement:
// every day spent unable to walk, or only on entering that state.
// The reward is zeroed on every cannot-walk day in both modes.
enum class ConstraintMode { PerStep, OnTransition };

// Stock reasons a user gives for being unable to walk.
inline const std::vector<std::string>& default_preference_pool() {
  static const std::vector<std::string> pool = {
      "I am tired",
      "I do not want to walk",
      "I got an injury",
      "my leg is sore",
      "I have a headache",
      "the weather is bad",
      "I have a cold",
      "I feel unwell",
      "I have a prior commitment",
      "I have a blister",
      "I’m feeling dizzy",
      "I twisted my ankle",
      "I am recovering from surgery",
      "I need to rest",
      "I have joint pain",
      "I’m dealing with anxiety",
      "I have a family obligation",
      "I forgot my shoes",
      "I don’t have anyone to walk with",
      "I have to finish my work first",
  };
  return pool;
}

struct WalkParams {
  double p_w01 = 0.9;  // P(can walk tomorrow | cannot walk today)
  double p_w11 = 0.7;  // P(can walk tomorrow | can walk today)
  double eta_d = 0.1;  // relative disengagement inflation while unable to walk
  double eta_h = 0.1;  // relative habituation inflation while unable to walk
  ConstraintMode constraint_mode = ConstraintMode::PerStep;
  std::vector<std::string> preference_pool = default_preference_pool();
};

inline void validate(const WalkParams& p) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(p.p_w01) || !unit(p.p_w11)) {
    throw std::invalid_argument("walk transition probabilities must be in [0,1]");
  }
  if (!unit(p.eta_d) || !unit(p.eta_h)) {
    throw std::invalid_argument("eta_d and eta_h must be in [0,1]");
  }
  if (p.preference_pool.empty()) throw ConfigError("preference pool is empty");
}

struct WalkState {
  int w = 1;                              // 0 = cannot walk, 1 = can walk
  std::optional<std::string> preference;  // present iff w == 0
};

inline int walk_transition(int w, Rng& rng, const WalkParams& params) {
  validate(params);
  const double p_one = (w == 0) ? params.p_w01 : params.p_w11;
  return std::bernoulli_distribution(p_one)(rng) ? 1 : 0;
}

inline std::string draw_preference(Rng& rng, const std::vector<std::string>& pool) {
  if (pool.empty()) throw ConfigError("preference pool is empty");
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

struct ConstraintResult {
  EnvState state;
  double reward_override;
};

// Cannot-walk penalty: inflate disengagement and habituation (clamped at 1)
// and return the zero reward that replaces the day's step count.
inline ConstraintResult apply_constraint(const EnvState& env_state, const WalkParams& params) {
  EnvState out = env_state;
  out.d = std::min(1.0, out.d + params.eta_d * out.d);
  out.h = std::min(1.0, out.h + params.eta_h * out.h);
  return {out, 0.0};
}

// Advance the walk chain one day. Entering "cannot walk" draws a fresh
// preference; staying there keeps it; returning to "can walk" clears it.
inline WalkState walk_step(const WalkState& walk, Rng& rng, const WalkParams& params) {
  WalkState next;
  next.w = walk_transition(walk.w, rng, params);
  if (next.w == 0) {
    if (walk.w == 0 && walk.preference.has_value()) {
      next.preference = walk.preference;
    } else {
      next.preference = draw_preference(rng, params.preference_pool);
    }
  }
  return next;
}

// One preference per line, UTF-8; blank lines are skipped.
inline std::vector<std::string> load_preference_pool(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open preference pool file: " + file.string());
  std::vector<std::string> pool;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) pool.push_back(line);
  }
  if (pool.empty()) throw ConfigError("preference pool file has no entries: " + file.string());
  return pool;
}

}  // namespace jitai
