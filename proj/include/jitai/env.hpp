#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jitai/rng.hpp"

namespace jitai {

// Intervention message choices:
//   0 = no message, 1 = generic message,
//   2 = message tailored to context 0, 3 = message tailored to context 1.
class Action {
 public:
  explicit Action(int value) : value_(value) {
    if (value < 0 || value > 3) {
      throw std::invalid_argument("Action value must be in {0,1,2,3}");
    }
  }

  int value() const { return value_; }
  bool is_message() const { return value_ > 0; }

  friend bool operator==(Action a, Action b) { return a.value_ == b.value_; }
  friend bool operator!=(Action a, Action b) { return a.value_ != b.value_; }

 private:
  int value_;
};

inline constexpr int kNumActions = 4;

struct EnvParams {
  double sigma = 0.4;        // context feature noise std
  double delta_h = 0.1;      // habituation decay on quiet days
  double epsilon_h = 0.05;   // habituation increment per message
  double delta_d = 0.1;      // disengagement decay on well-chosen messages
  double epsilon_d = 0.4;    // disengagement increment on badly tailored ones
  double m_s = 0.1;          // baseline daily step count
  double rho1 = 50.0;        // step gain of a generic message
  double rho2 = 200.0;       // step gain of a correctly tailored message
  double d_threshold = 1.1;  // disengagement cutoff; any value > 1 disables it
  int t_max = 50;            // study length in days
};

inline void validate(const EnvParams& p) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(p.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (!unit(p.delta_h) || !unit(p.epsilon_h) || !unit(p.delta_d) || !unit(p.epsilon_d)) {
    throw std::invalid_argument("decay/increment parameters must be in [0,1]");
  }
  if (p.m_s < 0.0 || p.rho1 < 0.0 || p.rho2 < 0.0) {
    throw std::invalid_argument("step-count parameters must be >= 0");
  }
  if (p.t_max < 1) throw std::invalid_argument("t_max must be >= 1");
}

struct EnvState {
  int t = 0;       // day index
  int c = 0;       // true context (hidden from the agent)
  double x = 0.0;  // noisy context feature
  double p = 0.5;  // posterior probability of context 1
  int l = 0;       // inferred context, 1 iff p > 0.5
  double h = 0.0;  // habituation level
  double d = 0.0;  // disengagement risk
  double s = 0.0;  // step count realized entering this day
};

struct ContextDraw {
  int c;
  double x;
};

struct ContextBelief {
  double p;
  int l;
};

inline ContextDraw sample_context(Rng& rng, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  const int c = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  const double x = std::normal_distribution<double>(static_cast<double>(c), sigma)(rng);
  return {c, x};
}

// Exact Bayes posterior of context 1 under equal priors and N(c, sigma^2)
// likelihoods; the two-Gaussian ratio collapses to a logistic in x.
inline ContextBelief infer_context(double x, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  const double z = (2.0 * x - 1.0) / (2.0 * sigma * sigma);
  const double p = std::clamp(1.0 / (1.0 + std::exp(-z)), 0.0, 1.0);
  return {p, p > 0.5 ? 1 : 0};
}

inline double update_habituation(double h, Action a, double delta_h, double epsilon_h) {
  const double next = a.is_message() ? std::min(1.0, h + epsilon_h) : (1.0 - delta_h) * h;
  return std::clamp(next, 0.0, 1.0);
}

inline double update_disengagement(double d, Action a, int c, double delta_d, double epsilon_d) {
  if (!a.is_message()) return std::clamp(d, 0.0, 1.0);
  const bool well_chosen = a.value() == 1 || a.value() == c + 2;
  const double next = well_chosen ? (1.0 - delta_d) * d : std::min(1.0, d + epsilon_d);
  return std::clamp(next, 0.0, 1.0);
}

inline double step_count(double h_next, Action a, int c, const EnvParams& params) {
  if (a.value() == 1) return params.m_s + (1.0 - h_next) * params.rho1;
  if (a.value() == c + 2) return params.m_s + (1.0 - h_next) * params.rho2;
  return params.m_s;
}

inline bool terminated(const EnvState& state, const EnvParams& params) {
  return state.d > params.d_threshold || state.t >= params.t_max;
}

// Day 0: fresh context, neutral habituation/disengagement, no steps yet.
inline EnvState reset_env(Rng& rng, const EnvParams& params) {
  validate(params);
  const auto [c, x] = sample_context(rng, params.sigma);
  const auto [p, l] = infer_context(x, params.sigma);
  EnvState state;
  state.t = 0;
  state.c = c;
  state.x = x;
  state.p = p;
  state.l = l;
  return state;
}

struct StepResult {
  EnvState next;
  double reward;
  bool done;
};

// One day of behavioral dynamics under action `a`. Tailoring is judged
// against the context the user was in when the message arrived (state.c);
// the freshly drawn context is what the next decision faces.
inline StepResult env_step(const EnvState& state, Action a, Rng& rng, const EnvParams& params) {
  validate(params);
  if (terminated(state, params)) {
    throw std::logic_error("env_step called on a terminated episode");
  }
  const auto [c, x] = sample_context(rng, params.sigma);
  const auto [p, l] = infer_context(x, params.sigma);
  EnvState next;
  next.t = state.t + 1;
  next.c = c;
  next.x = x;
  next.p = p;
  next.l = l;
  next.h = update_habituation(state.h, a, params.delta_h, params.epsilon_h);
  next.d = update_disengagement(state.d, a, state.c, params.delta_d, params.epsilon_d);
  next.s = step_count(next.h, a, state.c, params);
  const bool done = next.d > params.d_threshold || next.t >= params.t_max;
  return {next, next.s, done};
}

}  // namespace jitai
