#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "jitai/env.hpp"

using namespace jitai;

namespace {

// Independent Bayes oracle: evaluate both Gaussian likelihoods and normalize,
// shifted by the max exponent to stay finite.
double bayes_posterior(double x, double sigma) {
  const double e1 = -(x - 1.0) * (x - 1.0) / (2.0 * sigma * sigma);
  const double e0 = -x * x / (2.0 * sigma * sigma);
  const double m = std::max(e1, e0);
  const double l1 = std::exp(e1 - m);
  const double l0 = std::exp(e0 - m);
  return l1 / (l1 + l0);
}

}  // namespace

TEST_CASE("action values are validated", "[env]") {
  CHECK(Action(0).value() == 0);
  CHECK(Action(3).value() == 3);
  CHECK_FALSE(Action(0).is_message());
  CHECK(Action(1).is_message());
  CHECK_THROWS_AS(Action(-1), std::invalid_argument);
  CHECK_THROWS_AS(Action(4), std::invalid_argument);
}

TEST_CASE("params are validated", "[env]") {
  EnvParams p;
  CHECK_NOTHROW(validate(p));
  p.sigma = 0.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = EnvParams{};
  p.delta_h = 1.5;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = EnvParams{};
  p.rho1 = -1.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = EnvParams{};
  p.t_max = 0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("sample_context is seeded-deterministic", "[env]") {
  Rng a = make_stream(7, Stream::Env);
  Rng b = make_stream(7, Stream::Env);
  for (int i = 0; i < 100; ++i) {
    const auto [ca, xa] = sample_context(a, 0.4);
    const auto [cb, xb] = sample_context(b, 0.4);
    CHECK(ca == cb);
    CHECK(xa == xb);
  }
  CHECK_THROWS_AS(sample_context(a, 0.0), std::invalid_argument);
}

TEST_CASE("sample_context matches its distribution", "[env]") {
  Rng rng = make_stream(11, Stream::Env);
  const int n = 100000;
  long ones = 0;
  double sum_x1 = 0.0;
  long n1 = 0;
  for (int i = 0; i < n; ++i) {
    const auto [c, x] = sample_context(rng, 0.4);
    ones += c;
    if (c == 1) {
      sum_x1 += x;
      ++n1;
    }
  }
  CHECK(std::abs(static_cast<double>(ones) / n - 0.5) < 0.005);
  const double mean_x1 = sum_x1 / static_cast<double>(n1);
  CHECK(std::abs(mean_x1 - 1.0) < 3.0 * 0.4 / std::sqrt(static_cast<double>(n1)));
}

TEST_CASE("infer_context known values", "[env]") {
  const auto mid = infer_context(0.5, 0.4);
  CHECK(mid.p == 0.5);
  CHECK(mid.l == 0);  // strict inequality at the tie

  const auto hi = infer_context(1.0, 0.4);
  CHECK(hi.p == Catch::Approx(1.0 / (1.0 + std::exp(-3.125))).epsilon(1e-12));
  CHECK(hi.p == Catch::Approx(0.958).margin(5e-4));
  CHECK(hi.l == 1);

  const auto lo = infer_context(0.0, 0.4);
  CHECK(lo.p == Catch::Approx(1.0 - hi.p).margin(1e-12));
  CHECK(lo.l == 0);

  CHECK_THROWS_AS(infer_context(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("infer_context equals the two-Gaussian Bayes ratio", "[env]") {
  Rng rng = make_stream(3, Stream::Oracle);
  std::uniform_real_distribution<double> x_dist(-3.0, 4.0);
  std::uniform_real_distribution<double> sigma_dist(0.1, 2.5);
  for (int i = 0; i < 10000; ++i) {
    const double x = x_dist(rng);
    const double sigma = sigma_dist(rng);
    const auto [p, l] = infer_context(x, sigma);
    CHECK(std::abs(p - bayes_posterior(x, sigma)) <= 1e-12);
    CHECK(l == (p > 0.5 ? 1 : 0));
  }
}

TEST_CASE("habituation update", "[env]") {
  CHECK(update_habituation(0.5, Action(0), 0.1, 0.05) == Catch::Approx(0.45));
  CHECK(update_habituation(0.98, Action(1), 0.1, 0.05) == 1.0);
  CHECK(update_habituation(0.0, Action(0), 0.1, 0.05) == 0.0);
  // monotone: messages never decrease h, silence never increases it
  for (double h : {0.0, 0.3, 0.9, 1.0}) {
    for (int a = 1; a < kNumActions; ++a) {
      CHECK(update_habituation(h, Action(a), 0.1, 0.05) >= h);
    }
    CHECK(update_habituation(h, Action(0), 0.1, 0.05) <= h);
  }
}

TEST_CASE("disengagement update", "[env]") {
  CHECK(update_disengagement(0.5, Action(2), 0, 0.1, 0.4) == Catch::Approx(0.45));
  CHECK(update_disengagement(0.5, Action(2), 1, 0.1, 0.4) == Catch::Approx(0.9));
  CHECK(update_disengagement(0.7, Action(0), 0, 0.1, 0.4) == 0.7);
  CHECK(update_disengagement(0.5, Action(1), 1, 0.1, 0.4) == Catch::Approx(0.45));
  CHECK(update_disengagement(0.9, Action(3), 0, 0.1, 0.4) == 1.0);  // clamp
}

TEST_CASE("step count", "[env]") {
  const EnvParams p;
  CHECK(step_count(0.5, Action(1), 0, p) == Catch::Approx(25.1));
  CHECK(step_count(0.0, Action(3), 1, p) == Catch::Approx(200.1));
  CHECK(step_count(0.3, Action(0), 0, p) == Catch::Approx(0.1));
  CHECK(step_count(0.3, Action(2), 1, p) == Catch::Approx(0.1));  // mis-tailored
}

TEST_CASE("reset_env starts a fresh day-zero state", "[env]") {
  Rng rng = make_stream(5, Stream::Env);
  const EnvParams params;
  const auto s = reset_env(rng, params);
  CHECK(s.t == 0);
  CHECK((s.c == 0 || s.c == 1));
  CHECK((s.p >= 0.0 && s.p <= 1.0));
  CHECK(s.l == (s.p > 0.5 ? 1 : 0));
  CHECK(s.h == 0.0);
  CHECK(s.d == 0.0);
  CHECK(s.s == 0.0);
}

TEST_CASE("env_step follows the update equations", "[env]") {
  const EnvParams params;
  Rng rng = make_stream(9, Stream::Env);
  Rng shadow = make_stream(9, Stream::Env);
  EnvState state = reset_env(rng, params);
  sample_context(shadow, params.sigma);  // mirror the reset draw
  const int actions[] = {1, 0, 2, 3, 0, 1, 2, 0, 3, 1};
  for (int a : actions) {
    const Action act(a);
    const int c_prev = state.c;
    const double h_prev = state.h;
    const double d_prev = state.d;
    const auto [next, reward, done] = env_step(state, act, rng, params);

    const auto [c, x] = sample_context(shadow, params.sigma);
    CHECK(next.c == c);
    CHECK(next.x == x);
    const double expected_h =
        a > 0 ? std::min(1.0, h_prev + params.epsilon_h) : (1.0 - params.delta_h) * h_prev;
    CHECK(next.h == Catch::Approx(expected_h).margin(1e-15));
    double expected_d = d_prev;
    if (a > 0) {
      expected_d = (a == 1 || a == c_prev + 2) ? (1.0 - params.delta_d) * d_prev
                                               : std::min(1.0, d_prev + params.epsilon_d);
    }
    CHECK(next.d == Catch::Approx(expected_d).margin(1e-15));
    double expected_s = params.m_s;
    if (a == 1) expected_s += (1.0 - next.h) * params.rho1;
    if (a == c_prev + 2) expected_s += (1.0 - next.h) * params.rho2;
    CHECK(reward == Catch::Approx(expected_s).margin(1e-12));
    CHECK(reward == next.s);
    CHECK(next.t == state.t + 1);
    CHECK(done == (next.d > params.d_threshold || next.t >= params.t_max));
    state = next;
  }
}

TEST_CASE("env_step is bit-identical across reruns", "[env]") {
  const EnvParams params;
  std::vector<EnvState> first;
  for (int run = 0; run < 2; ++run) {
    Rng rng = make_stream(21, Stream::Env);
    EnvState state = reset_env(rng, params);
    std::vector<EnvState> states;
    for (int i = 0; i < 50; ++i) {
      auto [next, reward, done] = env_step(state, Action(i % 4), rng, params);
      states.push_back(next);
      state = next;
      if (done) break;
    }
    if (run == 0) {
      first = states;
    } else {
      REQUIRE(states.size() == first.size());
      for (std::size_t i = 0; i < states.size(); ++i) {
        CHECK(states[i].x == first[i].x);
        CHECK(states[i].h == first[i].h);
        CHECK(states[i].d == first[i].d);
        CHECK(states[i].s == first[i].s);
      }
    }
  }
}

TEST_CASE("default threshold never terminates on disengagement", "[env]") {
  const EnvParams params;  // d_threshold = 1.1 > 1, d is clamped at 1
  Rng rng = make_stream(33, Stream::Env);
  EnvState state = reset_env(rng, params);
  int steps = 0;
  bool done = false;
  while (!done) {
    // worst case for disengagement: always mis-tailorable messages
    auto result = env_step(state, Action(state.c == 0 ? 3 : 2), rng, params);
    state = result.next;
    done = result.done;
    ++steps;
    CHECK(state.d <= 1.0);
  }
  CHECK(steps == params.t_max);
}

TEST_CASE("horizon and usage errors", "[env]") {
  EnvParams params;
  params.t_max = 5;
  Rng rng = make_stream(2, Stream::Env);
  EnvState state = reset_env(rng, params);
  state.t = params.t_max - 1;
  const auto [next, reward, done] = env_step(state, Action(0), rng, params);
  CHECK(done);
  CHECK(next.t == params.t_max);
  CHECK_THROWS_AS(env_step(next, Action(0), rng, params), std::logic_error);
}

TEST_CASE("state variables stay in range under random play", "[env]") {
  const EnvParams params;
  Rng rng = make_stream(17, Stream::Env);
  Rng actions = make_stream(18, Stream::Walk);
  std::uniform_int_distribution<int> pick(0, 3);
  EnvState state = reset_env(rng, params);
  for (int i = 0; i < params.t_max - 1; ++i) {
    auto [next, reward, done] = env_step(state, Action(pick(actions)), rng, params);
    CHECK((next.h >= 0.0 && next.h <= 1.0));
    CHECK((next.d >= 0.0 && next.d <= 1.0));
    CHECK((next.p >= 0.0 && next.p <= 1.0));
    CHECK(next.s >= 0.0);
    state = next;
    if (done) break;
  }
}
