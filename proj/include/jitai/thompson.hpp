#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

#include <json.hpp>

#include "jitai/env.hpp"
#include "jitai/errors.hpp"
#include "jitai/rng.hpp"

namespace jitai {

struct TSConfig {
  int feature_dim = 4;
  double prior_mean_scale = 0.0;    // mu_0 = scale * 1
  double prior_cov_scale = 100.0;   // Sigma_0 = scale * I
  double reward_noise_var = 625.0;  // sigma_Y^2
};

inline void validate(const TSConfig& cfg) {
  if (cfg.feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
  if (!(cfg.prior_cov_scale > 0.0)) throw std::invalid_argument("prior_cov_scale must be > 0");
  if (!(cfg.reward_noise_var > 0.0)) throw std::invalid_argument("reward_noise_var must be > 0");
}

using FeatureVector = Eigen::VectorXd;

// Per-arm Gaussian belief over reward-model weights.
struct ArmPosterior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov;
};

using ArmSet = std::array<ArmPosterior, kNumActions>;

// Agent-visible features: bias, P(context 1), habituation, disengagement.
// The true context and the walk state stay hidden.
inline FeatureVector featurize(const EnvState& state) {
  Eigen::VectorXd v(4);
  v << 1.0, state.p, state.h, state.d;
  return v;
}

inline ArmPosterior make_prior(const TSConfig& cfg) {
  validate(cfg);
  return {Eigen::VectorXd::Constant(cfg.feature_dim, cfg.prior_mean_scale),
          cfg.prior_cov_scale * Eigen::MatrixXd::Identity(cfg.feature_dim, cfg.feature_dim)};
}

inline ArmSet make_priors(const TSConfig& cfg) {
  ArmSet arms;
  for (auto& arm : arms) arm = make_prior(cfg);
  return arms;
}

namespace detail {

inline Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance is not positive definite");
  }
  return llt;
}

}  // namespace detail

inline Eigen::VectorXd sample_weights(const ArmPosterior& post, Rng& rng) {
  const auto llt = detail::factorize(post.cov);
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  Eigen::VectorXd z(post.mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = standard_normal(rng);
  return post.mu + llt.matrixL() * z;
}

// First index wins ties.
inline int best_arm(const std::array<double, kNumActions>& values) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

// Thompson draw: sample weights per arm, play the largest sampled mean reward.
inline Action select_action(const ArmSet& posteriors, const FeatureVector& v, Rng& rng) {
  if (!v.allFinite()) throw std::invalid_argument("feature vector must be finite");
  std::array<double, kNumActions> values{};
  for (int a = 0; a < kNumActions; ++a) {
    if (posteriors[a].mu.size() != v.size()) {
      throw std::invalid_argument("feature dimension mismatch");
    }
    values[a] = sample_weights(posteriors[a], rng).dot(v);
  }
  return Action(best_arm(values));
}

// Conjugate Gaussian update for one observed (features, reward) pair:
//   Sigma' = s2 (v v^T + s2 Sigma^-1)^-1
//   mu'    = Sigma' (r v / s2 + Sigma^-1 mu)
// computed through Cholesky solves, never explicit inverses, and
// re-symmetrized to keep floating-point drift out of the covariance.
inline ArmPosterior update_posterior(const ArmPosterior& post, const FeatureVector& v, double r,
                                     double noise_var) {
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise_var must be > 0");
  if (v.size() != post.mu.size()) throw std::invalid_argument("feature dimension mismatch");
  if (!v.allFinite()) throw std::invalid_argument("feature vector must be finite");
  const Eigen::Index dim = post.mu.size();
  const auto prior_llt = detail::factorize(post.cov);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd system = v * v.transpose() + noise_var * prior_llt.solve(identity);
  Eigen::LLT<Eigen::MatrixXd> system_llt(system);
  if (system_llt.info() != Eigen::Success) {
    throw NumericalError("posterior update produced a non-PD system");
  }
  ArmPosterior next;
  next.cov = noise_var * system_llt.solve(identity);
  next.cov = ((next.cov + next.cov.transpose()) / 2.0).eval();
  next.mu = system_llt.solve(r * v + noise_var * prior_llt.solve(post.mu));
  return next;
}

// Snapshot shape: {"feature_dim": d, "arms": [{"mu": [...], "cov": [row-major ...]}].
inline nlohmann::json posteriors_to_json(const ArmSet& arms) {
  nlohmann::json out;
  out["feature_dim"] = arms[0].mu.size();
  out["arms"] = nlohmann::json::array();
  for (const auto& arm : arms) {
    nlohmann::json entry;
    entry["mu"] = std::vector<double>(arm.mu.data(), arm.mu.data() + arm.mu.size());
    std::vector<double> cov;
    cov.reserve(static_cast<std::size_t>(arm.cov.size()));
    for (Eigen::Index i = 0; i < arm.cov.rows(); ++i) {
      for (Eigen::Index j = 0; j < arm.cov.cols(); ++j) cov.push_back(arm.cov(i, j));
    }
    entry["cov"] = cov;
    out["arms"].push_back(std::move(entry));
  }
  return out;
}

inline ArmSet posteriors_from_json(const nlohmann::json& j) {
  const auto dim = j.at("feature_dim").get<Eigen::Index>();
  const auto& arms_json = j.at("arms");
  if (!arms_json.is_array() || arms_json.size() != kNumActions) {
    throw ConfigError("posterior snapshot must list exactly 4 arms");
  }
  ArmSet arms;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const auto mu = arms_json[a].at("mu").get<std::vector<double>>();
    const auto cov = arms_json[a].at("cov").get<std::vector<double>>();
    if (mu.size() != static_cast<std::size_t>(dim) ||
        cov.size() != static_cast<std::size_t>(dim * dim)) {
      throw ConfigError("posterior snapshot has inconsistent dimensions");
    }
    arms[a].mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), dim);
    arms[a].cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cov.data(), dim, dim);
  }
  return arms;
}

}  // namespace jitai
