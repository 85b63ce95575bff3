#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "textlime/execution.hpp"
#include "textlime/kernels.hpp"
#include "textlime/models.hpp"
#include "textlime/sampler.hpp"
#include "textlime/tfidf.hpp"

namespace textlime {

struct RidgeFit {
  Eigen::VectorXd beta;       // intercept first
  bool minimum_norm = false;  // rank-deficient system, least-norm solution
};

/// argmin_beta sum_i w_i (y_i - beta . z_i)^2 + ridge |beta|^2 through the
/// normal equations (Z^T W Z + ridge I) beta = Z^T W y. Z already carries the
/// leading column of ones. Throws std::invalid_argument("degenerate weights")
/// when every weight is zero.
RidgeFit fit_weighted_ridge(const Eigen::MatrixXd& Z, const Eigen::VectorXd& weights, const Eigen::VectorXd& y,
                            double ridge);

/// Same fit from accumulated normal equations. On rank deficiency (ridge = 0
/// only) the minimum-norm solution is recovered from the batch.
RidgeFit solve_normal_equations(const NormalEquations& system, double ridge, const SampleBatch& batch,
                                std::span<const double> y);

// Dense n x (d + 1) design with the ones column.
Eigen::MatrixXd design_matrix(const SampleBatch& batch);

struct ExplainConfig {
  std::size_t n = kDefaultSamples;
  double nu = kDefaultBandwidth;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  Execution exec = Execution::parallel;
};

struct ExplanationMeta {
  std::size_t n = 0;
  double nu = 0.0;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  bool minimum_norm = false;
  bool operator==(const ExplanationMeta&) const = default;
};

/// LIME's empirical explanation beta_hat_n.
struct Explanation {
  std::vector<std::string> words;
  double intercept = 0.0;
  std::vector<double> coefficients;
  ExplanationMeta meta;

  std::size_t d() const { return coefficients.size(); }
  bool operator==(const Explanation&) const = default;
};

Explanation explain(const Model& model, const Document& xi, const IdfTable& idf, const ExplainConfig& config);
Explanation explain(const Model& model, const LocalEmbedding& embedding, const ExplainConfig& config);

// Fit on an existing batch, e.g. to share samples between models.
Explanation explain_batch(const Model& model, const LocalEmbedding& embedding, const SampleBatch& batch,
                          double ridge, Execution exec = Execution::parallel);

}  // namespace textlime
