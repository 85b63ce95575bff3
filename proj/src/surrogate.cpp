#include "textlime/surrogate.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace textlime {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;

// Minimum-norm solution of [sqrt(W) Z; sqrt(ridge) I] beta = [sqrt(W) y; 0].
Eigen::VectorXd least_norm(const Eigen::MatrixXd& Z, const Eigen::VectorXd& weights, const Eigen::VectorXd& y,
                           double ridge) {
  const Eigen::Index n = Z.rows();
  const Eigen::Index p = Z.cols();
  const Eigen::VectorXd root = weights.cwiseSqrt();
  Eigen::MatrixXd A(n + (ridge > 0.0 ? p : 0), p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(A.rows());
  A.topRows(n) = root.asDiagonal() * Z;
  b.head(n) = root.cwiseProduct(y);
  if (ridge > 0.0) A.bottomRows(p) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(p, p);
  return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(A).solve(b);
}

RidgeFit solve_system(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, double ridge,
                      const std::function<Eigen::VectorXd()>& fallback) {
  Eigen::MatrixXd lhs = gram;
  lhs.diagonal().array() += ridge;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  const bool well_posed = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                          pivots.minCoeff() > kMinReciprocalCondition * pivots.maxCoeff() &&
                          ldlt.rcond() >= kMinReciprocalCondition;
  if (well_posed) {
    return {ldlt.solve(rhs), false};
  }
  return {fallback(), true};
}

void check_ridge(double ridge) {
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw std::invalid_argument("ridge parameter must be finite and >= 0");
}

}  // namespace

RidgeFit fit_weighted_ridge(const Eigen::MatrixXd& Z, const Eigen::VectorXd& weights, const Eigen::VectorXd& y,
                            double ridge) {
  if (Z.rows() == 0 || Z.cols() == 0) throw std::invalid_argument("empty design matrix");
  if (weights.size() != Z.rows() || y.size() != Z.rows()) throw std::invalid_argument("design, weights and responses differ in length");
  check_ridge(ridge);
  bool any_positive = false;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i))) throw std::invalid_argument("weights must be finite and >= 0");
    any_positive = any_positive || weights(i) > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("degenerate weights");

  const Eigen::MatrixXd weighted = weights.asDiagonal() * Z;
  const Eigen::MatrixXd gram = Z.transpose() * weighted;
  const Eigen::VectorXd rhs = weighted.transpose() * y;
  return solve_system(gram, rhs, ridge, [&] { return least_norm(Z, weights, y, ridge); });
}

Eigen::MatrixXd design_matrix(const SampleBatch& batch) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto d = static_cast<Eigen::Index>(batch.d());
  Eigen::MatrixXd Z(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    Z(i, 0) = 1.0;
    const auto z = batch.z(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < d; ++j) Z(i, j + 1) = z[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  }
  return Z;
}

RidgeFit solve_normal_equations(const NormalEquations& system, double ridge, const SampleBatch& batch,
                                std::span<const double> y) {
  check_ridge(ridge);
  if (!(system.weight_sum > 0.0)) throw std::invalid_argument("degenerate weights");
  return solve_system(system.gram, system.rhs, ridge, [&] {
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(batch.weights().data(), static_cast<Eigen::Index>(batch.size()));
    const Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return least_norm(design_matrix(batch), w, yy, ridge);
  });
}

Explanation explain_batch(const Model& model, const LocalEmbedding& embedding, const SampleBatch& batch,
                          double ridge, Execution exec) {
  const std::vector<double> y = evaluate_responses(model, embedding, batch, exec);
  const NormalEquations system = accumulate_normal_equations(batch, y, exec);
  const RidgeFit fit = solve_normal_equations(system, ridge, batch, y);

  Explanation out;
  out.words = embedding.dictionary().words;
  out.intercept = fit.beta(0);
  out.coefficients.resize(embedding.d());
  for (std::size_t j = 0; j < embedding.d(); ++j) out.coefficients[j] = fit.beta(static_cast<Eigen::Index>(j + 1));
  out.meta = {batch.size(), batch.nu(), ridge, batch.seed(), fit.minimum_norm};
  return out;
}

Explanation explain(const Model& model, const LocalEmbedding& embedding, const ExplainConfig& config) {
  if (embedding.d() == 0) throw std::invalid_argument("empty local dictionary");
  if (model.min_dictionary_size() > embedding.d()) throw std::invalid_argument("model refers to words outside the local dictionary");
  const SampleBatch batch = sample_batch(embedding.d(), config.n, config.nu, config.seed, config.exec);
  return explain_batch(model, embedding, batch, config.ridge, config.exec);
}

Explanation explain(const Model& model, const Document& xi, const IdfTable& idf, const ExplainConfig& config) {
  return explain(model, LocalEmbedding(xi, idf), config);
}

}  // namespace textlime
