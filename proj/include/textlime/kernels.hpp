#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "textlime/execution.hpp"
#include "textlime/models.hpp"
#include "textlime/sampler.hpp"
#include "textlime/tfidf.hpp"

namespace textlime {

// Hot loops of the library, each in two flavours. The serial variants are
// straightforward single loops kept as the reference; the parallel variants
// split the index range into fixed blocks, reduce every block on its own and
// then combine the block results in block order. The parallel results are
// therefore identical for any thread count, and agree with the serial
// reference up to floating-point reassociation.

inline constexpr std::size_t kReductionBlock = 256;

/// y_i = f(phi(x_i)) for every sample, phi taken on the perturbed document.
std::vector<double> evaluate_responses(const Model& model, const LocalEmbedding& embedding,
                                       const SampleBatch& batch, Execution exec = Execution::parallel);

/// Z^T W Z and Z^T W y for the design with a leading column of ones.
struct NormalEquations {
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  double weight_sum = 0.0;
};

NormalEquations accumulate_normal_equations(const SampleBatch& batch, std::span<const double> y,
                                            Execution exec = Execution::parallel);

/// Per-sample linear statistics built from u_i = factor_i * y_i:
///   L_0 = a0 u + b0 S,   L_j = a u + b u z_j + c S,   S = sum_k u z_k.
/// The factor is the sample weight when `weighted`, 1 otherwise.
struct MomentProjection {
  double intercept_u = 0.0;
  double intercept_sum = 0.0;
  double coef_u = 0.0;
  double coef_self = 0.0;
  double coef_sum = 0.0;
  bool weighted = true;
};

/// Sample means of L_0..L_d and their standard errors (std / sqrt(n)).
struct ProjectedMoments {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

ProjectedMoments project_moments(const SampleBatch& batch, std::span<const double> y,
                                 const MomentProjection& projection, Execution exec = Execution::parallel);

/// E[g(S) | S avoids `excluded`] under the LIME removal law (s uniform on
/// {1..d}, S a uniform s-subset), by enumeration of every admissible subset.
enum class SubsetStatistic {
  removed_mass,     // H_S = sum_{k in S} omega_k
  renormalization,  // (1 - H_S)^(-1/2)
};

double enumerate_subset_expectation(std::span<const double> omega, std::span<const std::size_t> excluded,
                                    SubsetStatistic statistic, Execution exec = Execution::parallel);

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Same expectation by conditional Monte Carlo: s is drawn from its law given
/// that S avoids `excluded`, then S uniformly among the remaining words.
MonteCarloEstimate sample_subset_expectation(std::span<const double> omega, std::span<const std::size_t> excluded,
                                             SubsetStatistic statistic, std::size_t n, std::uint64_t seed,
                                             Execution exec = Execution::parallel);

}  // namespace textlime
