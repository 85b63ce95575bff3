#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "textlime/execution.hpp"
#include "textlime/kernels.hpp"
#include "textlime/theory.hpp"
#include "textlime/tfidf.hpp"

namespace textlime {

/// omega_k = m_k^2 v_k^2 / sum_l m_l^2 v_l^2, the share of the squared
/// TF-IDF mass carried by word k. Throws on an empty document.
std::vector<double> omega_weights(const LocalEmbedding& embedding);
std::vector<double> omega_weights(const Document& doc, const IdfTable& idf);

// E[H_S | S avoids j]      = (1 - omega_j) (d + 1) / (3 (d - 1))
// E[H_S | S avoids j, k]   = (1 - omega_j - omega_k) (d + 1) / (4 (d - 2))
double expected_H(std::span<const double> omega, std::size_t j);
double expected_H(std::span<const double> omega, std::size_t j, std::size_t k);

enum class ETermMethod { exact, approx, mc };

inline constexpr std::size_t kMaxExactETermWords = 20;

struct ETermOptions {
  std::size_t n_mc = 1'000'000;
  std::uint64_t seed = 0;
  Execution exec = Execution::parallel;
};

struct ETerm {
  double value = 0.0;
  double stderr_ = 0.0;  // nonzero for mc only
};

/// E_j = E[(1 - H_S)^(-1/2) | S avoids j], or E_{j,k} when k is given.
///   exact:  enumeration of every admissible subset (d <= 20)
///   approx: 1 / sqrt(1 - E[H_S | ...])
///   mc:     conditional Monte Carlo
ETerm e_term(std::span<const double> omega, std::size_t j, std::optional<std::size_t> k, ETermMethod method,
             const ETermOptions& options = {});

enum class LinearMode {
  simplified,   // beta_j = kappa lambda_j phi_j
  full,         // per-coordinate large-d formulas with E-terms
  exact_limit,  // Sigma_inf^{-1} Gamma_inf with E-terms, nu = +infinity
};

struct LinearTheoryOptions {
  LinearMode mode = LinearMode::simplified;
  // Defaults to exact enumeration for d <= 20 and Monte Carlo above.
  std::optional<ETermMethod> method;
  ETermOptions e_terms;
};

// Large-d values of E_j and E_{j,k} for vanishing omega: (1 - 1/3)^(-1/2) and
// (1 - 1/4)^(-1/2).
double limiting_e_single();
double limiting_e_pair();

// kappa = 3 E_j - 2 E_{j,k} with the limiting E-terms, about 1.36.
double linear_simplified_constant();
// Intercept factor 2 E_j - 2 E_{j,k}, about 0.14.
double linear_simplified_intercept_constant();

/// beta^f for f = sum_j lambda_j phi_j in the large-bandwidth regime.
/// Requires d >= 3.
TheoryExplanation beta_linear(std::span<const double> lambda, const LocalEmbedding& embedding,
                              const LinearTheoryOptions& options = {});

}  // namespace textlime
