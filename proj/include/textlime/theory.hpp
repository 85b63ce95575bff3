#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "textlime/execution.hpp"
#include "textlime/models.hpp"
#include "textlime/tfidf.hpp"

namespace textlime {

/// Raised by closed-form paths outside their domain (d < 2 for the sigma
/// formulas, d < 3 for the linear-model formulas).
class ClosedFormDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Scalar-generic closed forms. `Real` is double for every library path; the
// same code instantiated with a wider floating type serves as a
// high-precision check where the double evaluation is ill-conditioned.

namespace closed_form {

template <class Real>
class Neumaier {
 public:
  void add(const Real& x) {
    using std::abs;
    const Real t = sum_ + x;
    if (abs(sum_) >= abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = Real(0);
  Real comp_ = Real(0);
};

// nu = +infinity is allowed and gives psi = 1.
template <class Real>
Real psi(const Real& t, const Real& nu) {
  using std::exp;
  using std::sqrt;
  if (!(nu > Real(0))) throw std::invalid_argument("bandwidth must be positive");
  if (nu > Real(std::numeric_limits<double>::max())) return Real(1);
  const Real r = Real(1) - sqrt(Real(1) - t);
  return exp(-r * r / (Real(2) * nu * nu));
}

template <class Real>
std::vector<Real> psi_table(std::size_t d, const Real& nu) {
  std::vector<Real> out(d + 1);
  for (std::size_t s = 1; s <= d; ++s) out[s] = psi(Real(s) / Real(d), nu);
  return out;
}

// (1/d) sum_{s=1}^{d} prod_{k=0}^{p-1} (d-s-k)/(d-k) psi(s/d)
template <class Real>
Real alpha(std::size_t p, std::size_t d, const std::vector<Real>& psi_values) {
  if (d == 0) throw std::invalid_argument("alpha requires d >= 1");
  if (p > d) throw std::invalid_argument("alpha requires p <= d");
  Neumaier<Real> acc;
  for (std::size_t s = 1; s + p <= d; ++s) {
    Real prod(1);
    for (std::size_t k = 0; k < p; ++k) prod *= Real(d - s - k) / Real(d - k);
    acc.add(prod * psi_values[s]);
  }
  return acc.value() / Real(d);
}

template <class Real>
struct SigmaSet {
  std::size_t d = 0;
  Real nu = Real(0);
  Real alpha0 = Real(0);
  Real alpha1 = Real(0);
  Real alpha2 = Real(0);
  Real alpha_gap = Real(0);  // alpha1 - alpha2
  Real c = Real(0);
  Real sigma0 = Real(0);
  Real sigma1 = Real(0);
  Real sigma2 = Real(0);
  Real sigma3 = Real(0);
};

template <class Real>
SigmaSet<Real> sigma_set(std::size_t d, const Real& nu) {
  if (d < 2) throw ClosedFormDomainError("out of closed-form domain: the sigma coefficients require d >= 2");
  const std::vector<Real> ps = psi_table(d, nu);
  SigmaSet<Real> out;
  out.d = d;
  out.nu = nu;
  out.alpha0 = alpha<Real>(0, d, ps);
  out.alpha1 = alpha<Real>(1, d, ps);
  out.alpha2 = alpha<Real>(2, d, ps);

  // alpha1 - alpha2 = (1/d) sum_s (1 - s/d) s/(d-1) psi(s/d), free of cancellation.
  Neumaier<Real> gap;
  for (std::size_t s = 1; s < d; ++s) gap.add(Real(d - s) / Real(d) * Real(s) / Real(d - 1) * ps[s]);
  out.alpha_gap = gap.value() / Real(d);

  // c_d = (d-1) a0 a2 - d a1^2 + a0 a1, rewritten as the nonnegative pair sum
  // (1/d) sum_{s<s'} psi(s/d) psi(s'/d) (s/d - s'/d)^2.
  Neumaier<Real> c;
  for (std::size_t s = 1; s <= d; ++s) {
    for (std::size_t t = s + 1; t <= d; ++t) {
      const Real gap_st = Real(t - s) / Real(d);
      c.add(ps[s] * ps[t] * gap_st * gap_st);
    }
  }
  out.c = c.value() / Real(d);

  const Real dd(d);
  out.sigma0 = (dd - Real(1)) * out.alpha2 + out.alpha1;
  out.sigma1 = -out.alpha1;
  out.sigma3 = (out.alpha1 * out.alpha1 - out.alpha0 * out.alpha2) / out.alpha_gap;
  // (d-2) a0 a2 - (d-1) a1^2 + a0 a1 = c_d + (a1^2 - a0 a2)
  out.sigma2 = (out.c + (out.alpha1 * out.alpha1 - out.alpha0 * out.alpha2)) / out.alpha_gap;
  return out;
}

}  // namespace closed_form

// ---------------------------------------------------------------------------

double alpha(std::size_t p, std::size_t d, double nu);

// Large-bandwidth limit (d - p) / ((p + 1) d), which is also the upper bound;
// the lower bound is exp(-1/(2 nu^2)) times it.
double alpha_limit(std::size_t p, std::size_t d);

struct AlphaBounds {
  double lower = 0.0;
  double upper = 0.0;
};

AlphaBounds alpha_bounds(std::size_t p, std::size_t d, double nu);

struct AlphaCoefficients {
  std::size_t d = 0;
  double nu = 0.0;
  std::vector<double> values;  // alpha_0 .. alpha_{p_max}
};

AlphaCoefficients alpha_coefficients(std::size_t d, double nu, std::size_t p_max);

using SigmaSet = closed_form::SigmaSet<double>;

SigmaSet sigma_set(std::size_t d, double nu);

// Sigma: alpha0 at (0,0), alpha1 on the first row, first column and diagonal,
// alpha2 elsewhere.
Eigen::MatrixXd sigma_matrix(std::size_t d, double nu);
Eigen::MatrixXd sigma_inverse(std::size_t d, double nu);
Eigen::MatrixXd sigma_inverse(const SigmaSet& sigma);

// Lower bounds on alpha1 - alpha2 and on c_d, and the upper bound on the
// operator norm of Sigma^{-1}.
double alpha_gap_lower_bound(double nu);
double normalization_lower_bound(double nu);
double sigma_inverse_norm_bound(std::size_t d, double nu);

/// Gamma^f for f = prod_{j in J} 1{phi_j > 0}: alpha_p at 0 and at the words
/// of J, alpha_{p+1} at the other words.
Eigen::VectorXd gamma_indicator_product(std::span<const std::size_t> indices, std::size_t d, double nu);

enum class Provenance { exact_closed_form, large_bandwidth_approx, monte_carlo };

std::string_view provenance_name(Provenance provenance);

/// beta^f: intercept followed by one coefficient per local word.
struct TheoryExplanation {
  std::vector<std::string> words;
  double intercept = 0.0;
  std::vector<double> coefficients;
  Provenance provenance = Provenance::exact_closed_form;
  // Monte Carlo only.
  std::optional<double> intercept_stderr;
  std::vector<double> coefficient_stderr;
  std::string note;

  std::size_t d() const { return coefficients.size(); }
  TheoryExplanation& with_words(const LocalDictionary& local);
};

// a * x + b * y; provenance is the weaker of the two and standard errors add
// in quadrature.
TheoryExplanation linear_combination(double a, const TheoryExplanation& x, double b, const TheoryExplanation& y);

TheoryExplanation beta_indicator_product(std::span<const std::size_t> indices, double coefficient, std::size_t d,
                                         double nu);
TheoryExplanation beta_indicator_product(const IndicatorProduct& product, std::size_t d, double nu);
TheoryExplanation beta_tree(const TreeModel& tree, std::size_t d, double nu);

/// beta = Sigma^{-1} Gamma with Gamma estimated by Monte Carlo under the
/// LIME sampling law, and exact Sigma^{-1}.
TheoryExplanation beta_general_mc(const Model& model, const LocalEmbedding& embedding, double nu, std::size_t n_mc,
                                  std::uint64_t seed, Execution exec = Execution::parallel);

/// beta_j ~ 3 E[f | w_j in x] - (3/d) sum_k E[f | w_k in x],
/// beta_0 ~ 4 E[f] - (3/d) sum_k E[f | w_k in x].
TheoryExplanation beta_large_bandwidth(const Model& model, const LocalEmbedding& embedding, std::size_t n_mc,
                                       std::uint64_t seed, Execution exec = Execution::parallel);

// P(w_1, ..., w_p all survive) = (d - p) / ((p + 1) d).
double word_presence_probability(std::size_t d, std::size_t p);

/// Sample size sufficient for |beta_hat_n - beta^f| <= eps with probability
/// 1 - eta. Returned as a double: it routinely exceeds every integer type.
double sample_size_bound(double bound_M, std::size_t d, double nu, double eps, double eta);

}  // namespace textlime
