#include "textlime/theory.hpp"

#include <algorithm>
#include <cmath>

#include "textlime/kernels.hpp"
#include "textlime/sampler.hpp"

namespace textlime {

double alpha(std::size_t p, std::size_t d, double nu) {
  if (d == 0) throw std::invalid_argument("alpha requires d >= 1");
  return closed_form::alpha<double>(p, d, closed_form::psi_table(d, nu));
}

double alpha_limit(std::size_t p, std::size_t d) {
  if (d == 0 || p > d) throw std::invalid_argument("alpha requires 0 <= p <= d and d >= 1");
  return static_cast<double>(d - p) / (static_cast<double>(p + 1) * static_cast<double>(d));
}

AlphaBounds alpha_bounds(std::size_t p, std::size_t d, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const double upper = alpha_limit(p, d);
  return {std::exp(-1.0 / (2.0 * nu * nu)) * upper, upper};
}

AlphaCoefficients alpha_coefficients(std::size_t d, double nu, std::size_t p_max) {
  if (d == 0) throw std::invalid_argument("alpha requires d >= 1");
  if (p_max > d) throw std::invalid_argument("alpha requires p <= d");
  const std::vector<double> ps = closed_form::psi_table(d, nu);
  AlphaCoefficients out{d, nu, {}};
  out.values.reserve(p_max + 1);
  for (std::size_t p = 0; p <= p_max; ++p) out.values.push_back(closed_form::alpha<double>(p, d, ps));
  return out;
}

SigmaSet sigma_set(std::size_t d, double nu) { return closed_form::sigma_set<double>(d, nu); }

Eigen::MatrixXd sigma_matrix(std::size_t d, double nu) {
  if (d < 2) throw ClosedFormDomainError("out of closed-form domain: Sigma requires d >= 2");
  const std::vector<double> ps = closed_form::psi_table(d, nu);
  const double a0 = closed_form::alpha<double>(0, d, ps);
  const double a1 = closed_form::alpha<double>(1, d, ps);
  const double a2 = closed_form::alpha<double>(2, d, ps);
  const auto n = static_cast<Eigen::Index>(d + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, a2);
  m.row(0).setConstant(a1);
  m.col(0).setConstant(a1);
  m.diagonal().setConstant(a1);
  m(0, 0) = a0;
  return m;
}

Eigen::MatrixXd sigma_inverse(const SigmaSet& sigma) {
  const auto n = static_cast<Eigen::Index>(sigma.d + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, sigma.sigma3);
  m.row(0).setConstant(sigma.sigma1);
  m.col(0).setConstant(sigma.sigma1);
  m.diagonal().setConstant(sigma.sigma2);
  m(0, 0) = sigma.sigma0;
  return m / sigma.c;
}

Eigen::MatrixXd sigma_inverse(std::size_t d, double nu) { return sigma_inverse(sigma_set(d, nu)); }

double alpha_gap_lower_bound(double nu) { return std::exp(-1.0 / (2.0 * nu * nu)) / 6.0; }

double normalization_lower_bound(double nu) { return std::exp(-2.0 / (nu * nu)) / 40.0; }

double sigma_inverse_norm_bound(std::size_t d, double nu) {
  return 70.0 * std::pow(static_cast<double>(d), 1.5) * std::exp(5.0 / (2.0 * nu * nu));
}

namespace {

void check_indices(std::span<const std::size_t> indices, std::size_t d) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= d) throw std::out_of_range("indicator index outside the local dictionary");
    if (i > 0 && indices[i] <= indices[i - 1]) throw std::invalid_argument("indicator indices must be sorted and distinct");
  }
}

// alpha_p and alpha_{p+1}, the latter 0 when p = d.
struct AlphaPair {
  double at_p = 0.0;
  double next = 0.0;
};

class IndicatorSolver {
 public:
  IndicatorSolver(std::size_t d, double nu) : d_(d), psi_(closed_form::psi_table(d, nu)), sigma_(sigma_set(d, nu)) {}

  const SigmaSet& sigma() const { return sigma_; }

  AlphaPair alphas(std::size_t p) const {
    AlphaPair out;
    out.at_p = closed_form::alpha<double>(p, d_, psi_);
    out.next = p + 1 <= d_ ? closed_form::alpha<double>(p + 1, d_, psi_) : 0.0;
    return out;
  }

  void accumulate(std::span<const std::size_t> indices, double coefficient, TheoryExplanation& out) const {
    check_indices(indices, d_);
    const std::size_t p = indices.size();
    const AlphaPair a = alphas(p);
    const double dp = static_cast<double>(d_ - p);
    const double pp = static_cast<double>(p);
    const auto& s = sigma_;
    const double scale = coefficient / s.c;
    out.intercept += scale * (s.sigma0 * a.at_p + pp * s.sigma1 * a.at_p + dp * s.sigma1 * a.next);
    const double inside =
        scale * (s.sigma1 * a.at_p + s.sigma2 * a.at_p + dp * s.sigma3 * a.next + (pp - 1.0) * s.sigma3 * a.at_p);
    const double outside =
        scale * (s.sigma1 * a.at_p + s.sigma2 * a.next + (dp - 1.0) * s.sigma3 * a.next + pp * s.sigma3 * a.at_p);
    std::size_t next = 0;
    for (std::size_t j = 0; j < d_; ++j) {
      const bool member = next < indices.size() && indices[next] == j;
      if (member) ++next;
      out.coefficients[j] += member ? inside : outside;
    }
  }

 private:
  std::size_t d_;
  std::vector<double> psi_;
  SigmaSet sigma_;
};

TheoryExplanation zero_explanation(std::size_t d, Provenance provenance) {
  TheoryExplanation out;
  out.coefficients.assign(d, 0.0);
  out.provenance = provenance;
  return out;
}

}  // namespace

Eigen::VectorXd gamma_indicator_product(std::span<const std::size_t> indices, std::size_t d, double nu) {
  check_indices(indices, d);
  const std::vector<double> ps = closed_form::psi_table(d, nu);
  const std::size_t p = indices.size();
  const double at_p = closed_form::alpha<double>(p, d, ps);
  const double next = p + 1 <= d ? closed_form::alpha<double>(p + 1, d, ps) : 0.0;
  Eigen::VectorXd gamma = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d + 1), next);
  gamma(0) = at_p;
  for (const std::size_t j : indices) gamma(static_cast<Eigen::Index>(j + 1)) = at_p;
  return gamma;
}

std::string_view provenance_name(Provenance provenance) {
  switch (provenance) {
    case Provenance::exact_closed_form:
      return "exact-closed-form";
    case Provenance::large_bandwidth_approx:
      return "large-bandwidth-approx";
    case Provenance::monte_carlo:
      return "monte-carlo";
  }
  return "unknown";
}

TheoryExplanation& TheoryExplanation::with_words(const LocalDictionary& local) {
  if (local.size() != coefficients.size()) throw std::invalid_argument("dictionary size does not match the explanation");
  words = local.words;
  return *this;
}

TheoryExplanation linear_combination(double a, const TheoryExplanation& x, double b, const TheoryExplanation& y) {
  if (x.d() != y.d()) throw std::invalid_argument("explanations of different dimension");
  if (!x.words.empty() && !y.words.empty() && x.words != y.words) {
    throw std::invalid_argument("explanations over different dictionaries");
  }
  TheoryExplanation out;
  out.words = x.words.empty() ? y.words : x.words;
  out.provenance = std::max(x.provenance, y.provenance);
  out.intercept = a * x.intercept + b * y.intercept;
  out.coefficients.resize(x.d());
  for (std::size_t j = 0; j < x.d(); ++j) out.coefficients[j] = a * x.coefficients[j] + b * y.coefficients[j];

  const bool has_error = x.intercept_stderr || y.intercept_stderr;
  if (has_error) {
    const auto sq = [](double w, double e) { return w * w * e * e; };
    out.intercept_stderr =
        std::sqrt(sq(a, x.intercept_stderr.value_or(0.0)) + sq(b, y.intercept_stderr.value_or(0.0)));
    out.coefficient_stderr.resize(x.d());
    for (std::size_t j = 0; j < x.d(); ++j) {
      const double ex = x.coefficient_stderr.empty() ? 0.0 : x.coefficient_stderr[j];
      const double ey = y.coefficient_stderr.empty() ? 0.0 : y.coefficient_stderr[j];
      out.coefficient_stderr[j] = std::sqrt(sq(a, ex) + sq(b, ey));
    }
  }
  return out;
}

TheoryExplanation beta_indicator_product(std::span<const std::size_t> indices, double coefficient, std::size_t d,
                                         double nu) {
  const IndicatorSolver solver(d, nu);
  TheoryExplanation out = zero_explanation(d, Provenance::exact_closed_form);
  solver.accumulate(indices, coefficient, out);
  return out;
}

TheoryExplanation beta_indicator_product(const IndicatorProduct& product, std::size_t d, double nu) {
  return beta_indicator_product(product.indices, product.coefficient, d, nu);
}

TheoryExplanation beta_tree(const TreeModel& tree, std::size_t d, double nu) {
  const IndicatorSolver solver(d, nu);
  TheoryExplanation out = zero_explanation(d, Provenance::exact_closed_form);
  for (const auto& term : tree.terms) solver.accumulate(term.indices, term.coefficient, out);
  return out;
}

namespace {

TheoryExplanation from_moments(const ProjectedMoments& moments, Provenance provenance) {
  TheoryExplanation out;
  out.provenance = provenance;
  out.intercept = moments.mean[0];
  out.intercept_stderr = moments.stderr_[0];
  out.coefficients.assign(moments.mean.begin() + 1, moments.mean.end());
  out.coefficient_stderr.assign(moments.stderr_.begin() + 1, moments.stderr_.end());
  return out;
}

}  // namespace

TheoryExplanation beta_general_mc(const Model& model, const LocalEmbedding& embedding, double nu, std::size_t n_mc,
                                  std::uint64_t seed, Execution exec) {
  const std::size_t d = embedding.d();
  const SigmaSet s = sigma_set(d, nu);
  const SampleBatch batch = sample_batch(d, n_mc, nu, seed, exec);
  const std::vector<double> y = evaluate_responses(model, embedding, batch, exec);

  // beta_0 = (sigma0 E[pi f] + sigma1 sum_k E[pi z_k f]) / c
  // beta_j = (sigma1 E[pi f] + sigma2 E[pi z_j f] + sigma3 sum_{k != j} E[pi z_k f]) / c
  MomentProjection projection;
  projection.intercept_u = s.sigma0 / s.c;
  projection.intercept_sum = s.sigma1 / s.c;
  projection.coef_u = s.sigma1 / s.c;
  projection.coef_self = (s.sigma2 - s.sigma3) / s.c;
  projection.coef_sum = s.sigma3 / s.c;
  projection.weighted = true;

  TheoryExplanation out = from_moments(project_moments(batch, y, projection, exec), Provenance::monte_carlo);
  out.words = embedding.dictionary().words;
  return out;
}

TheoryExplanation beta_large_bandwidth(const Model& model, const LocalEmbedding& embedding, std::size_t n_mc,
                                       std::uint64_t seed, Execution exec) {
  const std::size_t d = embedding.d();
  if (d < 2) throw ClosedFormDomainError("out of closed-form domain: the large-bandwidth formulas require d >= 2");
  // Sampling does not depend on the bandwidth; only the weights do, and they
  // are all 1 in the limit.
  const SampleBatch batch = sample_batch(d, n_mc, std::numeric_limits<double>::infinity(), seed, exec);
  const std::vector<double> y = evaluate_responses(model, embedding, batch, exec);

  // E[f | w_k in x] = E[f z_k] / P(w_k in x), with P(w_k in x) = (d - 1) / (2d).
  const double presence = word_presence_probability(d, 1);
  const double dd = static_cast<double>(d);
  MomentProjection projection;
  projection.intercept_u = 4.0;
  projection.intercept_sum = -3.0 / (dd * presence);
  projection.coef_u = 0.0;
  projection.coef_self = 3.0 / presence;
  projection.coef_sum = -3.0 / (dd * presence);
  projection.weighted = false;

  TheoryExplanation out =
      from_moments(project_moments(batch, y, projection, exec), Provenance::large_bandwidth_approx);
  out.words = embedding.dictionary().words;
  return out;
}

double word_presence_probability(std::size_t d, std::size_t p) {
  if (d == 0 || p > d) throw std::invalid_argument("presence probability requires 0 <= p <= d and d >= 1");
  return static_cast<double>(d - p) / (static_cast<double>(p + 1) * static_cast<double>(d));
}

double sample_size_bound(double bound_M, std::size_t d, double nu, double eps, double eta) {
  if (!(bound_M > 0.0)) throw std::invalid_argument("model bound M must be positive");
  if (d == 0) throw std::invalid_argument("empty local dictionary");
  if (!(nu > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (eps >= bound_M) throw std::invalid_argument("eps must be smaller than M");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  const double dd = static_cast<double>(d);
  const double first = 512.0 * std::pow(70.0, 4) * bound_M * bound_M * std::pow(dd, 9) * std::exp(10.0 / (nu * nu));
  const double second = 512.0 * 70.0 * 70.0 * bound_M * std::pow(dd, 5) * std::exp(5.0 / (nu * nu));
  return std::max(first, second) * std::log(8.0 * dd / eta) / (eps * eps);
}

}  // namespace textlime
