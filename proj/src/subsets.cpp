#include "textlime/subsets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "textlime/random.hpp"

namespace textlime {

std::vector<double> omega_weights(const LocalEmbedding& embedding) {
  if (embedding.d() == 0) throw std::invalid_argument("empty document");
  const auto masses = embedding.masses();
  double total = 0.0;
  for (const double m : masses) total += m * m;
  std::vector<double> omega(masses.size());
  for (std::size_t k = 0; k < masses.size(); ++k) omega[k] = masses[k] * masses[k] / total;
  return omega;
}

std::vector<double> omega_weights(const Document& doc, const IdfTable& idf) {
  return omega_weights(LocalEmbedding(doc, idf));
}

namespace {

void check_index(std::span<const double> omega, std::size_t j) {
  if (j >= omega.size()) throw std::out_of_range("word index outside the dictionary");
}

}  // namespace

double expected_H(std::span<const double> omega, std::size_t j) {
  const std::size_t d = omega.size();
  check_index(omega, j);
  if (d < 2) throw std::invalid_argument("degenerate (d-1 = 0)");
  const double dd = static_cast<double>(d);
  return (1.0 - omega[j]) * (dd + 1.0) / (3.0 * (dd - 1.0));
}

double expected_H(std::span<const double> omega, std::size_t j, std::size_t k) {
  const std::size_t d = omega.size();
  check_index(omega, j);
  check_index(omega, k);
  if (j == k) throw std::invalid_argument("pair exclusion needs two distinct words");
  if (d < 3) throw std::invalid_argument("degenerate (d-2 = 0)");
  const double dd = static_cast<double>(d);
  return (1.0 - omega[j] - omega[k]) * (dd + 1.0) / (4.0 * (dd - 2.0));
}

ETerm e_term(std::span<const double> omega, std::size_t j, std::optional<std::size_t> k, ETermMethod method,
             const ETermOptions& options) {
  check_index(omega, j);
  std::vector<std::size_t> excluded{j};
  if (k) {
    check_index(omega, *k);
    if (*k == j) throw std::invalid_argument("pair exclusion needs two distinct words");
    excluded.push_back(*k);
  }
  switch (method) {
    case ETermMethod::exact:
      if (omega.size() > kMaxExactETermWords) throw std::invalid_argument("enumeration too large");
      return {enumerate_subset_expectation(omega, excluded, SubsetStatistic::renormalization, options.exec), 0.0};
    case ETermMethod::approx: {
      const double h = k ? expected_H(omega, j, *k) : expected_H(omega, j);
      return {1.0 / std::sqrt(1.0 - h), 0.0};
    }
    case ETermMethod::mc: {
      const MonteCarloEstimate est = sample_subset_expectation(omega, excluded, SubsetStatistic::renormalization,
                                                               options.n_mc, options.seed, options.exec);
      return {est.mean, est.stderr_};
    }
  }
  throw std::invalid_argument("unknown E-term method");
}

double limiting_e_single() { return 1.0 / std::sqrt(1.0 - 1.0 / 3.0); }

double limiting_e_pair() { return 1.0 / std::sqrt(1.0 - 1.0 / 4.0); }

double linear_simplified_constant() { return 3.0 * limiting_e_single() - 2.0 * limiting_e_pair(); }

double linear_simplified_intercept_constant() { return 2.0 * limiting_e_single() - 2.0 * limiting_e_pair(); }

namespace {

std::string_view method_name(ETermMethod method) {
  switch (method) {
    case ETermMethod::exact:
      return "exact";
    case ETermMethod::approx:
      return "approx";
    case ETermMethod::mc:
      return "mc";
  }
  return "unknown";
}

// E_j for every word with a nonzero coefficient, E_{j,k} for every pair that
// involves one.
struct ETermTable {
  std::vector<double> single;
  std::vector<double> pair;  // d x d, symmetric, diagonal unused
  std::size_t d = 0;

  double at(std::size_t j, std::size_t k) const { return pair[j * d + k]; }
};

ETermTable e_term_table(std::span<const double> omega, std::span<const double> lambda, ETermMethod method,
                        const ETermOptions& options) {
  const std::size_t d = omega.size();
  ETermTable table{std::vector<double>(d, 0.0), std::vector<double>(d * d, 0.0), d};
  std::vector<unsigned char> needed(d * d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    if (lambda[j] == 0.0) continue;
    ETermOptions opt = options;
    opt.seed = RandomStream::derive(options.seed, j).seed();
    table.single[j] = e_term(omega, j, std::nullopt, method, opt).value;
    for (std::size_t k = 0; k < d; ++k) {
      if (k != j) needed[std::min(j, k) * d + std::max(j, k)] = 1;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j + 1; k < d; ++k) {
      if (!needed[j * d + k]) continue;
      ETermOptions opt = options;
      opt.seed = RandomStream::derive(options.seed, d + j * d + k).seed();
      const double value = e_term(omega, j, k, method, opt).value;
      table.pair[j * d + k] = value;
      table.pair[k * d + j] = value;
    }
  }
  return table;
}

}  // namespace

TheoryExplanation beta_linear(std::span<const double> lambda, const LocalEmbedding& embedding,
                              const LinearTheoryOptions& options) {
  const std::size_t d = embedding.d();
  if (lambda.size() != d) throw std::invalid_argument("linear model size does not match the local dictionary");
  if (d < 3) throw ClosedFormDomainError("out of closed-form domain: the linear-model formulas require d >= 3");
  const std::vector<double> phi = embedding.full();
  const double dd = static_cast<double>(d);

  TheoryExplanation out;
  out.words = embedding.dictionary().words;
  out.coefficients.assign(d, 0.0);
  out.provenance = Provenance::large_bandwidth_approx;

  if (options.mode == LinearMode::simplified) {
    const double kappa = linear_simplified_constant();
    const double kappa0 = linear_simplified_intercept_constant();
    for (std::size_t j = 0; j < d; ++j) {
      out.coefficients[j] = kappa * lambda[j] * phi[j];
      out.intercept += kappa0 * lambda[j] * phi[j];
    }
    std::ostringstream note;
    note.precision(17);
    note << "simplified: beta_j = kappa lambda_j phi_j, kappa = 3 E_j - 2 E_jk = " << kappa
         << " with E_j = (1 - 1/3)^(-1/2), E_jk = (1 - 1/4)^(-1/2); intercept factor 2 E_j - 2 E_jk = " << kappa0;
    out.note = note.str();
    return out;
  }

  const ETermMethod method = options.method.value_or(d <= kMaxExactETermWords ? ETermMethod::exact : ETermMethod::mc);
  const std::vector<double> omega = omega_weights(embedding);
  const ETermTable e = e_term_table(omega, lambda, method, options.e_terms);

  if (options.mode == LinearMode::full) {
    for (std::size_t j = 0; j < d; ++j) {
      if (lambda[j] == 0.0) continue;
      const double scale = lambda[j] * phi[j];
      double pair_sum = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        if (k != j) pair_sum += e.at(j, k);
      }
      out.intercept += scale * (2.0 * e.single[j] - 2.0 / dd * pair_sum);
      out.coefficients[j] += scale * (3.0 * e.single[j] - 2.0 / dd * pair_sum);
      for (std::size_t k = 0; k < d; ++k) {
        if (k == j) continue;
        out.coefficients[k] += scale * (2.0 * e.at(j, k) - 2.0 / dd * (pair_sum - e.at(j, k)));
      }
    }
    out.note = "full large-d formulas, E-terms by " + std::string(method_name(method));
    return out;
  }

  // Gamma_inf for f = phi_j: E[phi_j(x)] at 0 and j, E[z_k phi_j(x)] elsewhere.
  const SigmaSet sigma = sigma_set(d, std::numeric_limits<double>::infinity());
  const Eigen::MatrixXd inverse = sigma_inverse(sigma);
  const double p1 = word_presence_probability(d, 1);
  const double p2 = word_presence_probability(d, 2);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d + 1));
  for (std::size_t j = 0; j < d; ++j) {
    if (lambda[j] == 0.0) continue;
    const double scale = lambda[j] * phi[j];
    gamma(0) += scale * p1 * e.single[j];
    gamma(static_cast<Eigen::Index>(j + 1)) += scale * p1 * e.single[j];
    for (std::size_t k = 0; k < d; ++k) {
      if (k != j) gamma(static_cast<Eigen::Index>(k + 1)) += scale * p2 * e.at(j, k);
    }
  }
  const Eigen::VectorXd beta = inverse * gamma;
  out.intercept = beta(0);
  for (std::size_t j = 0; j < d; ++j) out.coefficients[j] = beta(static_cast<Eigen::Index>(j + 1));
  out.note = "exact nu = infinity limit, E-terms by " + std::string(method_name(method));
  return out;
}

}  // namespace textlime
