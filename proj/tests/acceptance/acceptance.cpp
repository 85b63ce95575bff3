// Acceptance suite. Usage: textlime_acceptance [A1 ... A14]; no argument runs
// every criterion. Prints one PASS/FAIL line per criterion and exits non-zero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "oracles/oracles.hpp"
#include "textlime/io.hpp"
#include "textlime/subsets.hpp"
#include "textlime/theory.hpp"
#include "textlime/verify.hpp"

using namespace textlime;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const std::vector<std::size_t> kGridD{2, 5, 10, 30, 100};
const std::vector<double> kGridNu{0.1, 0.25, 1.0, 10.0};

struct Bundled {
  IdfTable idf;
  Document doc;
  LocalEmbedding embedding;
};

const Bundled& bundled() {
  static const Bundled b = [] {
    const Corpus corpus = read_corpus(std::string(TEXTLIME_DATA_DIR) + "/reviews.txt");
    const IdfTable idf = IdfTable::fit(corpus);
    return Bundled{idf, corpus.documents[0], LocalEmbedding(corpus.documents[0], idf)};
  }();
  return b;
}

std::size_t word(const char* w) {
  const std::size_t j = bundled().embedding.dictionary().index_of(w);
  if (j == LocalDictionary::npos) throw std::runtime_error(std::string("bundled document lacks ") + w);
  return j;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

ExplainConfig defaults() { return ExplainConfig{kDefaultSamples, kDefaultBandwidth, 0.0, 0, Execution::parallel}; }

Outcome a1() {
  double worst = 0.0;
  std::size_t failures = 0;
  std::uint64_t seed = 1000;
  for (std::size_t d : {5, 15, 35}) {
    for (double nu : {0.1, 0.25, 1.0}) {
      const auto est = mc_alpha(d, nu, 200000, 3, seed++);
      for (std::size_t p = 0; p <= 3; ++p) {
        const double diff = std::abs(alpha(p, d, nu) - est[p].mean);
        const double tol = std::max(3.0 * est[p].stderr_, 5e-3);
        worst = std::max(worst, diff / tol);
        if (diff > tol) ++failures;
      }
    }
  }
  return {failures == 0, "worst |diff|/tol = " + fmt(worst) + ", failures = " + std::to_string(failures)};
}

using Big = boost::multiprecision::cpp_bin_float_50;

template <class Real>
std::vector<std::vector<Real>> dense_sigma(const closed_form::SigmaSet<Real>& s) {
  const std::size_t n = s.d + 1;
  std::vector<std::vector<Real>> m(n, std::vector<Real>(n, s.alpha2));
  for (std::size_t i = 0; i < n; ++i) {
    m[0][i] = m[i][0] = s.alpha1;
    m[i][i] = s.alpha1;
  }
  m[0][0] = s.alpha0;
  return m;
}

template <class Real>
std::vector<std::vector<Real>> dense_inverse(const closed_form::SigmaSet<Real>& s) {
  const std::size_t n = s.d + 1;
  std::vector<std::vector<Real>> m(n, std::vector<Real>(n, s.sigma3 / s.c));
  for (std::size_t i = 0; i < n; ++i) {
    m[0][i] = m[i][0] = s.sigma1 / s.c;
    m[i][i] = s.sigma2 / s.c;
  }
  m[0][0] = s.sigma0 / s.c;
  return m;
}

template <class Real>
double identity_deviation(std::size_t d, const Real& nu) {
  const auto s = closed_form::sigma_set<Real>(d, nu);
  const auto a = dense_sigma(s);
  const auto b = dense_inverse(s);
  const std::size_t n = d + 1;
  Real worst(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Real acc(0);
      for (std::size_t k = 0; k < n; ++k) acc += a[i][k] * b[k][j];
      const Real dev = abs(acc - Real(i == j ? 1 : 0));
      if (dev > worst) worst = dev;
    }
  }
  return static_cast<double>(worst);
}

Outcome a2() {
  double worst = 0.0;
  double worst_double = 0.0;
  for (std::size_t d : kGridD) {
    for (double nu : kGridNu) {
      worst = std::max(worst, identity_deviation<Big>(d, Big(nu)));
      const Eigen::MatrixXd prod = sigma_matrix(d, nu) * sigma_inverse(d, nu);
      worst_double = std::max(worst_double, (prod - Eigen::MatrixXd::Identity(d + 1, d + 1)).cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-10, "max deviation " + fmt(worst) + " (50-digit), " + fmt(worst_double) + " (double)"};
}

Outcome a3() {
  std::size_t failures = 0;
  for (std::size_t d : kGridD) {
    for (double nu : kGridNu) {
      const std::size_t p_max = std::min<std::size_t>(d, 6);
      double previous = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p <= p_max; ++p) {
        const double a = alpha(p, d, nu);
        const AlphaBounds b = alpha_bounds(p, d, nu);
        if (!(b.lower <= a && a <= b.upper && a <= previous)) ++failures;
        previous = a;
      }
    }
  }
  return {failures == 0, "violations = " + std::to_string(failures)};
}

Outcome a4() {
  double gap_margin = std::numeric_limits<double>::infinity();
  double c_margin = std::numeric_limits<double>::infinity();
  for (std::size_t d : kGridD) {
    for (double nu : kGridNu) {
      const SigmaSet s = sigma_set(d, nu);
      gap_margin = std::min(gap_margin, s.alpha_gap / alpha_gap_lower_bound(nu));
      c_margin = std::min(c_margin, s.c / normalization_lower_bound(nu));
    }
  }
  return {gap_margin >= 1.0 && c_margin >= 1.0,
          "min ratio gap/bound = " + fmt(gap_margin) + ", c/bound = " + fmt(c_margin)};
}

Outcome a5() {
  const RunStatistics stats = run_repeated(Model{ConstantModel{1.0}}, bundled().embedding, defaults(), 100, 5);
  double worst = 0.0;
  for (const Summary& s : stats.coefficients) worst = std::max(worst, std::abs(s.median));
  const double dev0 = std::abs(stats.intercept.median - 1.0);
  return {dev0 <= 0.02 && worst <= 0.02,
          "d = " + std::to_string(stats.d()) + ", |median intercept - 1| = " + fmt(dev0) +
              ", max |median coef| = " + fmt(worst)};
}

Outcome a6() {
  const std::size_t j = word("food");
  const Model model{IndicatorProduct{{j}, 1.0}};
  const RunStatistics stats = run_repeated(model, bundled().embedding, defaults(), 100, 6);
  const TheoryExplanation theory = *closed_form_theory(model, bundled().embedding, kDefaultBandwidth);
  double worst = 0.0;
  bool inside = true;
  for (std::size_t k = 0; k < stats.d(); ++k) {
    const Summary& s = stats.coefficients[k];
    worst = std::max(worst, std::abs(s.median - (k == j ? 1.0 : 0.0)));
    const double t = theory.coefficients[k];
    inside = inside && s.min <= t && t <= s.max;
  }
  return {worst <= 0.05 && inside, "max |median - target| = " + fmt(worst) + ", theory in range: " + (inside ? "yes" : "no")};
}

Model nested_tree() {
  return resolve_model_spec(R"("food" + (!"food" & "about" & "Everything"))", bundled().embedding.dictionary());
}

Outcome a7() {
  const Model model = nested_tree();
  const RunStatistics stats = run_repeated(model, bundled().embedding, defaults(), 100, 7);
  const ComparisonReport report = compare(stats, *closed_form_theory(model, bundled().embedding, kDefaultBandwidth));
  double worst = 0.0;
  std::size_t outside = 0;
  for (const ComparisonRow& row : report.rows) {
    worst = std::max(worst, row.absolute_deviation);
    if (!row.inside_range) ++outside;
  }
  std::ostringstream key;
  for (const char* w : {"food", "about", "Everything"}) key << ' ' << w << '=' << fmt(report.row(w).theory);
  return {worst <= 0.05 && outside == 0, "max median deviation = " + fmt(worst) + ", outside range = " +
                                             std::to_string(outside) + ", theory:" + key.str()};
}

Outcome a8() {
  const LocalEmbedding& e = bundled().embedding;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  std::vector<double> lambda(e.d());
  for (double& l : lambda) l = gauss(rng);
  const Model model{LinearModel{lambda}};
  const RunStatistics stats = run_repeated(model, e, defaults(), 100, 8);
  const TheoryExplanation theory = beta_linear(lambda, e);
  const std::vector<double> phi = e.full();
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t j = 0; j < e.d(); ++j) {
    if (std::abs(lambda[j] * phi[j]) < 0.05) continue;
    ++checked;
    const double target = theory.coefficients[j];
    const double tol = std::max(0.15 * std::abs(target), 0.05);
    const double diff = std::abs(stats.coefficients[j].median - target);
    worst = std::max(worst, diff / tol);
    if (diff > tol) ++failures;
  }
  return {checked > 0 && failures == 0, "kappa = " + fmt(linear_simplified_constant()) + ", words checked = " +
                                            std::to_string(checked) + ", failures = " + std::to_string(failures) +
                                            ", worst |diff|/tol = " + fmt(worst)};
}

Outcome a9() {
  const LocalDictionary& local = bundled().embedding.dictionary();
  const Model f = resolve_model_spec(R"("food" + (!"food" & "about" & "Everything"))", local);
  const Model g = resolve_model_spec(R"("bad" & !"character")", local);
  const LinearityReport report = linearity_check(f, g, bundled().embedding, defaults(), 100, 9);
  const double closed = report.closed_form_deviation.value_or(std::numeric_limits<double>::infinity());
  std::size_t outside = report.intercept.within ? 0 : 1;
  for (const LinearityRow& row : report.rows) outside += row.within ? 0 : 1;
  return {closed <= 1e-12 && report.all_within,
          "closed-form deviation = " + fmt(closed) + ", coordinates outside 3 pooled std = " + std::to_string(outside)};
}

Outcome a10() {
  const std::vector<std::size_t> ns{500, 2000, 8000, 32000};
  const ConcentrationReport report = concentration_check(nested_tree(), bundled().embedding, ns, defaults(), 100, 10);
  const double slope = report.mean_slope;
  return {std::abs(slope + 0.5) <= 0.15, "mean fitted slope = " + fmt(slope)};
}

Outcome a11() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  double worst = 0.0;
  for (std::size_t d = 2; d <= 12; ++d) {
    std::vector<double> omega(d);
    double total = 0.0;
    for (double& w : omega) total += (w = unif(rng));
    for (double& w : omega) w /= total;
    const auto h = [](double x) { return x; };
    for (std::size_t j = 0; j < d; ++j) {
      const double ref = oracle::conditional_subset_expectation(omega, oracle::Mask{1} << j, h);
      worst = std::max(worst, std::abs(expected_H(omega, j) - ref));
      if (d < 3) continue;
      for (std::size_t k = j + 1; k < d; ++k) {
        const oracle::Mask pair = (oracle::Mask{1} << j) | (oracle::Mask{1} << k);
        worst = std::max(worst, std::abs(expected_H(omega, j, k) - oracle::conditional_subset_expectation(omega, pair, h)));
      }
    }
  }
  return {worst <= 1e-12, "max |closed form - enumeration| = " + fmt(worst)};
}

Outcome a12() {
  std::size_t mismatches = 0;
  for (unsigned d = 1; d <= 12; ++d) {
    for (unsigned p = 0; p <= d; ++p) {
      const boost::rational<long long> formula(d - p, static_cast<long long>(p + 1) * d);
      if (oracle::presence_probability(d, p) != formula) ++mismatches;
      if (word_presence_probability(d, p) != boost::rational_cast<double>(formula)) ++mismatches;
    }
  }
  const std::size_t d = 30;
  const std::size_t n = 200000;
  const SampleBatch batch = sample_batch(d, n, kDefaultBandwidth, 12);
  double worst = 0.0;
  for (std::size_t p = 1; p <= 4; ++p) {
    double hits = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto z = batch.z(i);
      hits += std::all_of(z.begin(), z.begin() + p, [](unsigned char b) { return b == 1; }) ? 1.0 : 0.0;
    }
    const double prob = word_presence_probability(d, p);
    const double se = std::sqrt(prob * (1.0 - prob) / double(n));
    worst = std::max(worst, std::abs(hits / double(n) - prob) / se);
  }
  return {mismatches == 0 && worst <= 3.0,
          "rational mismatches = " + std::to_string(mismatches) + ", worst MC z-score = " + fmt(worst)};
}

Outcome a13() {
  double worst = 0.0;
  for (std::size_t d : kGridD) {
    for (double nu : kGridNu) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_inverse(d, nu), Eigen::EigenvaluesOnly);
      const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
      worst = std::max(worst, norm / sigma_inverse_norm_bound(d, nu));
    }
  }
  return {worst <= 1.0, "max ||Sigma^-1|| / bound = " + fmt(worst)};
}

Outcome a14() {
  std::string text;
  Corpus corpus;
  for (int w = 0; w < 18; ++w) text += "w" + std::to_string(w) + ' ';
  corpus.documents.push_back(tokenize(text));
  corpus.documents.push_back(tokenize("unrelated filler"));
  const LocalEmbedding e(corpus.documents[0], IdfTable::fit(corpus));
  const std::vector<double> omega = omega_weights(e);
  const double ej = e_term(omega, 0, std::nullopt, ETermMethod::exact).value;
  const double ejk = e_term(omega, 0, 1, ETermMethod::exact).value;
  const bool pass = std::abs(ej - 1.2247) <= 0.05 && std::abs(ejk - 1.1547) <= 0.05;
  return {pass, "d = " + std::to_string(e.d()) + ", E_j = " + fmt(ej) + " (target 1.2247), E_jk = " + fmt(ejk) +
                    " (target 1.1547)"};
}

const std::map<std::string, std::function<Outcome()>>& criteria() {
  static const std::map<std::string, std::function<Outcome()>> table{
      {"A1", a1},   {"A2", a2},   {"A3", a3},   {"A4", a4},   {"A5", a5},   {"A6", a6},   {"A7", a7},
      {"A8", a8},   {"A9", a9},   {"A10", a10}, {"A11", a11}, {"A12", a12}, {"A13", a13}, {"A14", a14}};
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) selected.emplace_back(argv[i]);
  if (selected.empty()) {
    for (int i = 1; i <= 14; ++i) selected.push_back("A" + std::to_string(i));
  }
  int failed = 0;
  for (const std::string& id : selected) {
    const auto it = criteria().find(id);
    if (it == criteria().end()) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = it->second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << id << ' ' << (outcome.pass ? "PASS" : "FAIL") << "  " << outcome.detail << "  [" << fmt(seconds)
              << " s]" << std::endl;
    if (!outcome.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
