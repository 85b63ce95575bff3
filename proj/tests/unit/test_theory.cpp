#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles/oracles.hpp"
#include "textlime/theory.hpp"

using namespace textlime;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("alpha agrees with enumeration of the sampling law") {
  for (unsigned d : {1U, 2U, 5U, 9U}) {
    for (double nu : {0.1, 0.25, 1.0, kInf}) {
      for (unsigned p = 0; p <= std::min(d, 4U); ++p) {
        CHECK(alpha(p, d, nu) == doctest::Approx(oracle::alpha(p, d, nu)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS(alpha(3, 2, 0.25));
}

TEST_CASE("alpha at infinite bandwidth") {
  for (unsigned d : {2U, 7U, 30U}) {
    for (unsigned p = 0; p <= 3 && p <= d; ++p) {
      CHECK(alpha(p, d, kInf) == doctest::Approx(word_presence_probability(d, p)).epsilon(1e-12));
      CHECK(alpha(p, d, kInf) <= alpha_limit(p, d) + 1e-15);
    }
  }
}

TEST_CASE("presence probabilities are exact rationals") {
  for (unsigned d = 1; d <= 10; ++d) {
    for (unsigned p = 0; p <= d; ++p) {
      const boost::rational<long long> ref = oracle::presence_probability(d, p);
      const boost::rational<long long> formula(d - p, (p + 1) * d);
      CHECK(ref == formula);
    }
  }
}

TEST_CASE("sigma matrix and its closed-form inverse") {
  for (unsigned d : {2U, 3U, 6U, 10U}) {
    for (double nu : {0.15, 0.25, 1.0, 5.0}) {
      const Eigen::MatrixXd ref = oracle::sigma(d, nu);
      const Eigen::MatrixXd s = sigma_matrix(d, nu);
      CHECK(max_abs(s - ref) <= 1e-13);
      const Eigen::MatrixXd inv = sigma_inverse(d, nu);
      const double cond = ref.cwiseAbs().rowwise().sum().maxCoeff() * inv.cwiseAbs().rowwise().sum().maxCoeff();
      CHECK(max_abs(inv * ref - Eigen::MatrixXd::Identity(d + 1, d + 1)) <= 1e-13 * cond);
    }
  }
  CHECK_THROWS_AS(sigma_set(1, 0.25), ClosedFormDomainError);
}

TEST_CASE("double-sum normalization equals its expanded form") {
  const SigmaSet s = sigma_set(6, 0.3);
  CHECK(s.c > 0.0);
  const double expanded = (6.0 - 1.0) * s.alpha0 * s.alpha2 - 6.0 * s.alpha1 * s.alpha1 + s.alpha0 * s.alpha1;
  CHECK(s.c == doctest::Approx(expanded).epsilon(1e-10));
}

TEST_CASE("gamma of an indicator product") {
  const unsigned d = 7;
  const std::vector<std::size_t> idx{1, 4};
  const Eigen::VectorXd g = gamma_indicator_product(idx, d, 0.3);
  const Eigen::VectorXd ref =
      oracle::gamma(d, 0.3, [](oracle::Mask m) { return oracle::has(m, 1) && oracle::has(m, 4) ? 1.0 : 0.0; });
  CHECK(max_abs(g - ref) <= 1e-14);
}

TEST_CASE("beta of indicator products matches the enumerated system") {
  for (unsigned d : {3U, 5U, 8U}) {
    for (double nu : {0.2, 0.35, 2.0}) {
      for (std::vector<std::size_t> idx : {std::vector<std::size_t>{}, {0}, {2}, {0, 1}, {0, 1, 2}}) {
        const TheoryExplanation t = beta_indicator_product(idx, 1.5, d, nu);
        const Eigen::VectorXd ref = oracle::beta(d, nu, [&](oracle::Mask m) {
          for (std::size_t j : idx) {
            if (!oracle::has(m, static_cast<unsigned>(j))) return 0.0;
          }
          return 1.5;
        });
        CHECK(t.provenance == Provenance::exact_closed_form);
        CHECK(t.intercept == doctest::Approx(ref(0)).epsilon(1e-8).scale(1.0));
        for (unsigned j = 0; j < d; ++j) CHECK(t.coefficients[j] == doctest::Approx(ref(j + 1)).epsilon(1e-8).scale(1.0));
      }
    }
  }
}

TEST_CASE("constant and single-word models") {
  const TheoryExplanation c = beta_indicator_product(std::vector<std::size_t>{}, 1.0, 12, 0.25);
  CHECK(c.intercept == doctest::Approx(1.0).epsilon(1e-10));
  for (double b : c.coefficients) CHECK(std::abs(b) <= 1e-10);

  const TheoryExplanation one = beta_indicator_product(std::vector<std::size_t>{3}, 1.0, 12, 0.25);
  CHECK(std::abs(one.intercept) <= 1e-10);
  for (std::size_t j = 0; j < 12; ++j) CHECK(one.coefficients[j] == doctest::Approx(j == 3 ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("beta of a tree is the sum over its terms") {
  const TreeModel tree{{IndicatorProduct{{0}, 1.0}, IndicatorProduct{{1, 2}, 1.0}, IndicatorProduct{{0, 1, 2}, -1.0}}};
  const TheoryExplanation t = beta_tree(tree, 6, 0.25);
  const Eigen::VectorXd ref = oracle::beta(6, 0.25, [](oracle::Mask m) {
    return oracle::has(m, 0) ? 1.0 : (oracle::has(m, 1) && oracle::has(m, 2) ? 1.0 : 0.0);
  });
  CHECK(t.intercept == doctest::Approx(ref(0)).epsilon(1e-8).scale(1.0));
  for (unsigned j = 0; j < 6; ++j) CHECK(t.coefficients[j] == doctest::Approx(ref(j + 1)).epsilon(1e-8).scale(1.0));

  const TheoryExplanation a = beta_indicator_product(std::vector<std::size_t>{0}, 2.0, 6, 0.25);
  const TheoryExplanation b = beta_indicator_product(std::vector<std::size_t>{1, 2}, -1.0, 6, 0.25);
  const TheoryExplanation sum = linear_combination(1.0, a, 1.0, b);
  const TheoryExplanation direct = beta_tree(TreeModel{{IndicatorProduct{{0}, 2.0}, IndicatorProduct{{1, 2}, -1.0}}}, 6, 0.25);
  CHECK(std::abs(sum.intercept - direct.intercept) <= 1e-12);
  for (unsigned j = 0; j < 6; ++j) CHECK(std::abs(sum.coefficients[j] - direct.coefficients[j]) <= 1e-12);
}

TEST_CASE("Monte Carlo theory brackets the closed form") {
  Corpus corpus{{tokenize("a b c d e f g"), tokenize("a c e"), tokenize("b d f")}};
  const IdfTable idf = IdfTable::fit(corpus);
  const LocalEmbedding embedding(corpus.documents[0], idf);
  const Model model{TreeModel{{IndicatorProduct{{0}, 1.0}, IndicatorProduct{{1, 2}, 1.0}}}};
  const TheoryExplanation exact = beta_tree(std::get<TreeModel>(model.variant()), embedding.d(), 0.3);
  const TheoryExplanation mc = beta_general_mc(model, embedding, 0.3, 400000, 2);
  CHECK(mc.provenance == Provenance::monte_carlo);
  REQUIRE(mc.intercept_stderr);
  CHECK(std::abs(mc.intercept - exact.intercept) <= 4.0 * *mc.intercept_stderr + 1e-3);
  for (std::size_t j = 0; j < embedding.d(); ++j) {
    CHECK(std::abs(mc.coefficients[j] - exact.coefficients[j]) <= 4.0 * mc.coefficient_stderr[j] + 1e-3);
  }
  // The large-bandwidth estimator targets (3/P) E[f z_j] - 3 E[f |z|] / (d P)
  // with P = (d - 1) / (2d), an O(1/d) simplification of the limit.
  const TheoryExplanation big = beta_large_bandwidth(model, embedding, 400000, 3);
  CHECK(big.provenance == Provenance::large_bandwidth_approx);
  const unsigned d = static_cast<unsigned>(embedding.d());
  const Eigen::VectorXd g = oracle::gamma(d, kInf, [](oracle::Mask m) {
    return (oracle::has(m, 0) ? 1.0 : 0.0) + (oracle::has(m, 1) && oracle::has(m, 2) ? 1.0 : 0.0);
  });
  const double P = (d - 1.0) / (2.0 * d);
  const double sum = g.tail(d).sum();
  CHECK(std::abs(big.intercept - (4.0 * g(0) - 3.0 * sum / (d * P))) <= 4.0 * *big.intercept_stderr);
  for (unsigned j = 0; j < d; ++j) {
    const double target = 3.0 / P * g(j + 1) - 3.0 * sum / (d * P);
    CHECK(std::abs(big.coefficients[j] - target) <= 4.0 * big.coefficient_stderr[j]);
  }
}

TEST_CASE("bounds and sample size") {
  for (unsigned d : {2U, 10U, 40U}) {
    for (double nu : {0.1, 0.5, 3.0}) {
      const SigmaSet s = sigma_set(d, nu);
      CHECK(s.alpha_gap >= alpha_gap_lower_bound(nu));
      CHECK(s.c >= normalization_lower_bound(nu));
      for (unsigned p = 0; p <= std::min(d, 5U); ++p) {
        const AlphaBounds b = alpha_bounds(p, d, nu);
        const double a = alpha(p, d, nu);
        CHECK(a >= b.lower);
        CHECK(a <= b.upper);
      }
    }
  }
  CHECK(sample_size_bound(1.0, 10, 0.25, 0.1, 0.05) > 0.0);
  CHECK_THROWS(sample_size_bound(1.0, 10, 0.25, 2.0, 0.05));
  CHECK_THROWS(sample_size_bound(1.0, 10, 0.25, 0.1, 1.0));
  CHECK(provenance_name(Provenance::exact_closed_form) == "exact-closed-form");
}
