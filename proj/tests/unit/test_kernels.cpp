#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "textlime/kernels.hpp"
#include "textlime/surrogate.hpp"

using namespace textlime;

namespace {

struct Fixture {
  Corpus corpus;
  IdfTable idf;
  Document doc;
  LocalEmbedding embedding;

  Fixture()
      : corpus{{tokenize("alpha beta gamma"), tokenize("beta delta"), tokenize("gamma gamma epsilon zeta")}},
        idf(IdfTable::fit(corpus)),
        doc(tokenize("alpha beta gamma delta epsilon zeta eta theta alpha beta iota kappa")),
        embedding(doc, idf) {}
};

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("responses do not depend on the execution mode") {
  const Fixture f;
  const Model model{LinearModel{{0.3, -1.0, 2.0, 0.0, 0.5, 0.1, 0.0, 1.0, -0.2, 0.7}}};
  const SampleBatch batch = sample_batch(f.embedding.d(), 5000, 0.25, 3);
  CHECK(evaluate_responses(model, f.embedding, batch, Execution::serial) ==
        evaluate_responses(model, f.embedding, batch, Execution::parallel));
}

TEST_CASE("normal equations: serial, parallel and dense agree") {
  const std::size_t d = 9;
  const SampleBatch batch = sample_batch(d, 10000, 0.4, 8);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  std::vector<double> y(batch.size());
  for (double& v : y) v = gauss(rng);

  const NormalEquations serial = accumulate_normal_equations(batch, y, Execution::serial);
  const NormalEquations parallel = accumulate_normal_equations(batch, y, Execution::parallel);

  const Eigen::MatrixXd Z = design_matrix(batch);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(batch.weights().data(), batch.size());
  const Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  const Eigen::MatrixXd gram = Z.transpose() * w.asDiagonal() * Z;
  const Eigen::VectorXd rhs = Z.transpose() * w.cwiseProduct(yy);

  const double scale = gram.cwiseAbs().maxCoeff();
  CHECK(max_abs_diff(serial.gram, parallel.gram) <= 1e-12 * scale);
  CHECK(max_abs_diff(serial.gram, gram) <= 1e-12 * scale);
  CHECK(max_abs_diff(serial.rhs, rhs) <= 1e-12 * rhs.cwiseAbs().maxCoeff());
  CHECK(max_abs_diff(parallel.rhs, rhs) <= 1e-12 * rhs.cwiseAbs().maxCoeff());
  CHECK(serial.weight_sum == doctest::Approx(w.sum()).epsilon(1e-12));
  CHECK(max_abs_diff(parallel.gram, parallel.gram.transpose()) == 0.0);
}

TEST_CASE("parallel reductions are independent of the thread count") {
  const SampleBatch batch = sample_batch(20, 20000, 0.25, 77);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(double(i));
  set_thread_limit(1);
  const NormalEquations one = accumulate_normal_equations(batch, y, Execution::parallel);
  const ProjectedMoments m1 = project_moments(batch, y, MomentProjection{1.0, -0.5, 0.2, 3.0, -0.1, true});
  set_thread_limit(4);
  const NormalEquations four = accumulate_normal_equations(batch, y, Execution::parallel);
  const ProjectedMoments m4 = project_moments(batch, y, MomentProjection{1.0, -0.5, 0.2, 3.0, -0.1, true});
  set_thread_limit(0);
  CHECK(one.gram == four.gram);
  CHECK(one.rhs == four.rhs);
  CHECK(m1.mean == m4.mean);
  CHECK(m1.stderr_ == m4.stderr_);
}

TEST_CASE("projected moments against a direct computation") {
  const std::size_t d = 6;
  const SampleBatch batch = sample_batch(d, 3000, 0.5, 4);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::cos(0.1 * double(i));
  const MomentProjection proj{2.0, -0.7, 0.3, 1.5, -0.2, true};

  std::vector<std::vector<double>> L(d + 1, std::vector<double>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double u = batch.weight(i) * y[i];
    double S = 0.0;
    for (std::size_t k = 0; k < d; ++k) S += u * batch.z(i)[k];
    L[0][i] = proj.intercept_u * u + proj.intercept_sum * S;
    for (std::size_t j = 0; j < d; ++j) L[j + 1][i] = proj.coef_u * u + proj.coef_self * u * batch.z(i)[j] + proj.coef_sum * S;
  }
  for (Execution exec : {Execution::serial, Execution::parallel}) {
    const ProjectedMoments m = project_moments(batch, y, proj, exec);
    REQUIRE(m.mean.size() == d + 1);
    for (std::size_t c = 0; c <= d; ++c) {
      double mu = 0.0;
      for (double v : L[c]) mu += v;
      mu /= double(batch.size());
      double var = 0.0;
      for (double v : L[c]) var += (v - mu) * (v - mu);
      var /= double(batch.size() - 1);
      CHECK(m.mean[c] == doctest::Approx(mu).epsilon(1e-12));
      CHECK(m.stderr_[c] == doctest::Approx(std::sqrt(var / double(batch.size()))).epsilon(1e-10));
    }
  }
}

TEST_CASE("subset enumeration: serial, parallel and brute force agree") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (std::size_t d : {3UL, 7UL, 12UL}) {
    std::vector<double> omega(d);
    double total = 0.0;
    for (double& w : omega) total += (w = unif(rng));
    for (double& w : omega) w /= total;
    const std::vector<std::size_t> excluded{0, 2};
    const oracle::Mask mask = 0b101;
    for (SubsetStatistic stat : {SubsetStatistic::removed_mass, SubsetStatistic::renormalization}) {
      const double s = enumerate_subset_expectation(omega, excluded, stat, Execution::serial);
      const double p = enumerate_subset_expectation(omega, excluded, stat, Execution::parallel);
      const double ref = oracle::conditional_subset_expectation(omega, mask, [stat](double h) {
        return stat == SubsetStatistic::removed_mass ? h : 1.0 / std::sqrt(1.0 - h);
      });
      CHECK(s == doctest::Approx(ref).epsilon(1e-12));
      CHECK(p == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("conditional Monte Carlo matches enumeration") {
  const std::vector<double> omega{0.1, 0.2, 0.05, 0.3, 0.15, 0.2};
  const std::vector<std::size_t> excluded{3};
  const double exact = enumerate_subset_expectation(omega, excluded, SubsetStatistic::renormalization);
  const MonteCarloEstimate serial =
      sample_subset_expectation(omega, excluded, SubsetStatistic::renormalization, 100000, 9, Execution::serial);
  const MonteCarloEstimate parallel =
      sample_subset_expectation(omega, excluded, SubsetStatistic::renormalization, 100000, 9, Execution::parallel);
  CHECK(std::abs(serial.mean - exact) <= 4.0 * serial.stderr_);
  CHECK(parallel.mean == doctest::Approx(serial.mean).epsilon(1e-12));
}
