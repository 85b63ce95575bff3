#include "textlime/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "textlime/random.hpp"
#include "textlime/stats.hpp"

namespace textlime {

void set_thread_limit(int threads) {
  if (threads < 0) throw std::invalid_argument("thread count must be nonnegative");
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

namespace {

std::size_t block_count(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

void check_responses(const SampleBatch& batch, std::span<const double> y) {
  if (y.size() != batch.size()) throw std::invalid_argument("response count does not match the batch size");
}

}  // namespace

std::vector<double> evaluate_responses(const Model& model, const LocalEmbedding& embedding,
                                       const SampleBatch& batch, Execution exec) {
  if (embedding.d() != batch.d()) throw std::invalid_argument("batch and document dictionaries differ");
  const std::size_t n = batch.size();
  std::vector<double> y(n);
  if (exec == Execution::serial) {
    std::vector<double> phi(batch.d());
    for (std::size_t i = 0; i < n; ++i) {
      embedding.embed(batch.z(i), phi);
      y[i] = model.evaluate(phi);
    }
    return y;
  }
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> phi(batch.d());
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < nn; ++i) {
      const auto k = static_cast<std::size_t>(i);
      embedding.embed(batch.z(k), phi);
      y[k] = model.evaluate(phi);
    }
  }
  return y;
}

namespace {

void add_sample(const SampleBatch& batch, std::size_t i, double yi, std::vector<std::size_t>& present,
                Eigen::MatrixXd& gram, Eigen::VectorXd& rhs, double& weight_sum) {
  const double w = batch.weight(i);
  const auto z = batch.z(i);
  present.clear();
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j]) present.push_back(j + 1);
  }
  weight_sum += w;
  gram(0, 0) += w;
  rhs(0) += w * yi;
  for (std::size_t a = 0; a < present.size(); ++a) {
    const auto ja = static_cast<Eigen::Index>(present[a]);
    gram(0, ja) += w;
    rhs(ja) += w * yi;
    for (std::size_t b = a; b < present.size(); ++b) gram(ja, static_cast<Eigen::Index>(present[b])) += w;
  }
}

void symmetrize_upper(Eigen::MatrixXd& m) {
  m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
}

}  // namespace

NormalEquations accumulate_normal_equations(const SampleBatch& batch, std::span<const double> y, Execution exec) {
  check_responses(batch, y);
  const auto dim = static_cast<Eigen::Index>(batch.d() + 1);
  NormalEquations out{Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim), 0.0};
  const std::size_t n = batch.size();

  if (exec == Execution::serial) {
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < n; ++i) add_sample(batch, i, y[i], present, out.gram, out.rhs, out.weight_sum);
    symmetrize_upper(out.gram);
    return out;
  }

  const std::size_t blocks = block_count(n, kReductionBlock);
  std::vector<NormalEquations> partial(blocks);
  const auto nblocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel
  {
    std::vector<std::size_t> present;
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
      auto& part = partial[static_cast<std::size_t>(b)];
      part = NormalEquations{Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim), 0.0};
      const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
      const std::size_t end = std::min(n, begin + kReductionBlock);
      for (std::size_t i = begin; i < end; ++i) add_sample(batch, i, y[i], present, part.gram, part.rhs, part.weight_sum);
    }
  }
  for (const auto& part : partial) {
    out.gram += part.gram;
    out.rhs += part.rhs;
    out.weight_sum += part.weight_sum;
  }
  symmetrize_upper(out.gram);
  return out;
}

namespace {

void projected_values(const SampleBatch& batch, std::size_t i, double yi, const MomentProjection& p,
                      std::span<double> out) {
  const auto z = batch.z(i);
  const double u = (p.weighted ? batch.weight(i) : 1.0) * yi;
  double s = 0.0;
  for (const unsigned char zj : z) {
    if (zj) s += u;
  }
  out[0] = p.intercept_u * u + p.intercept_sum * s;
  for (std::size_t j = 0; j < z.size(); ++j) out[j + 1] = p.coef_u * u + (z[j] ? p.coef_self * u : 0.0) + p.coef_sum * s;
}

}  // namespace

ProjectedMoments project_moments(const SampleBatch& batch, std::span<const double> y,
                                 const MomentProjection& projection, Execution exec) {
  check_responses(batch, y);
  const std::size_t n = batch.size();
  const std::size_t dim = batch.d() + 1;
  ProjectedMoments out{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  const double inv_n = 1.0 / static_cast<double>(n);

  if (exec == Execution::serial) {
    std::vector<double> values(dim);
    for (std::size_t i = 0; i < n; ++i) {
      projected_values(batch, i, y[i], projection, values);
      for (std::size_t c = 0; c < dim; ++c) out.mean[c] += values[c];
    }
    for (double& m : out.mean) m *= inv_n;
    std::vector<double> sq(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      projected_values(batch, i, y[i], projection, values);
      for (std::size_t c = 0; c < dim; ++c) sq[c] += (values[c] - out.mean[c]) * (values[c] - out.mean[c]);
    }
    for (std::size_t c = 0; c < dim; ++c) {
      out.stderr_[c] = n > 1 ? std::sqrt(sq[c] / static_cast<double>(n - 1) * inv_n) : 0.0;
    }
    return out;
  }

  const std::size_t blocks = block_count(n, kReductionBlock);
  const auto nblocks = static_cast<std::ptrdiff_t>(blocks);
  std::vector<double> sums(blocks * dim, 0.0);
  std::vector<double> squares(blocks * dim, 0.0);
#pragma omp parallel
  {
    std::vector<double> values(dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
      double* acc = sums.data() + static_cast<std::size_t>(b) * dim;
      const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
      const std::size_t end = std::min(n, begin + kReductionBlock);
      for (std::size_t i = begin; i < end; ++i) {
        projected_values(batch, i, y[i], projection, values);
        for (std::size_t c = 0; c < dim; ++c) acc[c] += values[c];
      }
    }
  }
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t c = 0; c < dim; ++c) out.mean[c] += sums[b * dim + c];
  }
  for (double& m : out.mean) m *= inv_n;
#pragma omp parallel
  {
    std::vector<double> values(dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
      double* acc = squares.data() + static_cast<std::size_t>(b) * dim;
      const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
      const std::size_t end = std::min(n, begin + kReductionBlock);
      for (std::size_t i = begin; i < end; ++i) {
        projected_values(batch, i, y[i], projection, values);
        for (std::size_t c = 0; c < dim; ++c) acc[c] += (values[c] - out.mean[c]) * (values[c] - out.mean[c]);
      }
    }
  }
  for (std::size_t c = 0; c < dim; ++c) {
    double sq = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) sq += squares[b * dim + c];
    out.stderr_[c] = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1) * inv_n) : 0.0;
  }
  return out;
}

namespace {

constexpr std::size_t kMaskBlock = 4096;
constexpr std::size_t kMaxEnumeratedWords = 30;

struct FreeWords {
  std::vector<std::size_t> indices;
  std::size_t d = 0;
};

FreeWords free_words(std::span<const double> omega, std::span<const std::size_t> excluded) {
  const std::size_t d = omega.size();
  std::vector<unsigned char> taken(d, 0);
  for (const std::size_t j : excluded) {
    if (j >= d) throw std::out_of_range("excluded index outside the dictionary");
    if (taken[j]) throw std::invalid_argument("excluded indices must be distinct");
    taken[j] = 1;
  }
  FreeWords out;
  out.d = d;
  for (std::size_t k = 0; k < d; ++k) {
    if (!taken[k]) out.indices.push_back(k);
  }
  return out;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// Unnormalized probability of one particular removed set of size s:
// 1 / C(d, s), the 1/d factor dropped. A size s carries C(m, s) such sets.
std::vector<double> subset_weights(std::size_t d, std::size_t m) {
  std::vector<double> w(m + 1, 0.0);
  for (std::size_t s = 1; s <= m; ++s) w[s] = 1.0 / binomial(d, s);
  return w;
}

double statistic_value(double mass, SubsetStatistic statistic) {
  if (statistic == SubsetStatistic::removed_mass) return mass;
  const double rest = 1.0 - mass;
  if (!(rest > 0.0)) throw std::domain_error("every word removed: renormalization undefined");
  return 1.0 / std::sqrt(rest);
}

void check_subset_args(const FreeWords& free, SubsetStatistic statistic) {
  if (free.d == 0) throw std::invalid_argument("empty local dictionary");
  if (free.indices.empty()) throw std::invalid_argument("every word is excluded");
  if (statistic == SubsetStatistic::renormalization && free.indices.size() == free.d) {
    throw std::domain_error("every word removed: renormalization undefined");
  }
}

}  // namespace

double enumerate_subset_expectation(std::span<const double> omega, std::span<const std::size_t> excluded,
                                    SubsetStatistic statistic, Execution exec) {
  const FreeWords free = free_words(omega, excluded);
  check_subset_args(free, statistic);
  const std::size_t m = free.indices.size();
  if (m > kMaxEnumeratedWords) throw std::invalid_argument("enumeration too large");

  const std::vector<double> size_weight = subset_weights(free.d, m);
  double normalizer = 0.0;
  for (std::size_t s = 1; s <= m; ++s) normalizer += binomial(m, s) * size_weight[s];

  std::vector<double> free_omega(m);
  for (std::size_t r = 0; r < m; ++r) free_omega[r] = omega[free.indices[r]];

  const std::uint64_t masks = std::uint64_t{1} << m;
  const auto mask_term = [&](std::uint64_t mask) {
    double mass = 0.0;
    std::size_t s = 0;
    for (std::size_t r = 0; r < m; ++r) {
      if (mask >> r & 1U) {
        mass += free_omega[r];
        ++s;
      }
    }
    return size_weight[s] * statistic_value(mass, statistic);
  };

  if (exec == Execution::serial) {
    CompensatedSum acc;
    for (std::uint64_t mask = 1; mask < masks; ++mask) acc.add(mask_term(mask));
    return acc.value() / normalizer;
  }

  const std::size_t blocks = block_count(static_cast<std::size_t>(masks), kMaskBlock);
  std::vector<double> partial(blocks, 0.0);
  const auto nblocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    CompensatedSum acc;
    const std::uint64_t begin = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(b) * kMaskBlock);
    const std::uint64_t end = std::min<std::uint64_t>(masks, static_cast<std::uint64_t>(b + 1) * kMaskBlock);
    for (std::uint64_t mask = begin; mask < end; ++mask) acc.add(mask_term(mask));
    partial[static_cast<std::size_t>(b)] = acc.value();
  }
  return compensated_sum(partial) / normalizer;
}

MonteCarloEstimate sample_subset_expectation(std::span<const double> omega, std::span<const std::size_t> excluded,
                                             SubsetStatistic statistic, std::size_t n, std::uint64_t seed,
                                             Execution exec) {
  const FreeWords free = free_words(omega, excluded);
  check_subset_args(free, statistic);
  if (n == 0) throw std::invalid_argument("number of Monte Carlo draws must be at least 1");
  const std::size_t m = free.indices.size();

  const std::vector<double> size_weight = subset_weights(free.d, m);
  std::vector<double> cdf(m + 1, 0.0);
  for (std::size_t s = 1; s <= m; ++s) cdf[s] = cdf[s - 1] + binomial(m, s) * size_weight[s];
  for (double& c : cdf) c /= cdf[m];

  std::vector<double> values(n);
  const auto fill_block = [&](std::size_t b) {
    RandomStream rng = RandomStream::derive(seed, b);
    std::vector<std::size_t> scratch(m);
    const std::size_t begin = b * kReductionBlock;
    const std::size_t end = std::min(n, begin + kReductionBlock);
    for (std::size_t i = begin; i < end; ++i) {
      const double u = rng.unit();
      const auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), u);
      const std::size_t s = it == cdf.end() ? m : static_cast<std::size_t>(it - cdf.begin());
      std::iota(scratch.begin(), scratch.end(), std::size_t{0});
      double mass = 0.0;
      for (std::size_t r = 0; r < s; ++r) {
        const std::size_t k = r + static_cast<std::size_t>(rng.below(m - r));
        std::swap(scratch[r], scratch[k]);
        mass += omega[free.indices[scratch[r]]];
      }
      values[i] = statistic_value(mass, statistic);
    }
  };

  const std::size_t blocks = block_count(n, kReductionBlock);
  MonteCarloEstimate out;
  if (exec == Execution::serial) {
    for (std::size_t b = 0; b < blocks; ++b) fill_block(b);
    double sum = 0.0;
    for (const double v : values) sum += v;
    out.mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stderr_ = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return out;
  }

  const auto nblocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) fill_block(static_cast<std::size_t>(b));

  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t end = std::min(n, begin + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += values[i];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double sum = 0.0;
  for (const double p : partial) sum += p;
  out.mean = sum / static_cast<double>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t end = std::min(n, begin + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += (values[i] - out.mean) * (values[i] - out.mean);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double sq = 0.0;
  for (const double p : partial) sq += p;
  out.stderr_ = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return out;
}

}  // namespace textlime
