#include "textlime/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace textlime {

namespace {

// Partial Fisher-Yates over a caller-owned index buffer of size d. On return
// the first s entries of `scratch` hold the removed indices (unsorted).
std::size_t draw_into(std::size_t d, RandomStream& rng, std::vector<std::size_t>& scratch) {
  scratch.resize(d);
  std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  const std::size_t s = 1 + static_cast<std::size_t>(rng.below(d));
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t k = i + static_cast<std::size_t>(rng.below(d - i));
    std::swap(scratch[i], scratch[k]);
  }
  return s;
}

void check_batch_args(std::size_t d, std::size_t n, double nu) {
  if (d == 0) throw std::invalid_argument("empty local dictionary");
  if (n == 0) throw std::invalid_argument("number of samples must be at least 1");
  if (!(nu > 0.0)) throw std::invalid_argument("bandwidth must be positive");
}

void fill_block(SampleBatch& batch, std::size_t block, const std::vector<double>& psi_table) {
  const std::size_t d = batch.d();
  const std::size_t begin = block * SampleBatch::kSampleBlock;
  const std::size_t end = std::min(batch.size(), begin + SampleBatch::kSampleBlock);
  RandomStream rng = RandomStream::derive(batch.seed(), block);
  std::vector<std::size_t> scratch;
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t s = draw_into(d, rng, scratch);
    auto z = batch.z(i);
    std::fill(z.begin(), z.end(), static_cast<unsigned char>(1));
    for (std::size_t r = 0; r < s; ++r) z[scratch[r]] = 0;
    batch.set_draw(i, s, psi_table[s]);
  }
}

}  // namespace

RemovalDraw draw_removal(std::size_t d, RandomStream& rng) {
  if (d == 0) throw std::invalid_argument("empty local dictionary");
  std::vector<std::size_t> scratch;
  RemovalDraw draw;
  draw.s = draw_into(d, rng, scratch);
  draw.removed.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(draw.s));
  std::sort(draw.removed.begin(), draw.removed.end());
  return draw;
}

Document apply_removal(const Document& xi, const LocalDictionary& local, std::span<const std::size_t> removed) {
  std::vector<unsigned char> gone(local.size(), 0);
  for (const std::size_t j : removed) {
    if (j >= local.size()) throw std::out_of_range("removed index outside the local dictionary");
    gone[j] = 1;
  }
  Document out;
  out.source_id = xi.source_id;
  for (const auto& token : xi.tokens) {
    const std::size_t j = local.index_of(token);
    if (j == LocalDictionary::npos || !gone[j]) out.tokens.push_back(token);
  }
  return out;
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine distance of vectors of different sizes");
  double uv = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    uv += u[j] * v[j];
    uu += u[j] * u[j];
    vv += v[j] * v[j];
  }
  if (uu == 0.0 || vv == 0.0) throw std::domain_error("undefined cosine distance");
  return 1.0 - uv / (std::sqrt(uu) * std::sqrt(vv));
}

double psi(double t, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("psi argument must lie in [0, 1]");
  const double r = 1.0 - std::sqrt(1.0 - t);
  return std::exp(-r * r / (2.0 * nu * nu));
}

double weight(std::span<const unsigned char> z, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const std::size_t d = z.size();
  std::vector<double> ones(d, 1.0);
  std::vector<double> zd(d);
  std::size_t kept = 0;
  for (std::size_t j = 0; j < d; ++j) {
    zd[j] = z[j] ? 1.0 : 0.0;
    kept += z[j] ? 1 : 0;
  }
  if (kept == 0) return psi(1.0, nu);
  const double dist = cosine_distance(ones, zd);
  return std::exp(-dist * dist / (2.0 * nu * nu));
}

SampleBatch::SampleBatch(std::size_t d, std::size_t n, double nu, std::uint64_t seed)
    : d_(d), nu_(nu), seed_(seed), z_(d * n, 1), removed_counts_(n, 0), weights_(n, 0.0) {}

PerturbedSample SampleBatch::sample(std::size_t i) const {
  PerturbedSample out;
  const auto row = z(i);
  out.z.assign(row.begin(), row.end());
  out.draw.s = removed_counts_[i];
  for (std::size_t j = 0; j < d_; ++j) {
    if (!row[j]) out.draw.removed.push_back(j);
  }
  out.weight = weights_[i];
  return out;
}

Document SampleBatch::survivor(std::size_t i, const Document& xi, const LocalDictionary& local) const {
  return apply_removal(xi, local, sample(i).draw.removed);
}

SampleBatch SampleBatch::permuted(std::span<const std::size_t> order) const {
  if (order.size() != size()) throw std::invalid_argument("permutation size mismatch");
  SampleBatch out(d_, size(), nu_, seed_);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto src = z(order[i]);
    std::copy(src.begin(), src.end(), out.z(i).begin());
    out.set_draw(i, removed_counts_[order[i]], weights_[order[i]]);
  }
  return out;
}

SampleBatch sample_batch(std::size_t d, std::size_t n, double nu, std::uint64_t seed, Execution exec) {
  check_batch_args(d, n, nu);
  std::vector<double> psi_table(d + 1);
  for (std::size_t s = 0; s <= d; ++s) psi_table[s] = psi(static_cast<double>(s) / static_cast<double>(d), nu);

  SampleBatch batch(d, n, nu, seed);
  const std::size_t blocks = (n + SampleBatch::kSampleBlock - 1) / SampleBatch::kSampleBlock;
  if (exec == Execution::serial) {
    for (std::size_t b = 0; b < blocks; ++b) fill_block(batch, b, psi_table);
  } else {
    const auto nblocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < nblocks; ++b) fill_block(batch, static_cast<std::size_t>(b), psi_table);
  }
  return batch;
}

SampleBatch sample_batch(const LocalDictionary& local, std::size_t n, double nu, std::uint64_t seed,
                         Execution exec) {
  return sample_batch(local.size(), n, nu, seed, exec);
}

void write_batch_csv(std::ostream& out, const SampleBatch& batch, std::size_t run, bool header) {
  if (header) out << "run,sample,s,z,weight\n";
  const auto old_precision = out.precision(10);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::string bits;
    for (const unsigned char b : batch.z(i)) bits.push_back(b ? '1' : '0');
    out << run << ',' << i << ',' << batch.removed_count(i) << ',' << bits << ',' << batch.weight(i) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace textlime
