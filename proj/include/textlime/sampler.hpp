#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "textlime/execution.hpp"
#include "textlime/random.hpp"
#include "textlime/tfidf.hpp"

namespace textlime {

inline constexpr std::size_t kDefaultSamples = 5000;
inline constexpr double kDefaultBandwidth = 0.25;

// The reference LIME code scales the cosine distance by 100.
inline double bandwidth_from_lime(double nu_lime) { return nu_lime / 100.0; }

/// One draw of removed word indices: s ~ U{1..d}, then S a uniform s-subset.
/// Indices are 0-based positions in the local dictionary, sorted ascending.
struct RemovalDraw {
  std::size_t s = 0;
  std::vector<std::size_t> removed;
};

// Throws std::invalid_argument("empty local dictionary") when d = 0.
RemovalDraw draw_removal(std::size_t d, RandomStream& rng);

// Keeps every token of xi whose word index is not in `removed`, in order.
Document apply_removal(const Document& xi, const LocalDictionary& local, std::span<const std::size_t> removed);

// 1 - u.v / (|u||v|). Throws std::domain_error("undefined cosine distance")
// when either vector has zero norm.
double cosine_distance(std::span<const double> u, std::span<const double> v);

// Weight of a sample with a fraction t of its distinct words removed:
//   psi(t) = exp(-(1 - sqrt(1 - t))^2 / (2 nu^2)).
double psi(double t, double nu);

// Kernel weight exp(-dcos(1, z)^2 / (2 nu^2)) of a binary feature vector.
// The all-zero z (every word removed) gets psi(1).
double weight(std::span<const unsigned char> z, double nu);

struct PerturbedSample {
  RemovalDraw draw;
  std::vector<unsigned char> z;
  double weight = 0.0;
};

/// n i.i.d. perturbed samples stored row-major: z(i, j) = 1 iff word j
/// survives in sample i. Sample i is drawn from the stream
/// derive(seed, i / kSampleBlock), so the batch does not depend on how the
/// work is scheduled.
class SampleBatch {
 public:
  static constexpr std::size_t kSampleBlock = 256;

  SampleBatch() = default;
  SampleBatch(std::size_t d, std::size_t n, double nu, std::uint64_t seed);

  std::size_t d() const { return d_; }
  std::size_t size() const { return removed_counts_.size(); }
  double nu() const { return nu_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const unsigned char> z(std::size_t i) const { return {z_.data() + i * d_, d_}; }
  std::span<unsigned char> z(std::size_t i) { return {z_.data() + i * d_, d_}; }
  std::size_t removed_count(std::size_t i) const { return removed_counts_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  void set_draw(std::size_t i, std::size_t s, double w) {
    removed_counts_[i] = s;
    weights_[i] = w;
  }

  PerturbedSample sample(std::size_t i) const;
  Document survivor(std::size_t i, const Document& xi, const LocalDictionary& local) const;

  // Reorders samples; used to check permutation invariance downstream.
  SampleBatch permuted(std::span<const std::size_t> order) const;

  bool operator==(const SampleBatch&) const = default;

 private:
  std::size_t d_ = 0;
  double nu_ = kDefaultBandwidth;
  std::uint64_t seed_ = 0;
  std::vector<unsigned char> z_;
  std::vector<std::size_t> removed_counts_;
  std::vector<double> weights_;
};

// Throws std::invalid_argument for d = 0, n = 0 or nu <= 0.
SampleBatch sample_batch(const LocalDictionary& local, std::size_t n, double nu, std::uint64_t seed,
                         Execution exec = Execution::parallel);
SampleBatch sample_batch(std::size_t d, std::size_t n, double nu, std::uint64_t seed,
                         Execution exec = Execution::parallel);

// Columns: run,sample,s,z,weight (z as a 0/1 string in dictionary order).
void write_batch_csv(std::ostream& out, const SampleBatch& batch, std::size_t run, bool header = true);

}  // namespace textlime
