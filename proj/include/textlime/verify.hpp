#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "textlime/execution.hpp"
#include "textlime/kernels.hpp"
#include "textlime/models.hpp"
#include "textlime/stats.hpp"
#include "textlime/surrogate.hpp"
#include "textlime/theory.hpp"

namespace textlime {

inline constexpr std::size_t kDefaultRepetitions = 100;

/// Per-word whisker statistics of n_exp independent explanations.
struct RunStatistics {
  std::vector<std::string> words;
  Summary intercept;
  std::vector<Summary> coefficients;
  std::vector<Explanation> runs;
  ExplainConfig config;  // seed field unused; see master_seed
  std::size_t n_exp = 0;
  std::uint64_t master_seed = 0;

  std::size_t d() const { return coefficients.size(); }
  // Values of coordinate c over the runs; c = 0 is the intercept.
  std::vector<double> column(std::size_t c) const;
};

// Seed of repetition `run`, derived from the master seed.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run);

RunStatistics summarize_runs(std::vector<Explanation> runs, const ExplainConfig& config, std::uint64_t master_seed);

/// Repetitions run in parallel across runs when exec is parallel; every run
/// uses the same kernels regardless, so the result does not depend on the
/// schedule.
RunStatistics run_repeated(const Model& model, const LocalEmbedding& embedding, const ExplainConfig& config,
                           std::size_t n_exp, std::uint64_t master_seed, Execution exec = Execution::parallel);

struct ComparisonRow {
  std::string word;  // "(intercept)" for the intercept row
  double empirical_median = 0.0;
  double theory = 0.0;
  double absolute_deviation = 0.0;
  double relative_deviation = 0.0;  // infinity when theory = 0 and the deviation is not
  bool inside_iqr = false;
  bool inside_range = false;  // within [min, max]
};

struct ComparisonReport {
  Provenance provenance = Provenance::exact_closed_form;
  ComparisonRow intercept;
  std::vector<ComparisonRow> rows;  // in the order of the statistics' words
  double max_absolute_deviation = 0.0;
  double mean_absolute_deviation = 0.0;
  bool all_inside_range = false;

  const ComparisonRow& row(std::string_view word) const;
};

inline constexpr std::string_view kInterceptLabel = "(intercept)";

// Words are matched by name. Throws std::invalid_argument("dictionary
// mismatch") when the word sets differ.
ComparisonReport compare(const RunStatistics& stats, const TheoryExplanation& theory);

std::vector<double> default_bandwidth_grid();

struct SweepPoint {
  double nu = 0.0;
  Summary summary;
  std::optional<double> theory;  // closed form when the model admits one
};

struct SweepResult {
  std::string word;
  std::vector<SweepPoint> points;
};

SweepResult sweep_bandwidth(const Model& model, const LocalEmbedding& embedding, std::string_view word,
                            std::span<const double> nu_grid, const ExplainConfig& config, std::size_t n_exp,
                            std::uint64_t master_seed, Execution exec = Execution::parallel);

struct LinearityRow {
  std::string word;
  double combined_median = 0.0;  // explain(f + g)
  double summed_median = 0.0;    // explain(f) + explain(g)
  double deviation = 0.0;
  double envelope = 0.0;  // 3 x pooled std
  bool within = false;
};

struct LinearityReport {
  LinearityRow intercept;
  std::vector<LinearityRow> rows;
  bool all_within = false;
  // max |beta^{f+g} - beta^f - beta^g| over all coordinates, when both models
  // have an exact closed form.
  std::optional<double> closed_form_deviation;
  std::optional<TheoryExplanation> theory_sum;
};

LinearityReport linearity_check(const Model& f, const Model& g, const LocalEmbedding& embedding,
                                const ExplainConfig& config, std::size_t n_exp, std::uint64_t master_seed,
                                Execution exec = Execution::parallel);

struct ConcentrationRow {
  std::size_t n = 0;
  std::vector<double> stddev;  // per word
  std::vector<double> ratio;  // std(n) / std(previous n); empty for the first row
};

struct ConcentrationReport {
  std::vector<std::string> words;
  std::vector<ConcentrationRow> rows;
  std::vector<double> slopes;  // per word; NaN when a std vanishes
  double mean_slope = 0.0;     // over words with a finite slope
};

ConcentrationReport concentration_check(const Model& model, const LocalEmbedding& embedding,
                                        std::span<const std::size_t> n_grid, const ExplainConfig& config,
                                        std::size_t n_exp, std::uint64_t master_seed,
                                        Execution exec = Execution::parallel);

/// Monte Carlo estimates of alpha_0..alpha_{p_max} from raw sampler output:
/// the mean of pi z_1 ... z_p.
std::vector<MonteCarloEstimate> mc_alpha(std::size_t d, double nu, std::size_t n_mc, std::size_t p_max,
                                         std::uint64_t seed, Execution exec = Execution::parallel);

/// The exact closed form when the model expands into indicator products,
/// nullopt otherwise.
std::optional<TheoryExplanation> closed_form_theory(const Model& model, const LocalEmbedding& embedding, double nu);

}  // namespace textlime
