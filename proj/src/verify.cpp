#include "textlime/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <stdexcept>

#include "textlime/random.hpp"
#include "textlime/sampler.hpp"

namespace textlime {

std::vector<double> RunStatistics::column(std::size_t c) const {
  std::vector<double> values;
  values.reserve(runs.size());
  for (const auto& run : runs) values.push_back(c == 0 ? run.intercept : run.coefficients.at(c - 1));
  return values;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run) {
  return RandomStream::derive(master_seed, run).seed();
}

RunStatistics summarize_runs(std::vector<Explanation> runs, const ExplainConfig& config, std::uint64_t master_seed) {
  if (runs.empty()) throw std::invalid_argument("need n_exp >= 1");
  RunStatistics stats;
  stats.words = runs.front().words;
  stats.config = config;
  stats.n_exp = runs.size();
  stats.master_seed = master_seed;
  stats.runs = std::move(runs);
  for (const auto& run : stats.runs) {
    if (run.words != stats.words) throw std::invalid_argument("runs over different dictionaries");
  }
  stats.intercept = summarize(stats.column(0));
  for (std::size_t j = 0; j < stats.words.size(); ++j) stats.coefficients.push_back(summarize(stats.column(j + 1)));
  return stats;
}

RunStatistics run_repeated(const Model& model, const LocalEmbedding& embedding, const ExplainConfig& config,
                           std::size_t n_exp, std::uint64_t master_seed, Execution exec) {
  if (n_exp == 0) throw std::invalid_argument("need n_exp >= 1");
  std::vector<Explanation> runs(n_exp);
  const auto run_one = [&](std::size_t r) {
    ExplainConfig c = config;
    c.seed = run_seed(master_seed, r);
    c.exec = exec;
    runs[r] = explain(model, embedding, c);
  };
  if (exec == Execution::serial) {
    for (std::size_t r = 0; r < n_exp; ++r) run_one(r);
  } else {
    const auto nn = static_cast<std::ptrdiff_t>(n_exp);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < nn; ++r) {
      try {
        run_one(static_cast<std::size_t>(r));
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return summarize_runs(std::move(runs), config, master_seed);
}

namespace {

ComparisonRow compare_row(std::string word, const Summary& s, double theory) {
  ComparisonRow row;
  row.word = std::move(word);
  row.empirical_median = s.median;
  row.theory = theory;
  row.absolute_deviation = std::abs(s.median - theory);
  if (theory != 0.0) {
    row.relative_deviation = row.absolute_deviation / std::abs(theory);
  } else {
    row.relative_deviation = row.absolute_deviation == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  row.inside_iqr = s.q1 <= theory && theory <= s.q3;
  row.inside_range = s.min <= theory && theory <= s.max;
  return row;
}

}  // namespace

const ComparisonRow& ComparisonReport::row(std::string_view word) const {
  if (word == kInterceptLabel) return intercept;
  for (const auto& r : rows) {
    if (r.word == word) return r;
  }
  throw std::invalid_argument("unknown word '" + std::string(word) + "'");
}

ComparisonReport compare(const RunStatistics& stats, const TheoryExplanation& theory) {
  if (theory.words.size() != stats.words.size() || theory.coefficients.size() != stats.words.size()) {
    throw std::invalid_argument("dictionary mismatch");
  }
  std::map<std::string, double, std::less<>> by_word;
  for (std::size_t j = 0; j < theory.words.size(); ++j) by_word.emplace(theory.words[j], theory.coefficients[j]);

  ComparisonReport report;
  report.provenance = theory.provenance;
  report.intercept = compare_row(std::string(kInterceptLabel), stats.intercept, theory.intercept);
  report.all_inside_range = true;
  double total = 0.0;
  for (std::size_t j = 0; j < stats.words.size(); ++j) {
    const auto it = by_word.find(stats.words[j]);
    if (it == by_word.end()) throw std::invalid_argument("dictionary mismatch");
    report.rows.push_back(compare_row(stats.words[j], stats.coefficients[j], it->second));
    const auto& row = report.rows.back();
    report.max_absolute_deviation = std::max(report.max_absolute_deviation, row.absolute_deviation);
    total += row.absolute_deviation;
    report.all_inside_range = report.all_inside_range && row.inside_range;
  }
  report.mean_absolute_deviation = report.rows.empty() ? 0.0 : total / static_cast<double>(report.rows.size());
  return report;
}

std::vector<double> default_bandwidth_grid() {
  constexpr std::size_t points = 24;
  const double lo = std::log(0.03);
  const double hi = std::log(3.0);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  grid.front() = 0.03;
  grid.back() = 3.0;
  return grid;
}

std::optional<TheoryExplanation> closed_form_theory(const Model& model, const LocalEmbedding& embedding, double nu) {
  const auto tree = indicator_expansion(model);
  if (!tree) return std::nullopt;
  TheoryExplanation out = beta_tree(*tree, embedding.d(), nu);
  out.with_words(embedding.dictionary());
  return out;
}

SweepResult sweep_bandwidth(const Model& model, const LocalEmbedding& embedding, std::string_view word,
                            std::span<const double> nu_grid, const ExplainConfig& config, std::size_t n_exp,
                            std::uint64_t master_seed, Execution exec) {
  const std::size_t j = embedding.dictionary().index_of(word);
  if (j == LocalDictionary::npos) throw std::invalid_argument("unknown word '" + std::string(word) + "'");
  if (nu_grid.empty()) throw std::invalid_argument("empty bandwidth grid");
  SweepResult out;
  out.word = std::string(word);
  for (std::size_t i = 0; i < nu_grid.size(); ++i) {
    const double nu = nu_grid[i];
    if (!(nu > 0.0)) throw std::invalid_argument("bandwidth grid must be positive");
    ExplainConfig c = config;
    c.nu = nu;
    const RunStatistics stats = run_repeated(model, embedding, c, n_exp, run_seed(master_seed, i), exec);
    SweepPoint point{nu, stats.coefficients[j], std::nullopt};
    if (embedding.d() >= 2) {
      if (const auto theory = closed_form_theory(model, embedding, nu)) point.theory = theory->coefficients[j];
    }
    out.points.push_back(point);
  }
  return out;
}

namespace {

LinearityRow linearity_row(std::string word, const Summary& f, const Summary& g, const Summary& fg) {
  LinearityRow row;
  row.word = std::move(word);
  row.combined_median = fg.median;
  row.summed_median = f.median + g.median;
  row.deviation = std::abs(row.combined_median - row.summed_median);
  row.envelope = 3.0 * std::sqrt(f.stddev * f.stddev + g.stddev * g.stddev + fg.stddev * fg.stddev);
  row.within = row.deviation <= row.envelope;
  return row;
}

}  // namespace

LinearityReport linearity_check(const Model& f, const Model& g, const LocalEmbedding& embedding,
                                const ExplainConfig& config, std::size_t n_exp, std::uint64_t master_seed,
                                Execution exec) {
  if (n_exp < 2) throw std::invalid_argument("need n_exp >= 2 for std");
  const Model fg = combine({{1.0, f}, {1.0, g}});
  const RunStatistics sf = run_repeated(f, embedding, config, n_exp, run_seed(master_seed, 0), exec);
  const RunStatistics sg = run_repeated(g, embedding, config, n_exp, run_seed(master_seed, 1), exec);
  const RunStatistics sfg = run_repeated(fg, embedding, config, n_exp, run_seed(master_seed, 2), exec);

  LinearityReport report;
  report.intercept = linearity_row(std::string(kInterceptLabel), sf.intercept, sg.intercept, sfg.intercept);
  report.all_within = report.intercept.within;
  for (std::size_t j = 0; j < sf.d(); ++j) {
    report.rows.push_back(linearity_row(sf.words[j], sf.coefficients[j], sg.coefficients[j], sfg.coefficients[j]));
    report.all_within = report.all_within && report.rows.back().within;
  }

  const auto tf = closed_form_theory(f, embedding, config.nu);
  const auto tg = closed_form_theory(g, embedding, config.nu);
  const auto tfg = closed_form_theory(fg, embedding, config.nu);
  if (tf && tg && tfg) {
    const TheoryExplanation sum = linear_combination(1.0, *tf, 1.0, *tg);
    double worst = std::abs(tfg->intercept - sum.intercept);
    for (std::size_t j = 0; j < sum.d(); ++j) worst = std::max(worst, std::abs(tfg->coefficients[j] - sum.coefficients[j]));
    report.closed_form_deviation = worst;
    report.theory_sum = sum;
  }
  return report;
}

ConcentrationReport concentration_check(const Model& model, const LocalEmbedding& embedding,
                                        std::span<const std::size_t> n_grid, const ExplainConfig& config,
                                        std::size_t n_exp, std::uint64_t master_seed, Execution exec) {
  if (n_exp < 2) throw std::invalid_argument("need n_exp >= 2 for std");
  if (n_grid.size() < 2) throw std::invalid_argument("need at least two sample sizes");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("sample sizes must be increasing");
  }
  ConcentrationReport report;
  report.words = embedding.dictionary().words;
  const std::size_t d = embedding.d();
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    ExplainConfig c = config;
    c.n = n_grid[i];
    const RunStatistics stats = run_repeated(model, embedding, c, n_exp, run_seed(master_seed, i), exec);
    ConcentrationRow row;
    row.n = n_grid[i];
    for (std::size_t j = 0; j < d; ++j) row.stddev.push_back(stats.coefficients[j].stddev);
    if (!report.rows.empty()) {
      const auto& previous = report.rows.back().stddev;
      for (std::size_t j = 0; j < d; ++j) {
        row.ratio.push_back(previous[j] > 0.0 ? row.stddev[j] / previous[j] : std::numeric_limits<double>::quiet_NaN());
      }
    }
    report.rows.push_back(std::move(row));
  }

  std::vector<double> log_n;
  for (const std::size_t n : n_grid) log_n.push_back(std::log(static_cast<double>(n)));
  double total = 0.0;
  std::size_t finite = 0;
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> log_std;
    bool positive = true;
    for (const auto& row : report.rows) {
      positive = positive && row.stddev[j] > 0.0;
      log_std.push_back(positive ? std::log(row.stddev[j]) : 0.0);
    }
    const double slope = positive ? fitted_slope(log_n, log_std) : std::numeric_limits<double>::quiet_NaN();
    report.slopes.push_back(slope);
    if (std::isfinite(slope)) {
      total += slope;
      ++finite;
    }
  }
  report.mean_slope = finite > 0 ? total / static_cast<double>(finite) : std::numeric_limits<double>::quiet_NaN();
  return report;
}

std::vector<MonteCarloEstimate> mc_alpha(std::size_t d, double nu, std::size_t n_mc, std::size_t p_max,
                                         std::uint64_t seed, Execution exec) {
  if (p_max > d) throw std::invalid_argument("p_max must not exceed d");
  const SampleBatch batch = sample_batch(d, n_mc, nu, seed, exec);
  std::vector<MonteCarloEstimate> out;
  std::vector<double> values(batch.size());
  for (std::size_t p = 0; p <= p_max; ++p) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto z = batch.z(i);
      bool all = true;
      for (std::size_t k = 0; k < p && all; ++k) all = z[k] != 0;
      values[i] = all ? batch.weight(i) : 0.0;
    }
    MonteCarloEstimate est;
    est.mean = mean(values);
    est.stderr_ = values.size() > 1 ? sample_std(values) / std::sqrt(static_cast<double>(values.size())) : 0.0;
    out.push_back(est);
  }
  return out;
}

}  // namespace textlime
