#include "textlime/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace textlime {

using nlohmann::json;

namespace {

constexpr int kCsvDigits = 10;

bool has_json_lines_extension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  return ext == ".jsonl" || ext == ".ndjson";
}

bool looks_like_json_lines(std::istream& in) {
  const auto start = in.tellg();
  std::string line;
  bool json_lines = false;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '{') json_lines = json::accept(line);
    break;
  }
  in.clear();
  in.seekg(start);
  return json_lines;
}

// Scoped stream precision.
class Precision {
 public:
  Precision(std::ostream& out, int digits) : out_(out), saved_(out.precision(digits)) {}
  ~Precision() { out_.precision(saved_); }
  Precision(const Precision&) = delete;
  Precision& operator=(const Precision&) = delete;

 private:
  std::ostream& out_;
  std::streamsize saved_;
};

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::size_t> rank_order(std::span<const double> coefficients) {
  std::vector<std::size_t> order(coefficients.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(coefficients[a]) > std::abs(coefficients[b]); });
  return order;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json summary_to_json(const Summary& s) {
  return {{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max},
          {"mean", s.mean}, {"std", s.stddev}};
}

void write_summary_fields(std::ostream& out, const Summary& s) {
  out << s.median << ',' << s.q1 << ',' << s.q3 << ',' << s.min << ',' << s.max << ',' << s.stddev;
}

}  // namespace

Corpus parse_corpus(std::istream& in, bool json_lines) {
  Corpus corpus;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!json_lines) {
      Document doc = tokenize(line);
      doc.source_id = std::to_string(line_number - 1);
      corpus.documents.push_back(std::move(doc));
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("corpus line " + std::to_string(line_number) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("text") || !record["text"].is_string()) {
      throw std::runtime_error("corpus line " + std::to_string(line_number) + ": missing string field \"text\"");
    }
    Document doc = tokenize(record["text"].get<std::string>());
    if (record.contains("id")) {
      doc.source_id = record["id"].is_string() ? record["id"].get<std::string>() : record["id"].dump();
    } else {
      doc.source_id = std::to_string(corpus.documents.size());
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus '" + path.string() + "'");
  const bool json_lines = has_json_lines_extension(path) || looks_like_json_lines(in);
  return parse_corpus(in, json_lines);
}

json idf_to_json(const IdfTable& idf) {
  json entries = json::array();
  for (const auto& e : idf.entries()) entries.push_back({{"word", e.word}, {"doc_count", e.doc_count}, {"idf", e.idf}});
  return {{"n_documents", idf.n_documents()}, {"entries", std::move(entries)}};
}

IdfTable idf_from_json(const json& j) {
  std::vector<IdfTable::Entry> entries;
  for (const auto& e : j.at("entries")) {
    entries.push_back({e.at("word").get<std::string>(), e.at("doc_count").get<std::size_t>(), e.at("idf").get<double>()});
  }
  return IdfTable::from_entries(j.at("n_documents").get<std::size_t>(), std::move(entries));
}

namespace {

LinearModel linear_from_words(const json& coefficients, const LocalDictionary& local) {
  if (!coefficients.is_object()) throw std::invalid_argument("linear coefficients must map words to numbers");
  LinearModel model{std::vector<double>(local.size(), 0.0)};
  for (const auto& [word, value] : coefficients.items()) {
    if (!value.is_number()) throw std::invalid_argument("coefficient of '" + word + "' is not a number");
    const std::size_t j = local.index_of(word);
    if (j != LocalDictionary::npos) model.coefficients[j] = value.get<double>();
  }
  return model;
}

}  // namespace

Model model_from_json(const json& j, const LocalDictionary& local) {
  if (!j.is_object()) throw std::invalid_argument("model description must be a JSON object");
  if (!j.contains("type")) return linear_from_words(j, local);
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") return ConstantModel{j.value("value", 1.0)};
  if (type == "tree") return tree_from_spec(j.at("expr").get<std::string>(), local);
  if (type == "linear") return linear_from_words(j.at("coefficients"), local);
  if (type == "combination") {
    std::vector<std::pair<double, Model>> parts;
    for (const auto& part : j.at("parts")) parts.emplace_back(part.value("weight", 1.0), model_from_json(part.at("model"), local));
    return combine(parts);
  }
  throw std::invalid_argument("unknown model type '" + type + "'");
}

Model resolve_model_spec(std::string_view spec, const LocalDictionary& local) {
  if (spec == "constant") return ConstantModel{1.0};
  const std::filesystem::path path{std::string(spec)};
  if (path.extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file '" + path.string() + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::invalid_argument("model file '" + path.string() + "': " + e.what());
    }
    return model_from_json(j, local);
  }
  return tree_from_spec(spec, local);
}

std::string model_label(const Model& model) {
  switch (model.kind()) {
    case ModelKind::constant:
      return "constant";
    case ModelKind::indicator_product:
      return "indicator";
    case ModelKind::tree:
      return "tree";
    case ModelKind::linear:
      return "linear";
    case ModelKind::combination:
      return "combination";
  }
  return "model";
}

std::string output_filename(std::string_view experiment, std::string_view model, double nu, std::size_t n,
                            std::string_view extension) {
  std::ostringstream name;
  name << experiment << '-' << model << '-' << std::setprecision(6) << nu << '-' << n << '.' << extension;
  return name.str();
}

json explanation_to_json(const Explanation& e) {
  json coefficients = json::array();
  for (const std::size_t j : rank_order(e.coefficients)) {
    coefficients.push_back({{"word", e.words[j]}, {"coefficient", e.coefficients[j]}});
  }
  return {{"intercept", e.intercept},
          {"coefficients", std::move(coefficients)},
          {"meta",
           {{"n", e.meta.n},
            {"nu", e.meta.nu},
            {"ridge", e.meta.ridge},
            {"seed", e.meta.seed},
            {"minimum_norm", e.meta.minimum_norm}}}};
}

void write_explanation_csv(std::ostream& out, const Explanation& e) {
  const Precision precision(out, kCsvDigits);
  out << "word,coefficient,rank\n";
  out << kInterceptLabel << ',' << e.intercept << ",0\n";
  std::size_t rank = 1;
  for (const std::size_t j : rank_order(e.coefficients)) {
    out << csv_field(e.words[j]) << ',' << e.coefficients[j] << ',' << rank++ << '\n';
  }
}

json theory_to_json(const TheoryExplanation& t) {
  json coefficients = json::array();
  for (const std::size_t j : rank_order(t.coefficients)) {
    json row = {{"word", j < t.words.size() ? t.words[j] : std::to_string(j)}, {"coefficient", t.coefficients[j]}};
    if (!t.coefficient_stderr.empty()) row["stderr"] = t.coefficient_stderr[j];
    coefficients.push_back(std::move(row));
  }
  json out = {{"intercept", t.intercept},
              {"coefficients", std::move(coefficients)},
              {"provenance", std::string(provenance_name(t.provenance))}};
  if (t.intercept_stderr) out["intercept_stderr"] = *t.intercept_stderr;
  if (!t.note.empty()) out["note"] = t.note;
  return out;
}

void write_theory_csv(std::ostream& out, const TheoryExplanation& t) {
  const Precision precision(out, kCsvDigits);
  const bool with_error = !t.coefficient_stderr.empty();
  out << "word,coefficient,rank,provenance" << (with_error ? ",stderr" : "") << '\n';
  const std::string_view provenance = provenance_name(t.provenance);
  out << kInterceptLabel << ',' << t.intercept << ",0," << provenance;
  if (with_error) out << ',' << t.intercept_stderr.value_or(0.0);
  out << '\n';
  std::size_t rank = 1;
  for (const std::size_t j : rank_order(t.coefficients)) {
    out << csv_field(j < t.words.size() ? t.words[j] : std::to_string(j)) << ',' << t.coefficients[j] << ',' << rank++
        << ',' << provenance;
    if (with_error) out << ',' << t.coefficient_stderr[j];
    out << '\n';
  }
}

void write_alpha_table_csv(std::ostream& out, std::size_t d, std::span<const double> nus, std::size_t p_max) {
  if (p_max > d) throw std::invalid_argument("p_max must not exceed d");
  const Precision precision(out, kCsvDigits);
  out << "p,d,nu,alpha,limit,lower,upper\n";
  for (const double nu : nus) {
    const AlphaCoefficients alphas = alpha_coefficients(d, nu, p_max);
    for (std::size_t p = 0; p <= p_max; ++p) {
      const AlphaBounds b = alpha_bounds(p, d, nu);
      out << p << ',' << d << ',' << nu << ',' << alphas.values[p] << ',' << alpha_limit(p, d) << ',' << b.lower << ','
          << b.upper << '\n';
    }
  }
}

json run_statistics_to_json(const RunStatistics& stats) {
  json words = json::array();
  for (std::size_t j = 0; j < stats.d(); ++j) {
    json row = summary_to_json(stats.coefficients[j]);
    row["word"] = stats.words[j];
    words.push_back(std::move(row));
  }
  return {{"intercept", summary_to_json(stats.intercept)},
          {"words", std::move(words)},
          {"config",
           {{"n", stats.config.n},
            {"nu", stats.config.nu},
            {"ridge", stats.config.ridge},
            {"n_exp", stats.n_exp},
            {"seed", stats.master_seed}}}};
}

void write_run_statistics_csv(std::ostream& out, const RunStatistics& stats) {
  const Precision precision(out, kCsvDigits);
  out << "word,median,q1,q3,min,max,std\n";
  out << kInterceptLabel << ',';
  write_summary_fields(out, stats.intercept);
  out << '\n';
  for (std::size_t j = 0; j < stats.d(); ++j) {
    out << csv_field(stats.words[j]) << ',';
    write_summary_fields(out, stats.coefficients[j]);
    out << '\n';
  }
}

namespace {

json comparison_row_to_json(const ComparisonRow& row) {
  return {{"word", row.word},
          {"empirical_median", row.empirical_median},
          {"theory", row.theory},
          {"absolute_deviation", row.absolute_deviation},
          {"relative_deviation", finite_or_null(row.relative_deviation)},
          {"inside_iqr", row.inside_iqr},
          {"inside_range", row.inside_range}};
}

void write_comparison_row(std::ostream& out, const ComparisonRow& row) {
  out << csv_field(row.word) << ',' << row.empirical_median << ',' << row.theory << ',' << row.absolute_deviation << ','
      << row.relative_deviation << ',' << (row.inside_iqr ? 1 : 0) << ',' << (row.inside_range ? 1 : 0) << '\n';
}

}  // namespace

json comparison_to_json(const ComparisonReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) rows.push_back(comparison_row_to_json(row));
  return {{"provenance", std::string(provenance_name(report.provenance))},
          {"intercept", comparison_row_to_json(report.intercept)},
          {"words", std::move(rows)},
          {"summary",
           {{"max_absolute_deviation", report.max_absolute_deviation},
            {"mean_absolute_deviation", report.mean_absolute_deviation},
            {"all_inside_range", report.all_inside_range}}}};
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
  const Precision precision(out, kCsvDigits);
  out << "word,empirical_median,theory,absolute_deviation,relative_deviation,inside_iqr,inside_range\n";
  write_comparison_row(out, report.intercept);
  for (const auto& row : report.rows) write_comparison_row(out, row);
}

void write_comparison_table(std::ostream& out, const ComparisonReport& report) {
  std::size_t width = kInterceptLabel.size();
  for (const auto& row : report.rows) width = std::max(width, row.word.size());
  const auto old_flags = out.flags();
  const Precision precision(out, 4);
  out << std::left << std::setw(static_cast<int>(width)) << "word" << "  " << std::right << std::setw(10) << "median"
      << std::setw(10) << "theory" << std::setw(10) << "|dev|" << "  IQR  range\n";
  const auto line = [&](const ComparisonRow& row) {
    out << std::left << std::setw(static_cast<int>(width)) << row.word << "  " << std::right << std::fixed
        << std::setw(10) << row.empirical_median << std::setw(10) << row.theory << std::setw(10)
        << row.absolute_deviation << "  " << (row.inside_iqr ? "yes" : " no") << "  " << (row.inside_range ? "yes" : " no")
        << '\n';
    out.unsetf(std::ios::fixed);
  };
  line(report.intercept);
  for (const auto& row : report.rows) line(row);
  out << "provenance " << provenance_name(report.provenance) << ", max |dev| " << report.max_absolute_deviation
      << ", mean |dev| " << report.mean_absolute_deviation << '\n';
  out.flags(old_flags);
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  const Precision precision(out, kCsvDigits);
  out << "word,nu,median,q1,q3,min,max,std,theory\n";
  for (const auto& p : sweep.points) {
    out << csv_field(sweep.word) << ',' << p.nu << ',';
    write_summary_fields(out, p.summary);
    out << ',';
    if (p.theory) out << *p.theory;
    out << '\n';
  }
}

json sweep_to_json(const SweepResult& sweep) {
  json points = json::array();
  for (const auto& p : sweep.points) {
    json row = summary_to_json(p.summary);
    row["nu"] = p.nu;
    row["theory"] = p.theory ? json(*p.theory) : json(nullptr);
    points.push_back(std::move(row));
  }
  return {{"word", sweep.word}, {"points", std::move(points)}};
}

}  // namespace textlime
