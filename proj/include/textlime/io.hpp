#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "textlime/models.hpp"
#include "textlime/surrogate.hpp"
#include "textlime/theory.hpp"
#include "textlime/tfidf.hpp"
#include "textlime/verify.hpp"

namespace textlime {

/// Plain text with one document per line, or JSON lines with a "text" field
/// (and an optional "id"). JSON lines are recognized by a .jsonl/.ndjson
/// extension or by a first non-blank line that opens a JSON object.
Corpus read_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in, bool json_lines);

nlohmann::json idf_to_json(const IdfTable& idf);
IdfTable idf_from_json(const nlohmann::json& j);

/// Model descriptions:
///   {"type": "constant", "value": 1}
///   {"type": "tree", "expr": "\"food\" + (!\"food\" & \"about\")"}
///   {"type": "linear", "coefficients": {"food": 0.3, "bad": -1.2}}
///   {"type": "combination", "parts": [{"weight": 1, "model": {...}}, ...]}
/// A bare object of word -> number is read as a linear model. Words absent
/// from the local dictionary never occur in a perturbed document and drop out.
Model model_from_json(const nlohmann::json& j, const LocalDictionary& local);

/// "constant", a path to a .json model description, or a tree expression.
Model resolve_model_spec(std::string_view spec, const LocalDictionary& local);

// Short label used in output file names.
std::string model_label(const Model& model);

// <experiment>-<model>-<nu>-<n>.<extension>
std::string output_filename(std::string_view experiment, std::string_view model, double nu, std::size_t n,
                            std::string_view extension);

// Coefficients sorted by |coefficient| descending, ties by dictionary order.
nlohmann::json explanation_to_json(const Explanation& e);
void write_explanation_csv(std::ostream& out, const Explanation& e);

nlohmann::json theory_to_json(const TheoryExplanation& t);
void write_theory_csv(std::ostream& out, const TheoryExplanation& t);

void write_alpha_table_csv(std::ostream& out, std::size_t d, std::span<const double> nus, std::size_t p_max);

nlohmann::json run_statistics_to_json(const RunStatistics& stats);
void write_run_statistics_csv(std::ostream& out, const RunStatistics& stats);

nlohmann::json comparison_to_json(const ComparisonReport& report);
void write_comparison_csv(std::ostream& out, const ComparisonReport& report);
void write_comparison_table(std::ostream& out, const ComparisonReport& report);

void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
nlohmann::json sweep_to_json(const SweepResult& sweep);

}  // namespace textlime
