#include "textlime/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "textlime/io.hpp"
#include "textlime/subsets.hpp"
#include "textlime/surrogate.hpp"
#include "textlime/theory.hpp"
#include "textlime/verify.hpp"

namespace textlime {

namespace {

namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what) : std::runtime_error(field + ": " + what) {}
};

struct Options {
  std::string corpus;
  std::string idf_path;
  std::string save_idf;
  std::string doc;
  std::string model = "constant";
  std::size_t n = kDefaultSamples;
  std::optional<double> nu;
  std::optional<double> nu_lime;
  double ridge = 0.0;
  std::size_t n_exp = kDefaultRepetitions;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string format = "csv";
  int threads = 0;

  std::string linear_mode = "simplified";
  std::string e_method = "auto";
  std::size_t n_mc = 200000;
  bool force_mc = false;

  std::string word;
  std::vector<double> nu_grid;

  std::size_t d = 0;
  std::optional<std::size_t> p_max;

  double bandwidth() const {
    if (nu) return *nu;
    if (nu_lime) return bandwidth_from_lime(*nu_lime);
    return kDefaultBandwidth;
  }

  ExplainConfig explain_config() const { return {n, bandwidth(), ridge, seed, Execution::parallel}; }
};

// Everything derived from the corpus, the document selector and the model.
struct Setup {
  IdfTable idf;
  Document document;
  std::optional<LocalEmbedding> embedding;
  Model model;
};

void add_threads(CLI::App& sub, Options& o) {
  sub.add_option("--threads", o.threads, "Cap on worker threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber)
      ->envname("TEXTLIME_THREADS");
}

void add_output(CLI::App& sub, Options& o) {
  sub.add_option("--out", o.out, "Output directory")->envname("TEXTLIME_OUT");
  sub.add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->envname("TEXTLIME_FORMAT");
}

void add_bandwidth(CLI::App& sub, Options& o) {
  auto* nu = sub.add_option("--nu", o.nu, "Kernel bandwidth nu (default 0.25)")
                 ->check(CLI::PositiveNumber)
                 ->envname("TEXTLIME_NU");
  auto* nu_lime = sub.add_option("--nu-lime", o.nu_lime, "Kernel width in reference-implementation units (nu * 100)")
                      ->check(CLI::PositiveNumber)
                      ->envname("TEXTLIME_NU_LIME");
  nu->excludes(nu_lime);
}

void add_document(CLI::App& sub, Options& o) {
  sub.add_option("--corpus", o.corpus, "Corpus: text file, one document per line, or JSON lines with \"text\"")
      ->required()
      ->envname("TEXTLIME_CORPUS");
  sub.add_option("--idf", o.idf_path, "Load IDF values from this JSON file instead of fitting them")
      ->envname("TEXTLIME_IDF");
  sub.add_option("--save-idf", o.save_idf, "Write the fitted IDF table as JSON");
  sub.add_option("--doc", o.doc, "Document to explain: a 0-based line index into the corpus, or inline text")
      ->required()
      ->envname("TEXTLIME_DOC");
  sub.add_option("--model", o.model, "\"constant\", a .json model file, or a tree expression")
      ->envname("TEXTLIME_MODEL");
}

void add_sampling(CLI::App& sub, Options& o) {
  sub.add_option("--n", o.n, "Perturbed samples per explanation")->check(CLI::PositiveNumber)->envname("TEXTLIME_N");
  sub.add_option("--ridge", o.ridge, "Ridge penalty of the surrogate")
      ->check(CLI::NonNegativeNumber)
      ->envname("TEXTLIME_RIDGE");
  sub.add_option("--seed", o.seed, "Master seed")->envname("TEXTLIME_SEED");
}

void add_repetitions(CLI::App& sub, Options& o) {
  sub.add_option("--n-exp", o.n_exp, "Repetitions of the explanation")
      ->check(CLI::PositiveNumber)
      ->envname("TEXTLIME_N_EXP");
}

void add_theory_options(CLI::App& sub, Options& o) {
  sub.add_option("--linear-mode", o.linear_mode, "Linear-model theory: simplified, full or exact-limit")
      ->check(CLI::IsMember({"simplified", "full", "exact-limit"}));
  sub.add_option("--e-method", o.e_method, "E-term evaluation for linear models: auto, exact, approx or mc")
      ->check(CLI::IsMember({"auto", "exact", "approx", "mc"}));
  sub.add_option("--n-mc", o.n_mc, "Monte Carlo draws for theory estimates")
      ->check(CLI::PositiveNumber)
      ->envname("TEXTLIME_N_MC");
  sub.add_flag("--mc", o.force_mc, "Use the Monte Carlo oracle even when a closed form exists");
}

bool is_index(const std::string& text) {
  return !text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

Setup prepare(const Options& o) {
  if (o.threads > 0) set_thread_limit(o.threads);
  if (!fs::exists(o.corpus)) throw ConfigError("--corpus", "no such file '" + o.corpus + "'");

  Corpus corpus;
  try {
    corpus = read_corpus(o.corpus);
  } catch (const std::exception& e) {
    throw ConfigError("--corpus", e.what());
  }

  Setup s;
  if (!o.idf_path.empty()) {
    std::ifstream in(o.idf_path);
    if (!in) throw ConfigError("--idf", "cannot open '" + o.idf_path + "'");
    try {
      nlohmann::json j;
      in >> j;
      s.idf = idf_from_json(j);
    } catch (const std::exception& e) {
      throw ConfigError("--idf", e.what());
    }
  } else {
    try {
      s.idf = IdfTable::fit(corpus);
    } catch (const std::exception& e) {
      throw ConfigError("--corpus", e.what());
    }
  }
  if (!o.save_idf.empty()) {
    std::ofstream idf_out(o.save_idf);
    if (!idf_out) throw ConfigError("--save-idf", "cannot write '" + o.save_idf + "'");
    idf_out << idf_to_json(s.idf).dump(2) << '\n';
  }

  if (is_index(o.doc)) {
    const std::size_t index = std::stoull(o.doc);
    if (index >= corpus.size()) {
      throw ConfigError("--doc", "index " + o.doc + " out of range (corpus has " + std::to_string(corpus.size()) + " documents)");
    }
    s.document = corpus.documents[index];
  } else {
    s.document = tokenize(o.doc);
  }
  if (s.document.empty()) throw ConfigError("--doc", "the selected document has no words");

  s.embedding.emplace(s.document, s.idf);
  try {
    s.model = resolve_model_spec(o.model, s.embedding->dictionary());
  } catch (const std::exception& e) {
    throw ConfigError("--model", e.what());
  }
  return s;
}

fs::path output_path(const Options& o, const std::string& name) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (!fs::is_directory(o.out)) throw ConfigError("--out", "cannot create directory '" + o.out + "'");
  return fs::path(o.out) / name;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer, std::ostream& out) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path.string() + "'");
  writer(file);
  file.flush();
  if (!file) throw std::runtime_error("failed writing '" + path.string() + "'");
  out << "wrote " << path.string() << '\n';
}

void write_json(const fs::path& path, const nlohmann::json& j, std::ostream& out) {
  write_file(path, [&](std::ostream& f) { f << j.dump(2) << '\n'; }, out);
}

LinearMode linear_mode(const std::string& name) {
  if (name == "full") return LinearMode::full;
  if (name == "exact-limit") return LinearMode::exact_limit;
  return LinearMode::simplified;
}

std::optional<ETermMethod> e_method(const std::string& name) {
  if (name == "exact") return ETermMethod::exact;
  if (name == "approx") return ETermMethod::approx;
  if (name == "mc") return ETermMethod::mc;
  return std::nullopt;
}

TheoryExplanation dispatch_theory(const Options& o, const Setup& s) {
  const LocalEmbedding& embedding = *s.embedding;
  const double nu = o.bandwidth();
  if (!o.force_mc) {
    if (const auto tree = indicator_expansion(s.model)) {
      TheoryExplanation t = beta_tree(*tree, embedding.d(), nu);
      t.with_words(embedding.dictionary());
      return t;
    }
    if (const auto linear = linear_expansion(s.model, embedding.d())) {
      LinearTheoryOptions options;
      options.mode = linear_mode(o.linear_mode);
      options.method = e_method(o.e_method);
      options.e_terms.n_mc = o.n_mc;
      options.e_terms.seed = o.seed;
      return beta_linear(linear->coefficients, embedding, options);
    }
  }
  return beta_general_mc(s.model, embedding, nu, o.n_mc, o.seed);
}

int cmd_explain(const Options& o, std::ostream& out) {
  const Setup s = prepare(o);
  const Explanation e = explain(s.model, *s.embedding, o.explain_config());
  const fs::path path = output_path(o, output_filename("explain", model_label(s.model), e.meta.nu, e.meta.n, o.format));
  if (o.format == "json") {
    write_json(path, explanation_to_json(e), out);
  } else {
    write_file(path, [&](std::ostream& f) { write_explanation_csv(f, e); }, out);
  }
  return kExitOk;
}

int cmd_theory(const Options& o, std::ostream& out) {
  const Setup s = prepare(o);
  const TheoryExplanation t = dispatch_theory(o, s);
  out << "provenance " << provenance_name(t.provenance) << '\n';
  const fs::path path = output_path(o, output_filename("theory", model_label(s.model), o.bandwidth(), o.n, o.format));
  if (o.format == "json") {
    write_json(path, theory_to_json(t), out);
  } else {
    write_file(path, [&](std::ostream& f) { write_theory_csv(f, t); }, out);
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const Setup s = prepare(o);
  const RunStatistics stats = run_repeated(s.model, *s.embedding, o.explain_config(), o.n_exp, o.seed);
  const TheoryExplanation theory = dispatch_theory(o, s);
  const ComparisonReport report = compare(stats, theory);
  write_comparison_table(out, report);

  const std::string label = model_label(s.model);
  const double nu = o.bandwidth();
  const fs::path compare_path = output_path(o, output_filename("verify", label, nu, o.n, o.format));
  const fs::path runs_path = output_path(o, output_filename("runs", label, nu, o.n, o.format));
  if (o.format == "json") {
    write_json(compare_path, comparison_to_json(report), out);
    write_json(runs_path, run_statistics_to_json(stats), out);
  } else {
    write_file(compare_path, [&](std::ostream& f) { write_comparison_csv(f, report); }, out);
    write_file(runs_path, [&](std::ostream& f) { write_run_statistics_csv(f, stats); }, out);
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const Setup s = prepare(o);
  if (s.embedding->dictionary().index_of(o.word) == LocalDictionary::npos) {
    throw ConfigError("--word", "'" + o.word + "' does not occur in the selected document");
  }
  const std::vector<double> grid = o.nu_grid.empty() ? default_bandwidth_grid() : o.nu_grid;
  const SweepResult sweep = sweep_bandwidth(s.model, *s.embedding, o.word, grid, o.explain_config(), o.n_exp, o.seed);
  std::ostringstream label;
  label << model_label(s.model) << '-' << o.word;
  std::ostringstream name;
  name << "sweep-" << label.str() << '-' << grid.front() << '_' << grid.back() << '-' << o.n << '.' << o.format;
  const fs::path path = output_path(o, name.str());
  if (o.format == "json") {
    write_json(path, sweep_to_json(sweep), out);
  } else {
    write_file(path, [&](std::ostream& f) { write_sweep_csv(f, sweep); }, out);
  }
  return kExitOk;
}

int cmd_alpha_table(const Options& o, std::ostream& out) {
  if (o.threads > 0) set_thread_limit(o.threads);
  const std::size_t p_max = o.p_max.value_or(std::min<std::size_t>(o.d, 4));
  if (p_max > o.d) throw ConfigError("--p-max", "must not exceed --d");
  std::vector<double> nus = o.nu_grid;
  if (nus.empty()) nus.push_back(o.bandwidth());
  std::ostringstream name;
  name << "alpha-table-d" << o.d << '-' << nus.front();
  if (nus.size() > 1) name << '_' << nus.back();
  name << ".csv";
  const fs::path path = output_path(o, name.str());
  write_file(path, [&](std::ostream& f) { write_alpha_table_csv(f, o.d, nus, p_max); }, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Text LIME explanations and their closed-form theory", "textlime"};
  app.set_config("--config", "", "TOML/INI file with option values (command-line flags take precedence)");
  app.require_subcommand(1);

  auto* explain_cmd = app.add_subcommand("explain", "Explain one document with LIME");
  add_document(*explain_cmd, o);
  add_sampling(*explain_cmd, o);
  add_bandwidth(*explain_cmd, o);
  add_output(*explain_cmd, o);
  add_threads(*explain_cmd, o);

  auto* theory_cmd = app.add_subcommand("theory", "Closed-form or Monte Carlo limit explanation");
  add_document(*theory_cmd, o);
  add_sampling(*theory_cmd, o);
  add_bandwidth(*theory_cmd, o);
  add_theory_options(*theory_cmd, o);
  add_output(*theory_cmd, o);
  add_threads(*theory_cmd, o);

  auto* verify_cmd = app.add_subcommand("verify", "Repeated LIME runs compared against the theory");
  add_document(*verify_cmd, o);
  add_sampling(*verify_cmd, o);
  add_bandwidth(*verify_cmd, o);
  add_repetitions(*verify_cmd, o);
  add_theory_options(*verify_cmd, o);
  add_output(*verify_cmd, o);
  add_threads(*verify_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep", "One word's coefficient across a bandwidth grid");
  add_document(*sweep_cmd, o);
  add_sampling(*sweep_cmd, o);
  add_repetitions(*sweep_cmd, o);
  sweep_cmd->add_option("--word", o.word, "Word whose coefficient is tracked")->required();
  sweep_cmd->add_option("--nu-grid", o.nu_grid, "Bandwidths (default: 24 log-spaced values in [0.03, 3])")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  add_output(*sweep_cmd, o);
  add_threads(*sweep_cmd, o);

  auto* alpha_cmd = app.add_subcommand("alpha-table", "Table of alpha coefficients with their limits and bounds");
  alpha_cmd->add_option("--d", o.d, "Local dictionary size")->required()->check(CLI::PositiveNumber);
  alpha_cmd->add_option("--p-max", o.p_max, "Largest order p (default min(d, 4))");
  add_bandwidth(*alpha_cmd, o);
  alpha_cmd->add_option("--nu-grid", o.nu_grid, "Several bandwidths instead of --nu")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  alpha_cmd->add_option("--out", o.out, "Output directory")->envname("TEXTLIME_OUT");
  add_threads(*alpha_cmd, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*explain_cmd) return cmd_explain(o, out);
    if (*theory_cmd) return cmd_theory(o, out);
    if (*verify_cmd) return cmd_verify(o, out);
    if (*sweep_cmd) return cmd_sweep(o, out);
    if (*alpha_cmd) return cmd_alpha_table(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitConfigError;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace textlime
