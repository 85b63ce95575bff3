#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "textlime/tfidf.hpp"

namespace textlime {

// All models evaluate phi restricted to the local dictionary of the explained
// document: perturbed documents never contain any other word, so the
// remaining TF-IDF coordinates are identically zero.

struct ConstantModel {
  double value = 1.0;

  double evaluate(std::span<const double>) const { return value; }
};

/// coefficient * prod_{j in indices} 1{phi_j > 0}. Empty indices = constant.
struct IndicatorProduct {
  std::vector<std::size_t> indices;  // sorted, distinct
  double coefficient = 1.0;

  double evaluate(std::span<const double> phi) const;
  std::size_t order() const { return indices.size(); }
};

/// A presence-only decision tree stored pre-expanded as a signed sum of
/// indicator products.
struct TreeModel {
  std::vector<IndicatorProduct> terms;

  double evaluate(std::span<const double> phi) const;
};

/// sum_j lambda_j phi_j over the local dictionary.
struct LinearModel {
  std::vector<double> coefficients;

  double evaluate(std::span<const double> phi) const;
};

class Model;

struct CombinationModel {
  std::vector<std::pair<double, std::shared_ptr<const Model>>> parts;

  double evaluate(std::span<const double> phi) const;
};

enum class ModelKind { constant, indicator_product, tree, linear, combination };

/// Immutable black-box model f: phi -> R with an optional known bound M of
/// |f| on the unit sphere.
class Model {
 public:
  using Variant = std::variant<ConstantModel, IndicatorProduct, TreeModel, LinearModel, CombinationModel>;

  Model() : impl_(ConstantModel{}) {}
  Model(ConstantModel m) : impl_(std::move(m)) {}
  Model(IndicatorProduct m) : impl_(std::move(m)) {}
  Model(TreeModel m) : impl_(std::move(m)) {}
  Model(LinearModel m) : impl_(std::move(m)) {}
  Model(CombinationModel m) : impl_(std::move(m)) {}

  double evaluate(std::span<const double> phi) const;
  double operator()(std::span<const double> phi) const { return evaluate(phi); }

  ModelKind kind() const { return static_cast<ModelKind>(impl_.index()); }
  const Variant& variant() const { return impl_; }

  // 1 for a single indicator product (times |coefficient|), sum of
  // |coefficients| for trees, |lambda|_2 for linear models, weighted sum for
  // combinations. nullopt when a part has no known bound.
  std::optional<double> bound() const;

  // Largest local index referenced, plus one (0 when none).
  std::size_t min_dictionary_size() const;

 private:
  Variant impl_;
};

Model combine(const std::vector<std::pair<double, Model>>& models);

// Flattens constants, indicator products, trees and combinations of these
// into one signed indicator expansion; nullopt if a linear part occurs.
std::optional<TreeModel> indicator_expansion(const Model& model);

// Flattens linear models and combinations of linear models into one
// coefficient vector of length d; nullopt otherwise.
std::optional<LinearModel> linear_expansion(const Model& model, std::size_t d);

// ---------------------------------------------------------------------------
// Tree mini-language.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('&' | '*') factor)*
//   factor := '!' factor | '(' expr ')' | '"word"' | number
//
// A quoted word stands for its presence indicator. The expression is
// expanded into a multilinear polynomial in the indicators, e.g.
//   "food" + (!"food" & "about" & "Everything")
//     = z_food + z_about z_Everything - z_food z_about z_Everything.

class TreeParseError : public std::invalid_argument {
 public:
  TreeParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct WordTerm {
  std::vector<std::string> words;  // sorted, distinct
  double coefficient = 0.0;
};

struct SymbolicTree {
  std::vector<WordTerm> terms;  // ordered by (order, words)

  // Words absent from the dictionary are never present, so any term that
  // mentions one vanishes.
  TreeModel bind(const LocalDictionary& local) const;
};

SymbolicTree parse_tree(std::string_view text);
TreeModel tree_from_spec(std::string_view text, const LocalDictionary& local);

}  // namespace textlime
