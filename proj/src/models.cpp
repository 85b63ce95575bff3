#include "textlime/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace textlime {

double IndicatorProduct::evaluate(std::span<const double> phi) const {
  for (const std::size_t j : indices) {
    if (!(phi[j] > 0.0)) return 0.0;
  }
  return coefficient;
}

double TreeModel::evaluate(std::span<const double> phi) const {
  double sum = 0.0;
  for (const auto& term : terms) sum += term.evaluate(phi);
  return sum;
}

double LinearModel::evaluate(std::span<const double> phi) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < coefficients.size(); ++j) sum += coefficients[j] * phi[j];
  return sum;
}

double CombinationModel::evaluate(std::span<const double> phi) const {
  double sum = 0.0;
  for (const auto& [weight, model] : parts) sum += weight * model->evaluate(phi);
  return sum;
}

double Model::evaluate(std::span<const double> phi) const {
  return std::visit([phi](const auto& m) { return m.evaluate(phi); }, impl_);
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::optional<double> Model::bound() const {
  return std::visit(
      Overloaded{
          [](const ConstantModel& m) -> std::optional<double> { return std::abs(m.value); },
          [](const IndicatorProduct& m) -> std::optional<double> { return std::abs(m.coefficient); },
          [](const TreeModel& m) -> std::optional<double> {
            double total = 0.0;
            for (const auto& term : m.terms) total += std::abs(term.coefficient);
            return total;
          },
          [](const LinearModel& m) -> std::optional<double> {
            double sq = 0.0;
            for (const double c : m.coefficients) sq += c * c;
            return std::sqrt(sq);
          },
          [](const CombinationModel& m) -> std::optional<double> {
            double total = 0.0;
            for (const auto& [weight, part] : m.parts) {
              const auto b = part->bound();
              if (!b) return std::nullopt;
              total += std::abs(weight) * *b;
            }
            return total;
          },
      },
      impl_);
}

std::size_t Model::min_dictionary_size() const {
  const auto product_extent = [](const IndicatorProduct& p) {
    return p.indices.empty() ? std::size_t{0} : p.indices.back() + 1;
  };
  return std::visit(Overloaded{
                        [](const ConstantModel&) { return std::size_t{0}; },
                        [&](const IndicatorProduct& m) { return product_extent(m); },
                        [&](const TreeModel& m) {
                          std::size_t extent = 0;
                          for (const auto& t : m.terms) extent = std::max(extent, product_extent(t));
                          return extent;
                        },
                        [](const LinearModel& m) { return m.coefficients.size(); },
                        [](const CombinationModel& m) {
                          std::size_t extent = 0;
                          for (const auto& part : m.parts) extent = std::max(extent, part.second->min_dictionary_size());
                          return extent;
                        },
                    },
                    impl_);
}

Model combine(const std::vector<std::pair<double, Model>>& models) {
  CombinationModel combination;
  combination.parts.reserve(models.size());
  for (const auto& [weight, model] : models) {
    combination.parts.emplace_back(weight, std::make_shared<const Model>(model));
  }
  return Model(std::move(combination));
}

namespace {

void accumulate_expansion(const Model& model, double scale, std::map<std::vector<std::size_t>, double>& out,
                          bool& ok) {
  if (!ok) return;
  std::visit(Overloaded{
                 [&](const ConstantModel& m) { out[{}] += scale * m.value; },
                 [&](const IndicatorProduct& m) { out[m.indices] += scale * m.coefficient; },
                 [&](const TreeModel& m) {
                   for (const auto& t : m.terms) out[t.indices] += scale * t.coefficient;
                 },
                 [&](const LinearModel&) { ok = false; },
                 [&](const CombinationModel& m) {
                   for (const auto& [weight, part] : m.parts) accumulate_expansion(*part, scale * weight, out, ok);
                 },
             },
             model.variant());
}

void accumulate_linear(const Model& model, double scale, std::vector<double>& out, bool& ok) {
  if (!ok) return;
  std::visit(Overloaded{
                 [&](const LinearModel& m) {
                   if (m.coefficients.size() > out.size()) {
                     ok = false;
                     return;
                   }
                   for (std::size_t j = 0; j < m.coefficients.size(); ++j) out[j] += scale * m.coefficients[j];
                 },
                 [&](const CombinationModel& m) {
                   for (const auto& [weight, part] : m.parts) accumulate_linear(*part, scale * weight, out, ok);
                 },
                 [&](const auto&) { ok = false; },
             },
             model.variant());
}

}  // namespace

std::optional<TreeModel> indicator_expansion(const Model& model) {
  std::map<std::vector<std::size_t>, double> terms;
  bool ok = true;
  accumulate_expansion(model, 1.0, terms, ok);
  if (!ok) return std::nullopt;
  TreeModel tree;
  for (auto& [indices, coefficient] : terms) {
    if (coefficient != 0.0) tree.terms.push_back({indices, coefficient});
  }
  return tree;
}

std::optional<LinearModel> linear_expansion(const Model& model, std::size_t d) {
  std::vector<double> coefficients(d, 0.0);
  bool ok = true;
  accumulate_linear(model, 1.0, coefficients, ok);
  if (!ok) return std::nullopt;
  return LinearModel{std::move(coefficients)};
}

}  // namespace textlime
