#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

#include "textlime/models.hpp"

namespace textlime {

TreeParseError::TreeParseError(const std::string& what, std::size_t position)
    : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position) {}

namespace {

// Multilinear polynomial in word-presence indicators: z^2 = z.
using Monomial = std::vector<std::string>;  // sorted, distinct
using Polynomial = std::map<Monomial, double>;

Polynomial constant(double c) { return Polynomial{{Monomial{}, c}}; }

void prune(Polynomial& p) {
  std::erase_if(p, [](const auto& kv) { return kv.second == 0.0; });
}

Polynomial add(const Polynomial& a, const Polynomial& b, double sign) {
  Polynomial out = a;
  for (const auto& [m, c] : b) out[m] += sign * c;
  prune(out);
  return out;
}

Polynomial multiply(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      Monomial m;
      std::set_union(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
      out[m] += ca * cb;
    }
  }
  prune(out);
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw TreeParseError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial p = term();
    for (;;) {
      if (accept('+')) {
        p = add(p, term(), 1.0);
      } else if (accept('-')) {
        p = add(p, term(), -1.0);
      } else {
        return p;
      }
    }
  }

  Polynomial term() {
    Polynomial p = factor();
    while (accept('&') || accept('*')) p = multiply(p, factor());
    return p;
  }

  Polynomial factor() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '!') {
      ++pos_;
      return add(constant(1.0), factor(), -1.0);
    }
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (c == '"') return word();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    fail("expected a quoted word, a number, '!' or '('");
  }

  Polynomial word() {
    const std::size_t start = pos_;
    ++pos_;
    std::string w;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      w.push_back(text_[pos_++]);
    }
    if (pos_ >= text_.size()) {
      pos_ = start;
      fail("unterminated quoted word");
    }
    ++pos_;
    if (w.empty()) {
      pos_ = start;
      fail("empty word");
    }
    return Polynomial{{Monomial{w}, 1.0}};
  }

  Polynomial number() {
    double value = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{}) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return constant(value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

SymbolicTree parse_tree(std::string_view text) {
  const Polynomial p = Parser(text).parse();
  SymbolicTree tree;
  for (const auto& [monomial, coefficient] : p) tree.terms.push_back({monomial, coefficient});
  std::stable_sort(tree.terms.begin(), tree.terms.end(), [](const WordTerm& a, const WordTerm& b) {
    if (a.words.size() != b.words.size()) return a.words.size() < b.words.size();
    return a.words < b.words;
  });
  return tree;
}

TreeModel SymbolicTree::bind(const LocalDictionary& local) const {
  TreeModel tree;
  for (const auto& term : terms) {
    IndicatorProduct product{{}, term.coefficient};
    bool absent = false;
    for (const auto& w : term.words) {
      const std::size_t j = local.index_of(w);
      if (j == LocalDictionary::npos) {
        absent = true;
        break;
      }
      product.indices.push_back(j);
    }
    if (absent) continue;
    std::sort(product.indices.begin(), product.indices.end());
    tree.terms.push_back(std::move(product));
  }
  return tree;
}

TreeModel tree_from_spec(std::string_view text, const LocalDictionary& local) {
  return parse_tree(text).bind(local);
}

}  // namespace textlime
