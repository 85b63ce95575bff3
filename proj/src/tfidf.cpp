#include "textlime/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace textlime {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

Document tokenize(std::string_view raw_text) {
  Document doc;
  std::size_t i = 0;
  while (i < raw_text.size()) {
    while (i < raw_text.size() && !is_word_byte(static_cast<unsigned char>(raw_text[i]))) ++i;
    const std::size_t start = i;
    while (i < raw_text.size() && is_word_byte(static_cast<unsigned char>(raw_text[i]))) ++i;
    if (i > start) doc.tokens.emplace_back(raw_text.substr(start, i - start));
  }
  return doc;
}

double IdfTable::smoothed_idf(std::size_t n_documents, std::size_t doc_count) {
  return std::log(static_cast<double>(n_documents + 1) / static_cast<double>(doc_count + 1)) + 1.0;
}

IdfTable IdfTable::fit(const Corpus& corpus) {
  if (corpus.size() == 0) throw std::invalid_argument("empty corpus");

  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : corpus.documents) {
    std::unordered_set<std::string_view> seen;
    for (const auto& token : doc.tokens) {
      if (seen.insert(token).second) ++counts[token];
    }
  }

  std::vector<Entry> entries;
  entries.reserve(counts.size());
  for (auto& [word, count] : counts) {
    entries.push_back({word, count, smoothed_idf(corpus.size(), count)});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.word < b.word; });

  IdfTable table;
  table.n_documents_ = corpus.size();
  table.entries_ = std::move(entries);
  for (std::size_t i = 0; i < table.entries_.size(); ++i) table.index_.emplace(table.entries_[i].word, i);
  return table;
}

IdfTable IdfTable::from_entries(std::size_t n_documents, std::vector<Entry> entries) {
  if (n_documents == 0) throw std::invalid_argument("empty corpus");
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.word < b.word; });

  IdfTable table;
  table.n_documents_ = n_documents;
  for (auto& entry : entries) {
    if (entry.doc_count > n_documents) {
      throw std::invalid_argument("doc_count of '" + entry.word + "' exceeds the number of documents");
    }
    const double expected = smoothed_idf(n_documents, entry.doc_count);
    if (std::abs(expected - entry.idf) > 1e-9 * expected) {
      throw std::invalid_argument("idf of '" + entry.word + "' is inconsistent with its doc_count");
    }
    entry.idf = expected;
    if (!table.index_.emplace(entry.word, table.entries_.size()).second) {
      throw std::invalid_argument("duplicate word '" + entry.word + "'");
    }
    table.entries_.push_back(std::move(entry));
  }
  return table;
}

std::size_t IdfTable::doc_count(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? 0 : entries_[it->second].doc_count;
}

double IdfTable::idf(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it != index_.end()) return entries_[it->second].idf;
  return smoothed_idf(n_documents_, 0);
}

std::size_t LocalDictionary::index_of(std::string_view word) const {
  const auto it = std::find(words.begin(), words.end(), word);
  return it == words.end() ? npos : static_cast<std::size_t>(it - words.begin());
}

LocalDictionary local_dictionary(const Document& doc) {
  LocalDictionary local;
  std::unordered_map<std::string_view, std::size_t> position;
  for (const auto& token : doc.tokens) {
    const auto [it, inserted] = position.emplace(token, local.words.size());
    if (inserted) {
      local.words.push_back(token);
      local.counts.push_back(1);
    } else {
      ++local.counts[it->second];
    }
  }
  return local;
}

double TfIdfVector::operator[](std::string_view word) const {
  const auto it = coordinates.find(word);
  return it == coordinates.end() ? 0.0 : it->second;
}

double TfIdfVector::norm() const {
  double sq = 0.0;
  for (const auto& [word, value] : coordinates) sq += value * value;
  return std::sqrt(sq);
}

TfIdfVector normalized_tfidf(const Document& doc, const IdfTable& idf) {
  const LocalDictionary local = local_dictionary(doc);
  std::vector<double> masses(local.size());
  double sq = 0.0;
  for (std::size_t j = 0; j < local.size(); ++j) {
    masses[j] = static_cast<double>(local.counts[j]) * idf.idf(local.words[j]);
    sq += masses[j] * masses[j];
  }
  TfIdfVector out;
  if (local.size() == 0) return out;
  const double norm = std::sqrt(sq);
  for (std::size_t j = 0; j < local.size(); ++j) out.coordinates.emplace(local.words[j], masses[j] / norm);
  return out;
}

LocalEmbedding::LocalEmbedding(const Document& doc, const IdfTable& idf)
    : dictionary_(local_dictionary(doc)) {
  idf_values_.resize(dictionary_.size());
  masses_.resize(dictionary_.size());
  for (std::size_t j = 0; j < dictionary_.size(); ++j) {
    idf_values_[j] = idf.idf(dictionary_.words[j]);
    masses_[j] = static_cast<double>(dictionary_.counts[j]) * idf_values_[j];
  }
}

void LocalEmbedding::embed(std::span<const unsigned char> present, std::span<double> phi) const {
  const std::size_t d = masses_.size();
  double sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (present[j]) sq += masses_[j] * masses_[j];
  }
  if (sq == 0.0) {
    std::fill(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
    return;
  }
  const double norm = std::sqrt(sq);
  for (std::size_t j = 0; j < d; ++j) phi[j] = present[j] ? masses_[j] / norm : 0.0;
}

std::vector<double> LocalEmbedding::embed(std::span<const unsigned char> present) const {
  std::vector<double> phi(masses_.size());
  embed(present, phi);
  return phi;
}

std::vector<double> LocalEmbedding::full() const {
  const std::vector<unsigned char> all(masses_.size(), 1);
  return embed(all);
}

}  // namespace textlime
