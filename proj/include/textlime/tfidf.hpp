#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace textlime {

struct Document {
  std::vector<std::string> tokens;
  std::optional<std::string> source_id;

  bool empty() const { return tokens.empty(); }
};

struct Corpus {
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
};

// Maximal runs of word bytes. ASCII letters and digits are word bytes, as is
// every byte >= 0x80 so that UTF-8 encoded letters stay inside their word.
// Case is preserved.
Document tokenize(std::string_view raw_text);

/// Smoothed inverse document frequencies fitted on a corpus:
///   v_j = log((N + 1) / (N_j + 1)) + 1
/// Words never seen in the corpus get N_j = 0.
class IdfTable {
 public:
  struct Entry {
    std::string word;
    std::size_t doc_count = 0;
    double idf = 0.0;
  };

  IdfTable() = default;

  // Throws std::invalid_argument("empty corpus") when N = 0.
  static IdfTable fit(const Corpus& corpus);

  // Rebuilds a table from serialized entries. Each idf is recomputed from
  // (N, doc_count) and must agree with the stored one.
  static IdfTable from_entries(std::size_t n_documents, std::vector<Entry> entries);

  std::size_t n_documents() const { return n_documents_; }
  std::size_t vocabulary_size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  std::size_t doc_count(std::string_view word) const;
  double idf(std::string_view word) const;

  static double smoothed_idf(std::size_t n_documents, std::size_t doc_count);

 private:
  std::size_t n_documents_ = 0;
  std::vector<Entry> entries_;  // sorted by word
  std::unordered_map<std::string, std::size_t> index_;
};

/// The d distinct words of a document in first-occurrence order, with counts.
struct LocalDictionary {
  std::vector<std::string> words;
  std::vector<std::size_t> counts;

  std::size_t size() const { return words.size(); }
  // npos when absent.
  std::size_t index_of(std::string_view word) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

LocalDictionary local_dictionary(const Document& doc);

/// Normalized TF-IDF as a sparse word -> value map (only present words).
/// The empty document maps to the empty map, i.e. the zero vector.
struct TfIdfVector {
  std::map<std::string, double, std::less<>> coordinates;

  double operator[](std::string_view word) const;
  double norm() const;
};

TfIdfVector normalized_tfidf(const Document& doc, const IdfTable& idf);

/// The document to explain, pre-digested for repeated evaluation on perturbed
/// copies: its local dictionary and the raw TF-IDF masses m_j v_j.
/// Every perturbed document only contains words of the local dictionary, so
/// its TF-IDF vector is fully described by d local coordinates.
class LocalEmbedding {
 public:
  LocalEmbedding(const Document& doc, const IdfTable& idf);

  const LocalDictionary& dictionary() const { return dictionary_; }
  std::size_t d() const { return dictionary_.size(); }
  std::span<const double> masses() const { return masses_; }
  std::span<const double> idf_values() const { return idf_values_; }

  // phi restricted to the local dictionary for the document that keeps the
  // words with present[j] != 0. All-zero presence gives the zero vector.
  void embed(std::span<const unsigned char> present, std::span<double> phi) const;
  std::vector<double> embed(std::span<const unsigned char> present) const;

  // phi(xi) itself.
  std::vector<double> full() const;

 private:
  LocalDictionary dictionary_;
  std::vector<double> idf_values_;
  std::vector<double> masses_;
};

}  // namespace textlime
