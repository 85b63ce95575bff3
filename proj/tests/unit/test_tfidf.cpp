#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "textlime/tfidf.hpp"

using namespace textlime;

namespace {

Corpus corpus_of(std::initializer_list<const char*> lines) {
  Corpus c;
  for (const char* line : lines) c.documents.push_back(tokenize(line));
  return c;
}

}  // namespace

TEST_CASE("tokenize keeps case and splits on non-word bytes") {
  const Document doc = tokenize("Everything about the food");
  CHECK(doc.tokens == std::vector<std::string>{"Everything", "about", "the", "food"});
  CHECK(tokenize("don't stop-now, 42x!").tokens == std::vector<std::string>{"don", "t", "stop", "now", "42x"});
  CHECK(tokenize("  \t ").empty());
  CHECK(tokenize("caf\xc3\xa9 ok").tokens == std::vector<std::string>{"caf\xc3\xa9", "ok"});
}

TEST_CASE("smoothed idf values") {
  const Corpus c = corpus_of({"a b", "a c", "a"});
  const IdfTable idf = IdfTable::fit(c);
  CHECK(idf.n_documents() == 3);
  CHECK(idf.doc_count("a") == 3);
  CHECK(idf.doc_count("zzz") == 0);
  CHECK(idf.idf("a") == doctest::Approx(1.0));
  CHECK(idf.idf("b") == doctest::Approx(std::log(4.0 / 2.0) + 1.0));
  CHECK(idf.idf("zzz") == doctest::Approx(std::log(4.0) + 1.0));
  CHECK_THROWS_WITH_AS(IdfTable::fit(Corpus{}), "empty corpus", std::invalid_argument);
}

TEST_CASE("document counts ignore repeated words") {
  const IdfTable idf = IdfTable::fit(corpus_of({"x x x", "y"}));
  CHECK(idf.doc_count("x") == 1);
}

TEST_CASE("from_entries rejects inconsistent values") {
  const IdfTable idf = IdfTable::fit(corpus_of({"a b", "b"}));
  const IdfTable copy = IdfTable::from_entries(idf.n_documents(), idf.entries());
  CHECK(copy.idf("a") == idf.idf("a"));
  auto entries = idf.entries();
  entries[0].idf += 0.5;
  CHECK_THROWS(IdfTable::from_entries(idf.n_documents(), entries));
}

TEST_CASE("normalized tf-idf by hand") {
  const Corpus c = corpus_of({"good food good", "bad food", "good service"});
  const IdfTable idf = IdfTable::fit(c);
  const Document doc = c.documents[0];
  const TfIdfVector v = normalized_tfidf(doc, idf);
  const double vg = std::log(4.0 / 3.0) + 1.0;
  const double vf = std::log(4.0 / 3.0) + 1.0;
  const double g = 2.0 * vg;
  const double f = 1.0 * vf;
  const double norm = std::hypot(g, f);
  CHECK(v["good"] == doctest::Approx(g / norm).epsilon(1e-14));
  CHECK(v["food"] == doctest::Approx(f / norm).epsilon(1e-14));
  CHECK(v["bad"] == 0.0);
  CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(normalized_tfidf(Document{}, idf).coordinates.empty());
}

TEST_CASE("local dictionary in first-occurrence order") {
  const LocalDictionary local = local_dictionary(tokenize("b a b c a b"));
  CHECK(local.words == std::vector<std::string>{"b", "a", "c"});
  CHECK(local.counts == std::vector<std::size_t>{3, 2, 1});
  CHECK(local.index_of("c") == 2);
  CHECK(local.index_of("d") == LocalDictionary::npos);
}

TEST_CASE("local embedding agrees with the sparse vectorizer") {
  const Corpus c = corpus_of({"the cat sat on the mat", "the dog", "a cat and a dog", "mat"});
  const IdfTable idf = IdfTable::fit(c);
  const Document doc = tokenize("the cat sat on the mat with the cat");
  const LocalEmbedding embedding(doc, idf);
  REQUIRE(embedding.d() == 6);
  const std::vector<double> phi = embedding.full();
  const TfIdfVector ref = normalized_tfidf(doc, idf);
  for (std::size_t j = 0; j < embedding.d(); ++j) {
    CHECK(phi[j] == doctest::Approx(ref[embedding.dictionary().words[j]]).epsilon(1e-14));
  }

  // Drop "cat" and "the": the survivor document re-normalizes.
  std::vector<unsigned char> present(embedding.d(), 1);
  present[embedding.dictionary().index_of("cat")] = 0;
  present[embedding.dictionary().index_of("the")] = 0;
  const std::vector<double> sub = embedding.embed(present);
  const TfIdfVector sub_ref = normalized_tfidf(tokenize("sat on mat with"), idf);
  for (std::size_t j = 0; j < embedding.d(); ++j) {
    CHECK(sub[j] == doctest::Approx(sub_ref[embedding.dictionary().words[j]]).epsilon(1e-14));
  }

  const std::vector<double> zero = embedding.embed(std::vector<unsigned char>(embedding.d(), 0));
  for (double x : zero) CHECK(x == 0.0);
}

TEST_CASE("words outside the corpus still embed") {
  const IdfTable idf = IdfTable::fit(corpus_of({"known"}));
  const LocalEmbedding embedding(tokenize("known unknown"), idf);
  CHECK(embedding.idf_values()[1] == doctest::Approx(std::log(2.0) + 1.0));
}
