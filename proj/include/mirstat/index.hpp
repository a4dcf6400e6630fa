#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirstat/corpus.hpp"
#include "mirstat/types.hpp"

namespace mirstat {

inline constexpr std::string_view kIndexVersion = "mirstat-index/1";

/// Postings reference documents by ordinal in the id-sorted document table,
/// so ascending ordinal is ascending doc id.
struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

struct DocEntry {
  DocId id;
  double max_tfidf = 0.0;  // max over the document's terms of tf * idf

  bool operator==(const DocEntry&) const = default;
};

class InvertedIndex {
 public:
  InvertedIndex() = default;

  /// Assemble from explicit parts (used by the loader). Validates ordering,
  /// tf >= 1 and df <= N.
  InvertedIndex(std::vector<DocEntry> docs, std::map<Term, std::vector<Posting>> postings);

  std::size_t N() const noexcept { return docs_.size(); }
  const std::vector<DocEntry>& docs() const noexcept { return docs_; }
  const std::map<Term, std::vector<Posting>>& postings() const noexcept { return postings_; }

  /// Empty span for an unindexed term.
  const std::vector<Posting>& postings(std::string_view term) const;
  std::optional<std::uint32_t> doc_ordinal(std::string_view doc_id) const;
  const DocId& doc_id(std::uint32_t ordinal) const { return docs_[ordinal].id; }

  /// Forward view: term -> tf for one document.
  const TermCounts& doc_terms(std::uint32_t ordinal) const { return forward_[ordinal]; }

  std::uint32_t df(std::string_view term) const noexcept;
  std::uint32_t tf(std::uint32_t ordinal, std::string_view term) const noexcept;

  /// ln(N / df). Throws "empty index" for N = 0 and "term not indexed".
  double idf(std::string_view term) const;

  /// tf*idf / max_tfidf(doc) in [0, 1]; 0 when the term is absent or the
  /// document has no term with positive idf.
  double doc_term_weight(std::string_view doc_id, std::string_view term) const;
  double doc_term_weight(std::uint32_t ordinal, std::string_view term) const;

  /// Every term of the document with its normalized weight.
  TermWeights doc_weight_vector(std::uint32_t ordinal) const;

  bool operator==(const InvertedIndex& other) const {
    return docs_ == other.docs_ && postings_ == other.postings_;
  }

 private:
  void rebuild_forward();

  std::vector<DocEntry> docs_;
  std::map<Term, std::vector<Posting>> postings_;
  std::vector<TermCounts> forward_;
};

InvertedIndex build_index(const Corpus& corpus);

/// Compact UTF-8 JSON, keys sorted, floats with 17 significant digits.
std::string serialize_index(const InvertedIndex& index);
InvertedIndex deserialize_index(std::string_view json);

void save_index(const InvertedIndex& index, const std::filesystem::path& path);
InvertedIndex load_index(const std::filesystem::path& path);

/// printf("%.17g") formatting used by every persisted float.
std::string format_double(double v);

}  // namespace mirstat
