#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mirstat/kernels.hpp"
#include "mirstat/types.hpp"

namespace mirstat {

enum class MediaType { text, image, video, audio };

const char* to_string(MediaType m) noexcept;
MediaType media_type_from_string(std::string_view s);  // throws Error(parse)

enum class Field : std::size_t { title = 0, body = 1, caption = 2 };
inline constexpr std::array<Field, 3> kFields{Field::title, Field::body, Field::caption};
const char* to_string(Field f) noexcept;

struct Document {
  DocId id;
  std::string title;
  std::string body;
  std::string caption;
  MediaType media_type = MediaType::text;
  std::set<std::string> concepts;

  const std::string& field(Field f) const;
  bool operator==(const Document&) const = default;
};

struct TokenizerConfig {
  std::set<std::string> stopwords;
  bool stem = true;
  std::size_t min_token_len = 2;

  /// Built-in English stopword list, light stemming on.
  static TokenizerConfig defaults();
};

std::set<std::string> default_stopwords();

/// One lowercase word per line; blank lines ignored.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

/// Lowercase, split on every non-alphanumeric code point, drop stopwords,
/// optionally strip light English suffixes, drop tokens shorter than
/// min_token_len code points.
std::vector<Term> tokenize(std::string_view text, const TokenizerConfig& config);

/// Suffix stripping ("s", "es", "ing", "ed") iterated to a fixpoint.
std::string light_stem(std::string_view word);

TermCounts count_terms(std::string_view text, const TokenizerConfig& config);

struct Phrase {
  std::pair<Term, Term> terms;
  std::uint32_t df = 0;

  bool operator==(const Phrase&) const = default;
};

/// Adjacent bigrams with document frequency >= min_df, sorted lexicographically.
std::vector<Phrase> extract_phrases(const std::vector<std::vector<Term>>& token_lists, std::uint32_t min_df);

/// Split on whitespace into k contiguous segments, count each independently
/// and merge. Always equal to count_terms on the whole text.
TermCounts ingest_segmented(std::string_view text, std::size_t k, const TokenizerConfig& config,
                            Execution exec = Execution::parallel);

/// Contiguous whitespace-snapped segments; exposed for tests.
std::vector<std::string_view> split_segments(std::string_view text, std::size_t k);

struct TermStat {
  std::uint32_t df = 0;
  std::uint64_t total_tf = 0;

  bool operator==(const TermStat&) const = default;
};

class Corpus {
 public:
  Corpus() = default;

  /// Tokenizes every field of every document. Ids must be unique and non-empty.
  Corpus(std::vector<Document> documents, const TokenizerConfig& config,
         Execution exec = Execution::parallel);

  std::size_t size() const noexcept { return documents_.size(); }
  const std::vector<Document>& documents() const noexcept { return documents_; }
  const std::map<Term, TermStat>& term_stats() const noexcept { return term_stats_; }

  const TermCounts& field_terms(std::size_t doc, Field f) const {
    return field_terms_[doc][static_cast<std::size_t>(f)];
  }
  /// Counts over title + body + caption.
  const TermCounts& doc_terms(std::size_t doc) const { return doc_terms_[doc]; }

  const Document* find(std::string_view id) const;

 private:
  std::vector<Document> documents_;
  std::vector<std::array<TermCounts, 3>> field_terms_;
  std::vector<TermCounts> doc_terms_;
  std::map<Term, TermStat> term_stats_;
};

struct IngestError {
  std::filesystem::path path;
  std::string message;
};

struct IngestResult {
  Corpus corpus;
  std::vector<IngestError> errors;
};

/// One Document per `*.txt` file (id = file stem), ordered by id. Optional
/// `<stem>.meta.json` sidecars fill title/caption/media_type/concepts.
/// Unreadable or non-UTF-8 files are collected in `errors`; a malformed
/// sidecar throws.
IngestResult ingest_corpus(const std::filesystem::path& dir, const TokenizerConfig& config,
                           Execution exec = Execution::parallel);

bool is_valid_utf8(std::string_view s) noexcept;

}  // namespace mirstat
