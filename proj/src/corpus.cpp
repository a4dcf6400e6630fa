#include "mirstat/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mirstat/error.hpp"

namespace mirstat {

namespace {

// Decodes one UTF-8 sequence starting at s[i]. Returns the code point and
// advances i; malformed input yields U+FFFD and advances by one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) noexcept {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // Overlong forms, surrogates and out-of-range values.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return 0xFFFD;
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// ASCII letters and digits, plus non-ASCII code points outside the common
// punctuation, symbol and emoji blocks.
bool is_word_char(char32_t cp) noexcept {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  if (cp < 0xC0 || cp == 0xD7 || cp == 0xF7 || cp == 0xFFFD) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0xFF5B && cp <= 0xFF65) return false;
  if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
  return true;
}

char32_t to_lower(char32_t cp) noexcept {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

std::size_t codepoint_count(std::string_view s) noexcept {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool ends_with(std::string_view s, std::string_view suffix) noexcept {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// One suffix-stripping step; returns false when no rule applies.
bool strip_once(std::string& w) {
  constexpr std::size_t kMinStem = 3;
  const std::size_t n = w.size();
  if (ends_with(w, "ing") && n - 3 >= kMinStem) {
    w.resize(n - 3);
    return true;
  }
  if (ends_with(w, "ed") && n - 2 >= kMinStem) {
    w.resize(n - 2);
    return true;
  }
  if (ends_with(w, "sses")) {
    w.resize(n - 2);
    return true;
  }
  if (ends_with(w, "es") && n - 2 >= kMinStem) {
    std::string_view stem(w.data(), n - 2);
    if (ends_with(stem, "x") || ends_with(stem, "z") || ends_with(stem, "ch") || ends_with(stem, "sh")) {
      w.resize(n - 2);
      return true;
    }
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && n - 1 >= kMinStem) {
    w.resize(n - 1);
    return true;
  }
  return false;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::io, "cannot read " + path.string());
  return std::move(ss).str();
}

void apply_sidecar(Document& doc, const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
  if (!meta.is_object()) throw Error(Errc::parse, path.string() + ": sidecar must be a JSON object");
  auto expect_string = [&](const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw Error(Errc::parse, path.string() + ": key \"" + key + "\" must be a string");
    return v.get<std::string>();
  };
  for (const auto& [key, value] : meta.items()) {
    if (key == "title") {
      doc.title = expect_string(value, key);
    } else if (key == "caption") {
      doc.caption = expect_string(value, key);
    } else if (key == "media_type") {
      try {
        doc.media_type = media_type_from_string(expect_string(value, key));
      } catch (const Error& e) {
        throw Error(Errc::parse, path.string() + ": " + e.what());
      }
    } else if (key == "concepts") {
      if (!value.is_array()) throw Error(Errc::parse, path.string() + ": key \"concepts\" must be an array");
      for (const auto& c : value) doc.concepts.insert(expect_string(c, key));
    } else {
      throw Error(Errc::parse, path.string() + ": unknown key \"" + key + "\"");
    }
  }
  for (const auto* f : {&doc.title, &doc.caption}) {
    if (!is_valid_utf8(*f)) throw Error(Errc::parse, path.string() + ": invalid UTF-8");
  }
}

}  // namespace

const char* to_string(MediaType m) noexcept {
  switch (m) {
    case MediaType::text: return "text";
    case MediaType::image: return "image";
    case MediaType::video: return "video";
    case MediaType::audio: return "audio";
  }
  return "text";
}

MediaType media_type_from_string(std::string_view s) {
  if (s == "text") return MediaType::text;
  if (s == "image") return MediaType::image;
  if (s == "video") return MediaType::video;
  if (s == "audio") return MediaType::audio;
  throw Error(Errc::parse, "unknown media_type \"" + std::string(s) + "\"");
}

const char* to_string(Field f) noexcept {
  switch (f) {
    case Field::title: return "title";
    case Field::body: return "body";
    case Field::caption: return "caption";
  }
  return "body";
}

const std::string& Document::field(Field f) const {
  switch (f) {
    case Field::title: return title;
    case Field::caption: return caption;
    case Field::body: break;
  }
  return body;
}

std::set<std::string> default_stopwords() {
  return {"a",    "an",   "and",  "are",  "as",  "at",   "be",   "but",   "by",   "for",
          "from", "has",  "have", "he",   "in",  "is",   "it",   "its",   "not",  "of",
          "on",   "or",   "she",  "that", "the", "their", "this", "to",   "was",  "were",
          "will", "with"};
}

TokenizerConfig TokenizerConfig::defaults() {
  TokenizerConfig c;
  c.stopwords = default_stopwords();
  return c;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::set<std::string> words;
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && is_ascii_space(line.back())) line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    words.insert(line.substr(first));
  }
  return words;
}

bool is_valid_utf8(std::string_view s) noexcept {
  for (std::size_t i = 0; i < s.size();) {
    const std::size_t before = i;
    const char32_t cp = decode_utf8(s, i);
    // A genuine U+FFFD is three bytes; a one-byte advance means malformed.
    if (cp == 0xFFFD && i - before == 1) return false;
  }
  return true;
}

std::string light_stem(std::string_view word) {
  std::string w(word);
  while (strip_once(w)) {
  }
  return w;
}

std::vector<Term> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<Term> out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!config.stopwords.contains(current)) {
      std::string term = config.stem ? light_stem(current) : current;
      // Checking the stem as well keeps tokenize idempotent on its own output.
      if (!config.stopwords.contains(term) && codepoint_count(term) >= std::max<std::size_t>(1, config.min_token_len)) {
        out.push_back(std::move(term));
      }
    }
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const char32_t cp = decode_utf8(text, i);
    if (is_word_char(cp)) {
      append_utf8(current, to_lower(cp));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

TermCounts count_terms(std::string_view text, const TokenizerConfig& config) {
  TermCounts counts;
  for (auto& t : tokenize(text, config)) ++counts[std::move(t)];
  return counts;
}

std::vector<Phrase> extract_phrases(const std::vector<std::vector<Term>>& token_lists, std::uint32_t min_df) {
  if (min_df < 1) throw Error(Errc::invalid_argument, "min_df must be >= 1");
  std::map<std::pair<Term, Term>, std::uint32_t> df;
  for (const auto& tokens : token_lists) {
    std::set<std::pair<Term, Term>> seen;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) seen.emplace(tokens[i], tokens[i + 1]);
    for (const auto& bigram : seen) ++df[bigram];
  }
  std::vector<Phrase> out;
  for (const auto& [bigram, n] : df) {
    if (n >= min_df) out.push_back({bigram, n});
  }
  return out;
}

std::vector<std::string_view> split_segments(std::string_view text, std::size_t k) {
  if (k < 1) throw Error(Errc::invalid_argument, "segment count must be >= 1");
  std::vector<std::string_view> segments;
  segments.reserve(k);
  std::size_t start = 0;
  for (std::size_t i = 1; i < k; ++i) {
    std::size_t cut = std::max(start, text.size() * i / k);
    while (cut < text.size() && !is_ascii_space(text[cut])) ++cut;
    segments.push_back(text.substr(start, cut - start));
    start = cut;
  }
  segments.push_back(text.substr(start));
  return segments;
}

TermCounts ingest_segmented(std::string_view text, std::size_t k, const TokenizerConfig& config, Execution exec) {
  const auto segments = split_segments(text, k);
  auto count = [&config](std::string_view seg) { return count_terms(seg, config); };
  return exec == Execution::parallel ? kernels::count_segments_omp(segments, count)
                                     : kernels::count_segments_serial(segments, count);
}

Corpus::Corpus(std::vector<Document> documents, const TokenizerConfig& config, Execution exec)
    : documents_(std::move(documents)) {
  std::sort(documents_.begin(), documents_.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& d = documents_[i];
    if (d.id.empty()) throw Error(Errc::invalid_argument, "document id must be non-empty");
    if (i > 0 && documents_[i - 1].id == d.id) throw Error(Errc::invalid_argument, "duplicate document id \"" + d.id + "\"");
    for (Field f : kFields) {
      if (!is_valid_utf8(d.field(f))) {
        throw Error(Errc::invalid_argument, "document \"" + d.id + "\": " + to_string(f) + " is not valid UTF-8");
      }
    }
  }

  field_terms_.resize(documents_.size());
  doc_terms_.resize(documents_.size());
  kernels::for_each_index(exec, documents_.size(), [&](std::size_t i) {
    for (Field f : kFields) {
      auto& counts = field_terms_[i][static_cast<std::size_t>(f)];
      counts = count_terms(documents_[i].field(f), config);
      for (const auto& [term, n] : counts) doc_terms_[i][term] += n;
    }
  });

  for (const auto& counts : doc_terms_) {
    for (const auto& [term, n] : counts) {
      auto& st = term_stats_[term];
      ++st.df;
      st.total_tf += n;
    }
  }
}

const Document* Corpus::find(std::string_view id) const {
  auto it = std::lower_bound(documents_.begin(), documents_.end(), id,
                             [](const Document& d, std::string_view key) { return d.id < key; });
  return it != documents_.end() && it->id == id ? &*it : nullptr;
}

IngestResult ingest_corpus(const std::filesystem::path& dir, const TokenizerConfig& config, Execution exec) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(Errc::io, "not a readable directory: " + dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".txt" && !entry.is_directory()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  IngestResult result;
  std::vector<Document> docs;
  for (const auto& file : files) {
    Document doc;
    doc.id = file.stem().string();
    try {
      doc.body = read_file(file);
    } catch (const Error& e) {
      result.errors.push_back({file, e.what()});
      continue;
    }
    if (!is_valid_utf8(doc.body)) {
      result.errors.push_back({file, "invalid UTF-8"});
      continue;
    }
    auto sidecar = file;
    sidecar.replace_extension(".meta.json");
    if (std::filesystem::exists(sidecar, ec)) apply_sidecar(doc, sidecar);
    docs.push_back(std::move(doc));
  }
  result.corpus = Corpus(std::move(docs), config, exec);
  return result;
}

}  // namespace mirstat
