#include "mirstat/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mirstat/error.hpp"

namespace mirstat {

namespace {

const std::vector<Posting> kNoPostings;

std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

InvertedIndex::InvertedIndex(std::vector<DocEntry> docs, std::map<Term, std::vector<Posting>> postings)
    : docs_(std::move(docs)), postings_(std::move(postings)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (docs_[i].id.empty()) throw Error(Errc::invalid_argument, "empty document id");
    if (i > 0 && !(docs_[i - 1].id < docs_[i].id)) {
      throw Error(Errc::invalid_argument, "document ids must be unique and ascending");
    }
    if (!(docs_[i].max_tfidf >= 0.0) || !std::isfinite(docs_[i].max_tfidf)) {
      throw Error(Errc::invalid_argument, "invalid max_tfidf for \"" + docs_[i].id + "\"");
    }
  }
  for (const auto& [term, list] : postings_) {
    if (list.empty() || list.size() > docs_.size()) {
      throw Error(Errc::invalid_argument, "bad posting list length for \"" + term + "\"");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].tf < 1 || list[i].doc >= docs_.size() || (i > 0 && list[i - 1].doc >= list[i].doc)) {
        throw Error(Errc::invalid_argument, "malformed postings for \"" + term + "\"");
      }
    }
  }
  rebuild_forward();
}

void InvertedIndex::rebuild_forward() {
  forward_.assign(docs_.size(), {});
  for (const auto& [term, list] : postings_) {
    for (const auto& p : list) forward_[p.doc].emplace(term, p.tf);
  }
}

const std::vector<Posting>& InvertedIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  return it == postings_.end() ? kNoPostings : it->second;
}

std::optional<std::uint32_t> InvertedIndex::doc_ordinal(std::string_view doc_id) const {
  auto it = std::lower_bound(docs_.begin(), docs_.end(), doc_id,
                             [](const DocEntry& d, std::string_view key) { return d.id < key; });
  if (it == docs_.end() || it->id != doc_id) return std::nullopt;
  return static_cast<std::uint32_t>(it - docs_.begin());
}

std::uint32_t InvertedIndex::df(std::string_view term) const noexcept {
  return static_cast<std::uint32_t>(postings(term).size());
}

std::uint32_t InvertedIndex::tf(std::uint32_t ordinal, std::string_view term) const noexcept {
  const auto& fwd = forward_[ordinal];
  auto it = fwd.find(std::string(term));
  return it == fwd.end() ? 0 : it->second;
}

double InvertedIndex::idf(std::string_view term) const {
  if (docs_.empty()) throw Error(Errc::invalid_argument, "empty index");
  const auto n = df(term);
  if (n == 0) throw Error(Errc::not_found, "term not indexed");
  return std::log(static_cast<double>(docs_.size()) / static_cast<double>(n));
}

double InvertedIndex::doc_term_weight(std::uint32_t ordinal, std::string_view term) const {
  const auto count = tf(ordinal, term);
  const double denom = docs_[ordinal].max_tfidf;
  if (count == 0 || denom <= 0.0) return 0.0;
  return std::min(1.0, static_cast<double>(count) * idf(term) / denom);
}

double InvertedIndex::doc_term_weight(std::string_view doc_id, std::string_view term) const {
  auto ord = doc_ordinal(doc_id);
  if (!ord) throw Error(Errc::not_found, "unknown document \"" + std::string(doc_id) + "\"");
  return doc_term_weight(*ord, term);
}

TermWeights InvertedIndex::doc_weight_vector(std::uint32_t ordinal) const {
  TermWeights out;
  for (const auto& [term, count] : forward_[ordinal]) out.emplace(term, doc_term_weight(ordinal, term));
  return out;
}

InvertedIndex build_index(const Corpus& corpus) {
  // Corpus keeps documents sorted by id, so corpus position == ordinal.
  std::vector<DocEntry> docs;
  docs.reserve(corpus.size());
  std::map<Term, std::vector<Posting>> postings;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    docs.push_back({corpus.documents()[i].id, 0.0});
    for (const auto& [term, count] : corpus.doc_terms(i)) {
      postings[term].push_back({static_cast<std::uint32_t>(i), count});
    }
  }
  const double n_docs = static_cast<double>(docs.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    double best = 0.0;
    for (const auto& [term, count] : corpus.doc_terms(i)) {
      const double idf = std::log(n_docs / static_cast<double>(postings[term].size()));
      best = std::max(best, static_cast<double>(count) * idf);
    }
    docs[i].max_tfidf = best;
  }
  return InvertedIndex(std::move(docs), std::move(postings));
}

std::string serialize_index(const InvertedIndex& index) {
  std::string out;
  out += "{\"N\":" + std::to_string(index.N()) + ",\"docs\":[";
  for (std::size_t i = 0; i < index.docs().size(); ++i) {
    const auto& d = index.docs()[i];
    if (i) out += ',';
    out += "{\"id\":" + json_string(d.id) + ",\"max_tfidf\":" + format_double(d.max_tfidf) + "}";
  }
  out += "],\"terms\":{";
  bool first = true;
  for (const auto& [term, list] : index.postings()) {
    if (!first) out += ',';
    first = false;
    out += json_string(term) + ":{\"df\":" + std::to_string(list.size()) + ",\"postings\":[";
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i) out += ',';
      out += "[" + json_string(index.doc_id(list[i].doc)) + "," + std::to_string(list[i].tf) + "]";
    }
    out += "]}";
  }
  out += "},\"version\":" + json_string(kIndexVersion) + "}";
  return out;
}

InvertedIndex deserialize_index(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse, "index parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(Errc::parse, "index snapshot must be a JSON object");
  const auto version = j.contains("version") && j["version"].is_string() ? j["version"].get<std::string>() : "";
  if (version != kIndexVersion) {
    throw Error(Errc::version, "index version mismatch: found \"" + version + "\", expected \"" +
                                   std::string(kIndexVersion) + "\"");
  }
  try {
    std::vector<DocEntry> docs;
    for (const auto& d : j.at("docs")) docs.push_back({d.at("id").get<std::string>(), d.at("max_tfidf").get<double>()});
    if (j.at("N").get<std::size_t>() != docs.size()) throw Error(Errc::parse, "N does not match document count");

    std::map<std::string, std::uint32_t> ordinal;
    for (std::size_t i = 0; i < docs.size(); ++i) ordinal.emplace(docs[i].id, static_cast<std::uint32_t>(i));

    std::map<Term, std::vector<Posting>> postings;
    for (const auto& [term, entry] : j.at("terms").items()) {
      auto& list = postings[term];
      for (const auto& p : entry.at("postings")) {
        const auto id = p.at(0).get<std::string>();
        auto it = ordinal.find(id);
        if (it == ordinal.end()) throw Error(Errc::parse, "posting references unknown document \"" + id + "\"");
        list.push_back({it->second, p.at(1).get<std::uint32_t>()});
      }
      if (entry.at("df").get<std::size_t>() != list.size()) {
        throw Error(Errc::parse, "df does not match postings for \"" + term + "\"");
      }
    }
    return InvertedIndex(std::move(docs), std::move(postings));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("malformed index snapshot: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_argument) throw Error(Errc::parse, e.what());
    throw;
  }
}

void save_index(const InvertedIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << serialize_index(index) << '\n';
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
}

InvertedIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_index(ss.str());
}

}  // namespace mirstat
