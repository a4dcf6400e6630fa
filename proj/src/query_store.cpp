#include "mirstat/query_store.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>

#include "mirstat/error.hpp"

namespace mirstat {

namespace {

std::int64_t system_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::uint64_t id_number(const std::string& id) {
  if (id.empty() || id.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(Errc::parse, "query id \"" + id + "\" is not a decimal counter");
  }
  return std::stoull(id);
}

}  // namespace

double similarity(const WeightedQuery& a, const WeightedQuery& b) {
  if (a.empty() || b.empty()) throw Error(Errc::invalid_argument, "similarity of an empty query");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, w] : a.weights) {
    na += w * w;
    if (auto it = b.weights.find(t); it != b.weights.end()) dot += w * it->second;
  }
  for (const auto& [t, w] : b.weights) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;
  // sqrt(x * x) == x exactly, so identical vectors score exactly 1.
  const double s = dot / std::sqrt(na * nb);
  return std::clamp(s, 0.0, 1.0);
}

std::string to_ndjson_line(const PersistentQuery& q) {
  nlohmann::json j;
  j["id"] = q.id;
  j["created_at"] = q.created_at;
  j["origin"] = to_string(q.vector.origin);
  j["vector"] = nlohmann::json::object();
  for (const auto& [t, w] : q.vector.weights) j["vector"][t] = w;
  j["results"] = q.results;
  return j.dump();
}

PersistentQuery from_ndjson_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse, std::string("malformed query record: ") + e.what());
  }
  try {
    PersistentQuery q;
    q.id = j.at("id").get<std::string>();
    q.created_at = j.at("created_at").get<std::int64_t>();
    if (j.contains("origin")) q.vector.origin = query_origin_from_string(j.at("origin").get<std::string>());
    for (const auto& [t, w] : j.at("vector").items()) q.vector.weights.emplace(t, w.get<double>());
    q.results = j.at("results").get<std::vector<DocId>>();
    if (q.vector.empty()) throw Error(Errc::parse, "query " + q.id + " has an empty vector");
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("malformed query record: ") + e.what());
  }
}

QueryStore::QueryStore(std::filesystem::path path, Clock clock) : path_(std::move(path)), clock_(std::move(clock)) {
  if (!clock_) clock_ = system_seconds;
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw Error(Errc::io, "cannot read " + path_.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto q = from_ndjson_line(line);
      next_id_ = std::max(next_id_, id_number(q.id) + 1);
      entries_.push_back(std::move(q));
    } catch (const Error& e) {
      throw Error(Errc::parse, path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string QueryStore::save_query(const WeightedQuery& vector, std::vector<DocId> results) {
  if (vector.empty()) throw Error(Errc::invalid_argument, "cannot save an empty query");
  std::unique_lock lock(mutex_);
  PersistentQuery q{std::to_string(next_id_), vector, std::move(results), clock_()};
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    out << to_ndjson_line(q) << '\n';
    out.flush();
    if (!out) throw Error(Errc::io, "cannot append to " + path_.string());
  }
  ++next_id_;
  entries_.push_back(q);
  return q.id;
}

std::vector<PersistentQuery> QueryStore::list() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

std::optional<PersistentQuery> QueryStore::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  for (const auto& q : entries_) {
    if (q.id == id) return q;
  }
  return std::nullopt;
}

std::size_t QueryStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::optional<ReuseHit> QueryStore::find_reusable(const WeightedQuery& q, double tau) const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(Errc::range, "tau must lie in [0, 1]");
  if (q.empty()) return std::nullopt;
  std::shared_lock lock(mutex_);
  std::optional<ReuseHit> best;
  // Later entries win ties, so scan in insertion order with >=.
  for (const auto& entry : entries_) {
    const double s = similarity(q, entry.vector);
    if (s >= tau && (!best || s >= best->similarity)) best = ReuseHit{entry, s};
  }
  return best;
}

}  // namespace mirstat
