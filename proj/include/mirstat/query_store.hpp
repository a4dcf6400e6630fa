#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mirstat/expansion.hpp"
#include "mirstat/types.hpp"

namespace mirstat {

struct PersistentQuery {
  std::string id;
  WeightedQuery vector;
  std::vector<DocId> results;
  std::int64_t created_at = 0;  // seconds since epoch

  bool operator==(const PersistentQuery&) const = default;
};

/// Cosine of the two weight vectors over the union of their terms. Both
/// vectors must be non-empty.
double similarity(const WeightedQuery& a, const WeightedQuery& b);

struct ReuseHit {
  PersistentQuery query;
  double similarity = 0.0;
};

inline constexpr double kDefaultReuseThreshold = 0.7;

/// Append-only query database backed by an ndjson file. Readers share a lock;
/// appends are serialized. An empty path keeps the store in memory.
class QueryStore {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit QueryStore(std::filesystem::path path = {}, Clock clock = {});

  /// Assigns the next id and created_at, appends and returns the id.
  std::string save_query(const WeightedQuery& vector, std::vector<DocId> results);

  std::vector<PersistentQuery> list() const;
  std::optional<PersistentQuery> get(const std::string& id) const;
  std::size_t size() const;

  /// Best entry with similarity >= tau; ties go to the most recent entry.
  std::optional<ReuseHit> find_reusable(const WeightedQuery& q, double tau = kDefaultReuseThreshold) const;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  Clock clock_;
  std::vector<PersistentQuery> entries_;
  std::uint64_t next_id_ = 1;
  mutable std::shared_mutex mutex_;
};

std::string to_ndjson_line(const PersistentQuery& q);
PersistentQuery from_ndjson_line(std::string_view line);

}  // namespace mirstat
