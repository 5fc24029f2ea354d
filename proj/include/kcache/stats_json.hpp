#ifndef KCACHE_STATS_JSON_HPP
#define KCACHE_STATS_JSON_HPP

#include <json.hpp>

#include "kcache/cache.hpp"

namespace kcache {

/// Cache statistics plus the effective configuration as a JSON document.
nlohmann::ordered_json stats_to_json(const CacheStats& stats, const CacheConfig& config,
                                     int stages = 4);

/// Counters-only variant for per-solver entries.
nlohmann::ordered_json stats_counters_json(const CacheStats& stats, int stages = 4);

}  // namespace kcache

#endif
