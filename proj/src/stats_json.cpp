#include "kcache/stats_json.hpp"

namespace kcache {

nlohmann::ordered_json stats_counters_json(const CacheStats& stats, int stages) {
    nlohmann::ordered_json j;
    j["accesses"] = stats.accesses;
    j["hits"] = stats.hits;
    j["misses"] = stats.misses;
    j["admissions"] = stats.admissions;
    j["rejections"] = stats.rejections;
    j["switches"] = stats.switches;
    j["hit_ratio"] = stats.hit_ratio();
    j["stage_hit_ratios"] = stats.stage_hit_ratios(stages);
    return j;
}

nlohmann::ordered_json stats_to_json(const CacheStats& stats, const CacheConfig& config,
                                     int stages) {
    nlohmann::ordered_json j;
    j["policy"] = to_string(config.policy);
    j["capacity"] = config.capacity;
    j["lambda"] = config.lambda;
    j["workers"] = config.workers;
    j["accesses"] = stats.accesses;
    j["hits"] = stats.hits;
    j["misses"] = stats.misses;
    j["admissions"] = stats.admissions;
    j["rejections"] = stats.rejections;
    j["switches"] = stats.switches;
    j["hit_ratio"] = stats.hit_ratio();
    j["stage_hit_ratios"] = stats.stage_hit_ratios(stages);
    j["q"] = config.q;
    j["n_c"] = config.checkpoint_interval();
    j["n_items"] = config.n_items;
    return j;
}

}  // namespace kcache
