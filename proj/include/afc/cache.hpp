#ifndef AFC_CACHE_HPP
#define AFC_CACHE_HPP

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "afc/flow.hpp"
#include "afc/msfilter.hpp"

namespace afc {

enum class Policy { MsHybrid, Lru, LfuInCache, OptimalLfu };

const char* policy_name(Policy p);
Policy parse_policy(const std::string& name); // throws InvalidConfig

using OracleFrequencies = std::unordered_map<AggregateFlowKey, uint64_t>;

struct CacheConfig {
    size_t capacity = 1024;
    Policy policy = Policy::MsHybrid;
    // Total per-key popularity known in advance; required iff policy == OptimalLfu.
    std::shared_ptr<const OracleFrequencies> oracle_frequencies;

    void validate() const; // throws InvalidConfig
};

struct AggregateFlowEntry {
    AggregateFlowKey key;
    AppLabel label;
    uint64_t frequency = 0;   // access count since insertion; insert counts as 1
    uint64_t last_access = 0; // logical time (reference index)
    uint64_t inserted_at = 0;
    uint32_t conflict_count = 0; // label disagreements observed
};

struct CacheStats {
    uint64_t lookups = 0;
    uint64_t hits = 0;
    uint64_t misses = 0;
    uint64_t insertions = 0;
    uint64_t evictions = 0;
    uint64_t admission_rejects = 0;

    double hit_ratio() const { return lookups == 0 ? 0.0 : double(hits) / double(lookups); }
};

enum class InsertOutcome { Inserted, Replaced, AlreadyPresent };

struct InsertResult {
    InsertOutcome outcome;
    std::optional<AggregateFlowKey> evicted;
};

enum class UpdateOutcome { Updated, ConflictRecorded, Absent };

// Fixed-capacity aggregate-flow cache. Entries live in a hash table; eviction
// order is kept in frequency buckets (an ordered map frequency -> recency list),
// so a lookup updates one bucket and an eviction pops the tail of the lowest
// nonempty bucket. LRU degenerates to a single bucket; Optimal-LFU buckets by
// the oracle count instead of the running frequency.
class AggregateFlowCache {
public:
    explicit AggregateFlowCache(CacheConfig config);

    // On hit bumps frequency, refreshes recency and returns the entry.
    const AggregateFlowEntry* lookup(const AggregateFlowKey& key, uint64_t now);

    // Admission is the caller's job (multistage filter for MS-Hybrid); this
    // inserts unconditionally, evicting per policy when full.
    InsertResult insert(const AggregateFlowKey& key, const AppLabel& label, uint64_t now);

    UpdateOutcome update_label(const AggregateFlowKey& key, const AppLabel& new_label);

    bool erase(const AggregateFlowKey& key);

    // Read-only probe; no stats or recency side effects.
    const AggregateFlowEntry* peek(const AggregateFlowKey& key) const;

    size_t size() const { return entries_.size(); }
    size_t capacity() const { return config_.capacity; }
    const CacheConfig& config() const { return config_; }
    const CacheStats& stats() const { return stats_; }

    void note_admission_reject() { ++stats_.admission_rejects; }

    // Entries examined while choosing eviction victims, summed over all
    // evictions. With the bucket structure this is exactly one per eviction,
    // independent of capacity; tests assert it.
    uint64_t eviction_candidates_examined() const { return eviction_examined_; }

private:
    struct Node {
        AggregateFlowEntry entry;
        uint64_t bucket_key = 0;
        std::list<AggregateFlowKey>::iterator pos;
    };

    uint64_t bucket_key_for(const Node& n) const;
    void attach(Node& n, uint64_t bucket_key);
    void detach(Node& n);
    void evict_one();

    CacheConfig config_;
    std::unordered_map<AggregateFlowKey, Node> entries_;
    std::map<uint64_t, std::list<AggregateFlowKey>> buckets_; // front = most recent
    CacheStats stats_;
    uint64_t eviction_examined_ = 0;
};

// Replays a key-reference sequence through a fresh cache. Logical time is the
// 1-based reference index. With a filter config present (MS-Hybrid), a miss
// first passes the key through the admission filter and only an Admit inserts.
CacheStats replay_sequence(const std::vector<AggregateFlowKey>& refs, const CacheConfig& config,
                           const FilterConfig* filter_config = nullptr);

struct PolicyRunResult {
    Policy policy;
    size_t capacity;
    CacheStats stats;
};

// One fresh cache per (policy, capacity) cell; cells run in parallel.
// OptimalLfu cells share per-key totals counted in a first pass over `refs`.
// The admission filter applies to MsHybrid cells only.
std::vector<PolicyRunResult> run_policy_comparison(const std::vector<AggregateFlowKey>& refs,
                                                   const std::vector<Policy>& policies,
                                                   const std::vector<size_t>& capacities,
                                                   const FilterConfig& filter_config,
                                                   int workers = 0);

std::shared_ptr<const OracleFrequencies> count_frequencies(const std::vector<AggregateFlowKey>& refs);

size_t count_distinct(const std::vector<AggregateFlowKey>& refs);

} // namespace afc

#endif
