#ifndef AFC_REFERENCE_HPP
#define AFC_REFERENCE_HPP

// Serial reference implementations used by tests and the comparison benchmark.
// They share no logic with the optimized paths: the cache scans every resident
// entry when picking a victim, and the stack-distance oracle rescans history.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "afc/cache.hpp"
#include "afc/flow.hpp"
#include "afc/msfilter.hpp"

namespace afc::ref {

enum class EventKind { Hit, Rejected, Inserted, Replaced };

struct Event {
    EventKind kind;
    AggregateFlowKey key;
    AggregateFlowKey evicted; // meaningful only for Replaced

    bool operator==(const Event&) const = default;
};

class NaiveCache {
public:
    NaiveCache(Policy policy, size_t capacity,
               std::shared_ptr<const OracleFrequencies> oracle = nullptr);

    bool lookup(const AggregateFlowKey& key, uint64_t now);
    std::optional<AggregateFlowKey> insert(const AggregateFlowKey& key, const AppLabel& label,
                                           uint64_t now);

    const CacheStats& stats() const { return stats_; }
    void note_admission_reject() { ++stats_.admission_rejects; }
    uint64_t eviction_candidates_examined() const { return eviction_examined_; }
    size_t size() const { return entries_.size(); }

private:
    struct Entry {
        AggregateFlowKey key;
        AppLabel label;
        uint64_t frequency = 0;
        uint64_t last_access = 0;
        uint64_t inserted_at = 0;
        uint64_t touch_seq = 0; // breaks last_access ties by operation order
    };

    uint64_t rank_of(const Entry& e) const;
    size_t victim_index();

    Policy policy_;
    size_t capacity_;
    std::shared_ptr<const OracleFrequencies> oracle_;
    std::vector<Entry> entries_;
    CacheStats stats_;
    uint64_t op_seq_ = 0;
    uint64_t eviction_examined_ = 0;
};

// Replay a key-reference sequence and record the per-reference event trace.
std::vector<Event> naive_replay(const std::vector<AggregateFlowKey>& refs, Policy policy,
                                size_t capacity, const FilterConfig* filter_config,
                                CacheStats* stats_out = nullptr);

// Same trace recorded from the optimized AggregateFlowCache.
std::vector<Event> optimized_replay(const std::vector<AggregateFlowKey>& refs, Policy policy,
                                    size_t capacity, const FilterConfig* filter_config,
                                    CacheStats* stats_out = nullptr);

// O(n*u) stack-distance oracle: rescan backwards for distinct keys.
std::map<uint64_t, uint64_t> naive_stack_distances(const std::vector<AggregateFlowKey>& refs,
                                                   uint64_t* infinite_out = nullptr);

} // namespace afc::ref

#endif
