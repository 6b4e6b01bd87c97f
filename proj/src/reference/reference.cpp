#include "reference.hpp"

#include <unordered_set>

#include "afc/error.hpp"

namespace afc::ref {

NaiveCache::NaiveCache(Policy policy, size_t capacity,
                       std::shared_ptr<const OracleFrequencies> oracle)
    : policy_(policy), capacity_(capacity), oracle_(std::move(oracle))
{
    if (capacity_ < 1)
        throw Error(Errc::InvalidConfig, "cache capacity must be >= 1");
    if (policy_ == Policy::OptimalLfu && !oracle_)
        throw Error(Errc::InvalidConfig, "optimal-lfu requires oracle frequencies");
}

uint64_t NaiveCache::rank_of(const Entry& e) const
{
    switch (policy_) {
    case Policy::Lru: return 0;
    case Policy::OptimalLfu: {
        auto it = oracle_->find(e.key);
        return it == oracle_->end() ? 0 : it->second;
    }
    default: return e.frequency;
    }
}

bool NaiveCache::lookup(const AggregateFlowKey& key, uint64_t now)
{
    ++stats_.lookups;
    ++op_seq_;
    for (Entry& e : entries_) {
        if (e.key == key) {
            e.frequency += 1;
            e.last_access = now;
            e.touch_seq = op_seq_;
            ++stats_.hits;
            return true;
        }
    }
    ++stats_.misses;
    return false;
}

size_t NaiveCache::victim_index()
{
    // Full scan: minimum policy rank, then smallest last_access, with
    // operation order breaking exact last_access ties.
    size_t best = 0;
    for (size_t i = 0; i < entries_.size(); ++i) {
        ++eviction_examined_;
        if (i == 0)
            continue;
        uint64_t ri = rank_of(entries_[i]);
        uint64_t rb = rank_of(entries_[best]);
        if (ri < rb)
            best = i;
        else if (ri == rb) {
            const Entry& a = entries_[i];
            const Entry& b = entries_[best];
            if (a.last_access < b.last_access ||
                (a.last_access == b.last_access && a.touch_seq < b.touch_seq))
                best = i;
        }
    }
    return best;
}

std::optional<AggregateFlowKey> NaiveCache::insert(const AggregateFlowKey& key,
                                                   const AppLabel& label, uint64_t now)
{
    ++op_seq_;
    for (Entry& e : entries_) {
        if (e.key == key) {
            e.label = label;
            return std::nullopt;
        }
    }

    std::optional<AggregateFlowKey> evicted;
    if (entries_.size() >= capacity_) {
        size_t v = victim_index();
        evicted = entries_[v].key;
        entries_.erase(entries_.begin() + long(v));
        ++stats_.evictions;
    }
    entries_.push_back(Entry{key, label, 1, now, now, op_seq_});
    ++stats_.insertions;
    return evicted;
}

std::vector<Event> naive_replay(const std::vector<AggregateFlowKey>& refs, Policy policy,
                                size_t capacity, const FilterConfig* filter_config,
                                CacheStats* stats_out)
{
    std::shared_ptr<const OracleFrequencies> oracle;
    if (policy == Policy::OptimalLfu)
        oracle = count_frequencies(refs);
    NaiveCache cache(policy, capacity, oracle);
    std::optional<MultistageFilter> filter;
    if (filter_config != nullptr)
        filter.emplace(*filter_config);

    std::vector<Event> events;
    events.reserve(refs.size());
    uint64_t now = 0;
    for (const AggregateFlowKey& key : refs) {
        ++now;
        if (cache.lookup(key, now)) {
            events.push_back({EventKind::Hit, key, {}});
            continue;
        }
        if (filter && filter->observe(key) == FilterDecision::Hold) {
            cache.note_admission_reject();
            events.push_back({EventKind::Rejected, key, {}});
            continue;
        }
        auto evicted = cache.insert(key, AppLabel::unknown(), now);
        if (evicted)
            events.push_back({EventKind::Replaced, key, *evicted});
        else
            events.push_back({EventKind::Inserted, key, {}});
    }
    if (stats_out != nullptr)
        *stats_out = cache.stats();
    return events;
}

std::vector<Event> optimized_replay(const std::vector<AggregateFlowKey>& refs, Policy policy,
                                    size_t capacity, const FilterConfig* filter_config,
                                    CacheStats* stats_out)
{
    CacheConfig cfg;
    cfg.policy = policy;
    cfg.capacity = capacity;
    if (policy == Policy::OptimalLfu)
        cfg.oracle_frequencies = count_frequencies(refs);
    AggregateFlowCache cache(cfg);
    std::optional<MultistageFilter> filter;
    if (filter_config != nullptr)
        filter.emplace(*filter_config);

    std::vector<Event> events;
    events.reserve(refs.size());
    uint64_t now = 0;
    for (const AggregateFlowKey& key : refs) {
        ++now;
        if (cache.lookup(key, now) != nullptr) {
            events.push_back({EventKind::Hit, key, {}});
            continue;
        }
        if (filter && filter->observe(key) == FilterDecision::Hold) {
            cache.note_admission_reject();
            events.push_back({EventKind::Rejected, key, {}});
            continue;
        }
        auto res = cache.insert(key, AppLabel::unknown(), now);
        if (res.outcome == InsertOutcome::Replaced)
            events.push_back({EventKind::Replaced, key, *res.evicted});
        else
            events.push_back({EventKind::Inserted, key, {}});
    }
    if (stats_out != nullptr)
        *stats_out = cache.stats();
    return events;
}

std::map<uint64_t, uint64_t> naive_stack_distances(const std::vector<AggregateFlowKey>& refs,
                                                   uint64_t* infinite_out)
{
    std::map<uint64_t, uint64_t> hist;
    uint64_t infinite = 0;
    for (size_t i = 0; i < refs.size(); ++i) {
        std::unordered_set<AggregateFlowKey> between;
        bool found = false;
        for (size_t j = i; j-- > 0;) {
            if (refs[j] == refs[i]) {
                found = true;
                break;
            }
            between.insert(refs[j]);
        }
        if (found)
            hist[between.size()] += 1;
        else
            ++infinite;
    }
    if (infinite_out != nullptr)
        *infinite_out = infinite;
    return hist;
}

} // namespace afc::ref
