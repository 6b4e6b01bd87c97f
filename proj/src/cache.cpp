#include "afc/cache.hpp"

#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "afc/error.hpp"

namespace afc {

const char* policy_name(Policy p)
{
    switch (p) {
    case Policy::MsHybrid: return "ms-hybrid";
    case Policy::Lru: return "lru";
    case Policy::LfuInCache: return "lfu";
    case Policy::OptimalLfu: return "optimal-lfu";
    }
    return "?";
}

Policy parse_policy(const std::string& name)
{
    if (name == "ms-hybrid" || name == "mshybrid")
        return Policy::MsHybrid;
    if (name == "lru")
        return Policy::Lru;
    if (name == "lfu" || name == "lfu-in-cache")
        return Policy::LfuInCache;
    if (name == "optimal-lfu" || name == "optimal")
        return Policy::OptimalLfu;
    throw Error(Errc::InvalidConfig, "unknown policy '" + name + "'");
}

void CacheConfig::validate() const
{
    if (capacity < 1)
        throw Error(Errc::InvalidConfig, "cache capacity must be >= 1");
    if (policy == Policy::OptimalLfu && !oracle_frequencies)
        throw Error(Errc::InvalidConfig, "optimal-lfu requires oracle frequencies");
}

AggregateFlowCache::AggregateFlowCache(CacheConfig config) : config_(std::move(config))
{
    config_.validate();
    entries_.reserve(config_.capacity * 2);
}

uint64_t AggregateFlowCache::bucket_key_for(const Node& n) const
{
    switch (config_.policy) {
    case Policy::Lru: return 0;
    case Policy::OptimalLfu: {
        auto it = config_.oracle_frequencies->find(n.entry.key);
        return it == config_.oracle_frequencies->end() ? 0 : it->second;
    }
    default: return n.entry.frequency;
    }
}

void AggregateFlowCache::attach(Node& n, uint64_t bucket_key)
{
    n.bucket_key = bucket_key;
    auto& lst = buckets_[bucket_key];
    lst.push_front(n.entry.key);
    n.pos = lst.begin();
}

void AggregateFlowCache::detach(Node& n)
{
    auto it = buckets_.find(n.bucket_key);
    it->second.erase(n.pos);
    if (it->second.empty())
        buckets_.erase(it);
}

const AggregateFlowEntry* AggregateFlowCache::lookup(const AggregateFlowKey& key, uint64_t now)
{
    ++stats_.lookups;
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        ++stats_.misses;
        return nullptr;
    }
    ++stats_.hits;
    Node& n = it->second;
    n.entry.frequency += 1;
    n.entry.last_access = now;
    detach(n);
    attach(n, bucket_key_for(n));
    return &n.entry;
}

void AggregateFlowCache::evict_one()
{
    // Lowest nonempty bucket; its tail is the least recently touched member.
    auto bucket = buckets_.begin();
    const AggregateFlowKey victim = bucket->second.back();
    eviction_examined_ += 1;
    Node& n = entries_.at(victim);
    detach(n);
    entries_.erase(victim);
    ++stats_.evictions;
}

InsertResult AggregateFlowCache::insert(const AggregateFlowKey& key, const AppLabel& label,
                                        uint64_t now)
{
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        it->second.entry.label = label;
        return {InsertOutcome::AlreadyPresent, std::nullopt};
    }

    std::optional<AggregateFlowKey> evicted;
    if (entries_.size() >= config_.capacity) {
        evicted = buckets_.begin()->second.back();
        evict_one();
    }

    Node& n = entries_[key];
    n.entry = AggregateFlowEntry{key, label, 1, now, now, 0};
    attach(n, bucket_key_for(n));
    ++stats_.insertions;

    if (evicted)
        return {InsertOutcome::Replaced, evicted};
    return {InsertOutcome::Inserted, std::nullopt};
}

UpdateOutcome AggregateFlowCache::update_label(const AggregateFlowKey& key,
                                               const AppLabel& new_label)
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        return UpdateOutcome::Absent;
    if (it->second.entry.label == new_label)
        return UpdateOutcome::Updated;
    it->second.entry.label = new_label;
    it->second.entry.conflict_count += 1;
    return UpdateOutcome::ConflictRecorded;
}

bool AggregateFlowCache::erase(const AggregateFlowKey& key)
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        return false;
    detach(it->second);
    entries_.erase(it);
    return true;
}

const AggregateFlowEntry* AggregateFlowCache::peek(const AggregateFlowKey& key) const
{
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second.entry;
}

CacheStats replay_sequence(const std::vector<AggregateFlowKey>& refs, const CacheConfig& config,
                           const FilterConfig* filter_config)
{
    AggregateFlowCache cache(config);
    std::optional<MultistageFilter> filter;
    if (filter_config != nullptr)
        filter.emplace(*filter_config);

    uint64_t now = 0;
    for (const AggregateFlowKey& key : refs) {
        ++now;
        if (cache.lookup(key, now) != nullptr)
            continue;
        if (filter && filter->observe(key) == FilterDecision::Hold) {
            cache.note_admission_reject();
            continue;
        }
        cache.insert(key, AppLabel::unknown(), now);
    }
    return cache.stats();
}

std::shared_ptr<const OracleFrequencies> count_frequencies(const std::vector<AggregateFlowKey>& refs)
{
    auto freqs = std::make_shared<OracleFrequencies>();
    freqs->reserve(refs.size() / 4 + 16);
    for (const auto& k : refs)
        (*freqs)[k] += 1;
    return freqs;
}

size_t count_distinct(const std::vector<AggregateFlowKey>& refs)
{
    std::unordered_set<AggregateFlowKey> seen;
    seen.reserve(refs.size() / 4 + 16);
    for (const auto& k : refs)
        seen.insert(k);
    return seen.size();
}

std::vector<PolicyRunResult> run_policy_comparison(const std::vector<AggregateFlowKey>& refs,
                                                   const std::vector<Policy>& policies,
                                                   const std::vector<size_t>& capacities,
                                                   const FilterConfig& filter_config,
                                                   int workers)
{
    if (refs.empty())
        throw Error(Errc::EmptyInput, "empty reference sequence");

    std::shared_ptr<const OracleFrequencies> oracle;
    for (Policy p : policies)
        if (p == Policy::OptimalLfu)
            oracle = count_frequencies(refs);

    const int np = int(policies.size());
    const int nc = int(capacities.size());
    std::vector<PolicyRunResult> results(size_t(np) * nc);

#ifdef _OPENMP
    int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for collapse(2) schedule(dynamic) num_threads(threads)
#else
    (void)workers;
#endif
    for (int pi = 0; pi < np; ++pi) {
        for (int ci = 0; ci < nc; ++ci) {
            CacheConfig cfg;
            cfg.policy = policies[pi];
            cfg.capacity = capacities[ci];
            cfg.oracle_frequencies = oracle;
            const FilterConfig* fc =
                policies[pi] == Policy::MsHybrid ? &filter_config : nullptr;
            results[size_t(pi) * nc + ci] =
                PolicyRunResult{policies[pi], capacities[ci], replay_sequence(refs, cfg, fc)};
        }
    }
    return results;
}

} // namespace afc
