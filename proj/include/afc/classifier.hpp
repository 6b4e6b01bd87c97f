#ifndef AFC_CLASSIFIER_HPP
#define AFC_CLASSIFIER_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "afc/cache.hpp"
#include "afc/engines.hpp"
#include "afc/flow.hpp"
#include "afc/msfilter.hpp"

namespace afc {

struct AdapterConfig {
    double sample_prob = 0.01; // revalidation probability per cache-hit connection
    std::set<std::string> noncacheable_labels = {"ftp-data", "sip-media", "unknown"};
    uint32_t conflict_blacklist_threshold = 3;
    uint64_t rng_seed = 0;

    void validate() const; // throws InvalidConfig
};

struct PipelineConfig {
    AdapterConfig adapter;
    FilterConfig filter;
    CacheConfig cache;
    bool cache_enabled = true; // false = every connection goes to the engine
    double idle_timeout = 60.0;
    double gc_interval = 10.0; // trace-time seconds between connection gc sweeps
    std::unordered_set<uint16_t> well_known_ports; // extra D3 server ports
};

enum class Disposition { PassThrough, SentToEngine, Pending };

enum class CacheVerdict { Cached, NotCachedNoncacheable, NotCachedBlacklisted, NotCachedAdmission };

struct ClassifierReport {
    uint64_t total_packets = 0;
    uint64_t total_connections = 0;
    uint64_t engine_connections = 0;       // connections actually sent to the engine
    uint64_t cache_labeled_connections = 0;
    uint64_t engine_labeled_connections = 0;
    uint64_t unknown_connections = 0; // engine gave up
    uint64_t sampled_connections = 0;
    uint64_t pending_connections = 0; // never resolved by end of trace

    double workload_reduction = 0.0; // 1 - engine_connections/total_connections
    double engine_work_units = 0.0;
    double cache_lookup_work = 0.0; // 0.01 units per cache lookup
    double baseline_work_units = 0.0; // engine-only system on the same trace
    double speedup_estimate = 0.0;

    std::map<std::string, uint64_t> per_label; // connections per assigned label

    uint64_t truth_known = 0;   // labeled connections carrying a truth label
    uint64_t truth_matched = 0;
    double accuracy = 0.0; // truth_matched / truth_known when truth_known > 0

    uint64_t conflicts_recorded = 0;
    uint64_t blacklisted_keys = 0;
    uint64_t results_cached = 0;
    uint64_t results_noncacheable = 0;
    uint64_t results_blacklisted = 0;
    uint64_t results_admission_hold = 0;
    uint64_t gc_evictions = 0;

    CacheStats cache;
    FilterStats filter;

    void finalize();
    static ClassifierReport merge(const std::vector<ClassifierReport>& parts);
};

// The aggregate-flow pipeline: connection table in front, aggregate-flow
// cache consulted once per new connection, identification engine behind.
// Revalidation sampling is decided once per connection by a keyed hash, so
// the decision is stable under any sharding of the trace.
class Pipeline {
public:
    Pipeline(const PipelineConfig& config, const Engine& engine);

    Disposition process_packet(const PacketRecord& pkt);

    // Evicts idle (> idle_timeout), FIN-closed (both directions) and RST
    // connections. Returns the number evicted.
    size_t connection_table_gc(double now);

    ClassifierReport report() const;

    const AggregateFlowCache& cache() const { return cache_; }
    const MultistageFilter& filter() const { return filter_; }

private:
    struct Conn {
        ConnectionRecord rec;
        bool sample_decided = false;
        bool sampled = false;
        bool engine_entered = false;
        bool engine_done = false;
        uint32_t payload_packets = 0;
        bool fin_fwd = false;
        bool fin_rev = false;
        bool rst = false;
        bool baseline_done = false;
        uint32_t baseline_payload_packets = 0;
        uint64_t baseline_packets = 0;
    };

    bool sampling_selects(const FiveTuple& canon) const;
    CacheVerdict output_filter(Conn& conn, const IdentificationResult& result);
    void label_connection(Conn& conn, const AppLabel& label, bool from_cache);
    void update_baseline(Conn& conn, const PacketRecord& pkt);

    PipelineConfig config_;
    const Engine& engine_;
    MultistageFilter filter_;
    AggregateFlowCache cache_;
    std::unordered_map<FiveTuple, Conn> table_;
    std::unordered_set<AggregateFlowKey> blacklist_;
    ClassifierReport report_;
    uint64_t now_ = 0; // logical time: connection arrival index
    double last_gc_ts_ = -1.0;
};

// Streams every record through the pipeline, gc-ing periodically. workers > 1
// shards connections by hash of their aggregate-flow key; every worker owns a
// private pipeline and the per-shard reports merge additively.
ClassifierReport run_classification(const std::vector<PacketRecord>& records,
                                    const Engine& engine, const PipelineConfig& config,
                                    int workers = 1);

} // namespace afc

#endif
