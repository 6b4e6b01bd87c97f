#ifndef AFC_MSFILTER_HPP
#define AFC_MSFILTER_HPP

#include <cstdint>
#include <vector>

#include "afc/flow.hpp"

namespace afc {

struct FilterConfig {
    unsigned stages = 4;        // d
    unsigned counters = 4096;   // b, counters per stage, power of two
    unsigned threshold = 3;     // T, admission threshold
    uint64_t reset_period = 1'000'000; // observations between resets, 0 = never
    uint64_t seed = 0;

    void validate() const; // throws InvalidConfig
};

enum class FilterDecision { Admit, Hold };

struct FilterStats {
    uint64_t observations = 0; // since last reset
    uint64_t total_observations = 0;
    uint64_t admits = 0;
    uint64_t resets = 0;
};

// d parallel hashed counter stages. A key is admitted only when, after its
// increment, its counter in every stage has reached the threshold. Counters
// are 16-bit saturating; saturation cannot cause false negatives.
class MultistageFilter {
public:
    explicit MultistageFilter(const FilterConfig& config);

    FilterDecision observe(const AggregateFlowKey& key);
    void reset();

    const FilterConfig& config() const { return config_; }
    const FilterStats& stats() const { return stats_; }

    // Current stage strength k = T*b / observations-in-period.
    double stage_strength() const;

    uint16_t counter(unsigned stage, const AggregateFlowKey& key) const;

private:
    size_t index(unsigned stage, uint64_t base_hash) const;

    FilterConfig config_;
    std::vector<uint64_t> salts_;
    std::vector<uint16_t> counters_; // stages * b, row per stage
    FilterStats stats_;
};

// Upper bound on the probability that a key of frequency f passes a d-stage
// filter with stage strength k: ((1/k) * 1/(1 - f/T))^d, clamped to [0,1].
// Applicable only while f/T <= 1 - 1/k; outside that range throws DomainError.
double false_positive_bound(unsigned d, double k, double f_over_t);

} // namespace afc

#endif
