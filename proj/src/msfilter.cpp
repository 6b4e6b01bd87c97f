#include "afc/msfilter.hpp"

#include <algorithm>
#include <cmath>

#include "afc/error.hpp"
#include "afc/hash.hpp"

namespace afc {

void FilterConfig::validate() const
{
    if (stages < 1)
        throw Error(Errc::InvalidConfig, "filter needs at least one stage");
    if (counters < 2 || (counters & (counters - 1)) != 0)
        throw Error(Errc::InvalidConfig, "stage counter count must be a power of two >= 2");
    if (threshold < 1 || threshold > 65534)
        throw Error(Errc::InvalidConfig, "threshold must be in [1, 65534]");
}

MultistageFilter::MultistageFilter(const FilterConfig& config) : config_(config)
{
    config_.validate();
    salts_.reserve(config_.stages);
    for (unsigned s = 0; s < config_.stages; ++s)
        salts_.push_back(mix64(config_.seed + s + 1));
    counters_.assign(size_t(config_.stages) * config_.counters, 0);
}

size_t MultistageFilter::index(unsigned stage, uint64_t base_hash) const
{
    return size_t(mix64(base_hash ^ salts_[stage]) & (config_.counters - 1));
}

FilterDecision MultistageFilter::observe(const AggregateFlowKey& key)
{
    uint64_t h = keyed_hash(key.pack(), config_.seed);
    bool all_reached = true;
    for (unsigned s = 0; s < config_.stages; ++s) {
        uint16_t& c = counters_[size_t(s) * config_.counters + index(s, h)];
        if (c < 65535)
            ++c;
        if (c < config_.threshold)
            all_reached = false;
    }
    ++stats_.observations;
    ++stats_.total_observations;
    if (all_reached)
        ++stats_.admits;
    if (config_.reset_period > 0 && stats_.observations >= config_.reset_period)
        reset();
    return all_reached ? FilterDecision::Admit : FilterDecision::Hold;
}

void MultistageFilter::reset()
{
    std::fill(counters_.begin(), counters_.end(), 0);
    stats_.observations = 0;
    ++stats_.resets;
}

double MultistageFilter::stage_strength() const
{
    if (stats_.observations == 0)
        return 0.0;
    return double(config_.threshold) * double(config_.counters) / double(stats_.observations);
}

uint16_t MultistageFilter::counter(unsigned stage, const AggregateFlowKey& key) const
{
    uint64_t h = keyed_hash(key.pack(), config_.seed);
    return counters_[size_t(stage) * config_.counters + index(stage, h)];
}

double false_positive_bound(unsigned d, double k, double f_over_t)
{
    if (d < 1 || k <= 0.0 || f_over_t < 0.0)
        throw Error(Errc::DomainError, "need d >= 1, k > 0, f/T >= 0");
    if (f_over_t > 1.0 - 1.0 / k + 1e-12)
        throw Error(Errc::DomainError, "bound not applicable: f/T > 1 - 1/k");
    double per_stage = (1.0 / k) / (1.0 - f_over_t);
    double p = std::pow(per_stage, double(d));
    return std::clamp(p, 0.0, 1.0);
}

} // namespace afc
