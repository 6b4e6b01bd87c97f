#ifndef AFC_LOCALITY_HPP
#define AFC_LOCALITY_HPP

#include <cstdint>
#include <map>
#include <unordered_set>
#include <vector>

#include "afc/flow.hpp"

namespace afc {

// One reference per new connection to its aggregate-flow key (the unit the
// cache and filter count). per_packet instead emits one reference per packet.
std::vector<AggregateFlowKey> extract_references(const std::vector<PacketRecord>& records,
                                                 bool per_packet = false,
                                                 const std::unordered_set<uint16_t>* well_known = nullptr);

struct RankFrequencyRow {
    uint64_t rank; // 1-based
    AggregateFlowKey key;
    uint64_t count;
};

struct RankFrequencyTable {
    std::vector<RankFrequencyRow> rows; // counts non-increasing, ties by key bytes
    uint64_t total = 0;
};

RankFrequencyTable rank_frequency(const std::vector<AggregateFlowKey>& refs); // throws EmptyInput

struct ZipfFit {
    double alpha = 0.0;
    double stderr_alpha = 0.0;
};

// Least-squares line through (log10 rank, log10 count) over ranks with
// count >= min_count; alpha is the negated slope.
ZipfFit zipf_fit(const RankFrequencyTable& table, uint64_t min_count = 5); // throws InsufficientRanks

struct StackDistances {
    std::map<uint64_t, uint64_t> finite; // distance -> occurrences
    uint64_t infinite = 0;               // first references
    uint64_t total_finite = 0;

    // Probabilities over finite distances; sums to 1 when any repeat exists.
    std::map<uint64_t, double> normalized() const;
};

// Inter-reference distance: distinct other keys seen since the previous
// reference to the same key. O(log n) per reference via a Fenwick tree over
// latest-occurrence positions.
StackDistances stack_distances(const std::vector<AggregateFlowKey>& refs);

// Decay exponent of the distance distribution: least-squares slope of
// log10(density) vs log10(distance) over power-of-two bins of [1, d_max],
// each bin placed at the geometric mean of its integer distances; returned
// as a positive magnitude. Throws InsufficientBins below 3 populated bins.
double slope_fit(const std::map<uint64_t, double>& histogram);

// Two-sample sup-distance between finite-distance CDFs.
double ks_statistic(const StackDistances& a, const StackDistances& b);

struct LocalityReport {
    double alpha = 0.0;
    double alpha_stderr = 0.0;
    std::map<uint64_t, double> distance_histogram;
    std::map<uint64_t, double> distance_histogram_scrambled;
    double slope_original = 0.0;
    double slope_scrambled = 0.0;
    double ks_statistic = 0.0;
    uint64_t references = 0;
    uint64_t distinct_keys = 0;
    uint64_t infinite_original = 0;
    uint64_t infinite_scrambled = 0;
};

// The scramble experiment: distance distributions for the trace and for its
// scrambled twin, their slopes, the KS distance between them, and the Zipf
// fit of the (permutation-invariant) rank-frequency table.
LocalityReport scramble_compare(const std::vector<PacketRecord>& trace, uint64_t scramble_seed,
                                bool per_packet = false);

} // namespace afc

#endif
