#include "afc/locality.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "afc/error.hpp"
#include "afc/trace_io.hpp"

namespace afc {

std::vector<AggregateFlowKey> extract_references(const std::vector<PacketRecord>& records,
                                                 bool per_packet,
                                                 const std::unordered_set<uint16_t>* well_known)
{
    std::unordered_map<FiveTuple, AggregateFlowKey> connections;
    std::vector<AggregateFlowKey> refs;
    refs.reserve(per_packet ? records.size() : records.size() / 4 + 16);
    for (const PacketRecord& rec : records) {
        FiveTuple canon = canonical_tuple(rec.tuple);
        auto it = connections.find(canon);
        if (it == connections.end()) {
            AggregateFlowKey key = aggregate_key(rec, nullptr, well_known);
            connections.emplace(canon, key);
            refs.push_back(key);
        } else if (per_packet) {
            refs.push_back(it->second);
        }
    }
    return refs;
}

RankFrequencyTable rank_frequency(const std::vector<AggregateFlowKey>& refs)
{
    if (refs.empty())
        throw Error(Errc::EmptyInput, "no references to rank");
    std::unordered_map<AggregateFlowKey, uint64_t> counts;
    counts.reserve(refs.size() / 4 + 16);
    for (const auto& k : refs)
        counts[k] += 1;

    RankFrequencyTable table;
    table.total = refs.size();
    table.rows.reserve(counts.size());
    for (const auto& [key, count] : counts)
        table.rows.push_back({0, key, count});
    std::sort(table.rows.begin(), table.rows.end(),
              [](const RankFrequencyRow& a, const RankFrequencyRow& b) {
                  if (a.count != b.count)
                      return a.count > b.count;
                  return a.key.pack() < b.key.pack();
              });
    for (size_t i = 0; i < table.rows.size(); ++i)
        table.rows[i].rank = i + 1;
    return table;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    if (n > 2) {
        double ssr = 0;
        double intercept = my - fit.slope * mx;
        for (size_t i = 0; i < n; ++i) {
            double r = y[i] - (intercept + fit.slope * x[i]);
            ssr += r * r;
        }
        fit.slope_stderr = std::sqrt(ssr / double(n - 2) / sxx);
    }
    return fit;
}

} // namespace

ZipfFit zipf_fit(const RankFrequencyTable& table, uint64_t min_count)
{
    std::vector<double> lx, ly;
    for (const RankFrequencyRow& row : table.rows) {
        if (row.count < min_count)
            break; // counts are non-increasing
        lx.push_back(std::log10(double(row.rank)));
        ly.push_back(std::log10(double(row.count)));
    }
    if (lx.size() < 3)
        throw Error(Errc::InsufficientRanks,
                    "need >= 3 ranks with count >= " + std::to_string(min_count));
    LineFit fit = least_squares(lx, ly);
    return ZipfFit{-fit.slope, fit.slope_stderr};
}

namespace {

// Fenwick tree counting marked positions (latest occurrence per key).
class Fenwick {
public:
    explicit Fenwick(size_t n) : tree_(n + 1, 0) {}

    void add(size_t i, int delta)
    {
        for (; i < tree_.size(); i += i & (~i + 1))
            tree_[i] += delta;
    }

    int64_t prefix(size_t i) const
    {
        int64_t s = 0;
        for (; i > 0; i -= i & (~i + 1))
            s += tree_[i];
        return s;
    }

private:
    std::vector<int64_t> tree_;
};

} // namespace

StackDistances stack_distances(const std::vector<AggregateFlowKey>& refs)
{
    StackDistances out;
    Fenwick marked(refs.size());
    std::unordered_map<AggregateFlowKey, size_t> last_pos;
    last_pos.reserve(refs.size() / 4 + 16);

    for (size_t t = 1; t <= refs.size(); ++t) {
        const AggregateFlowKey& key = refs[t - 1];
        auto it = last_pos.find(key);
        if (it == last_pos.end()) {
            ++out.infinite;
        } else {
            size_t p = it->second;
            uint64_t distance = uint64_t(marked.prefix(t - 1) - marked.prefix(p));
            out.finite[distance] += 1;
            ++out.total_finite;
            marked.add(p, -1);
        }
        marked.add(t, +1);
        last_pos[key] = t;
    }
    return out;
}

std::map<uint64_t, double> StackDistances::normalized() const
{
    std::map<uint64_t, double> out;
    if (total_finite == 0)
        return out;
    for (const auto& [d, c] : finite)
        out[d] = double(c) / double(total_finite);
    return out;
}

double slope_fit(const std::map<uint64_t, double>& histogram)
{
    uint64_t d_max = 0;
    for (const auto& [d, p] : histogram)
        if (p > 0.0 && d >= 1)
            d_max = std::max(d_max, d);

    std::vector<double> lx, ly;
    for (uint64_t lo = 1; lo <= d_max; lo *= 2) {
        uint64_t hi = std::min(lo * 2 - 1, d_max);
        double mass = 0.0;
        auto it = histogram.lower_bound(lo);
        for (; it != histogram.end() && it->first <= hi; ++it)
            mass += it->second;
        if (mass <= 0.0)
            continue;
        double width = double(hi - lo + 1);
        // geometric mean of the integer distances covered by the bin
        double geo = std::exp((std::lgamma(double(hi) + 1.0) - std::lgamma(double(lo))) / width);
        lx.push_back(std::log10(geo));
        ly.push_back(std::log10(mass / width));
    }
    if (lx.size() < 3)
        throw Error(Errc::InsufficientBins, "need >= 3 populated distance bins");
    return -least_squares(lx, ly).slope;
}

double ks_statistic(const StackDistances& a, const StackDistances& b)
{
    auto pa = a.normalized();
    auto pb = b.normalized();
    double ca = 0.0, cb = 0.0, ks = 0.0;
    auto ia = pa.begin();
    auto ib = pb.begin();
    while (ia != pa.end() || ib != pb.end()) {
        uint64_t d;
        if (ib == pb.end() || (ia != pa.end() && ia->first <= ib->first))
            d = ia->first;
        else
            d = ib->first;
        while (ia != pa.end() && ia->first == d)
            ca += (ia++)->second;
        while (ib != pb.end() && ib->first == d)
            cb += (ib++)->second;
        ks = std::max(ks, std::abs(ca - cb));
    }
    return ks;
}

LocalityReport scramble_compare(const std::vector<PacketRecord>& trace, uint64_t scramble_seed,
                                bool per_packet)
{
    auto refs = extract_references(trace, per_packet);
    auto scrambled_refs = extract_references(scramble_trace(trace, scramble_seed), per_packet);

    LocalityReport report;
    report.references = refs.size();

    RankFrequencyTable table = rank_frequency(refs);
    report.distinct_keys = table.rows.size();
    try {
        ZipfFit fit = zipf_fit(table);
        report.alpha = fit.alpha;
        report.alpha_stderr = fit.stderr_alpha;
    } catch (const Error&) {
        report.alpha = 0.0; // too few ranks to fit; leave zeroed
        report.alpha_stderr = 0.0;
    }

    StackDistances orig = stack_distances(refs);
    StackDistances scram = stack_distances(scrambled_refs);
    report.distance_histogram = orig.normalized();
    report.distance_histogram_scrambled = scram.normalized();
    report.infinite_original = orig.infinite;
    report.infinite_scrambled = scram.infinite;
    try {
        report.slope_original = slope_fit(report.distance_histogram);
        report.slope_scrambled = slope_fit(report.distance_histogram_scrambled);
    } catch (const Error&) {
        // sparse traces may not populate 3 bins; slopes stay zero
    }
    report.ks_statistic = ks_statistic(orig, scram);
    return report;
}

} // namespace afc
