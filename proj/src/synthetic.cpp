#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "afc/error.hpp"
#include "afc/rng.hpp"
#include "afc/trace_io.hpp"

namespace afc {

std::vector<FlowProfile> default_flow_profiles()
{
    return {
        {AppLabel("http"), 80, TransportProto::TCP},
        {AppLabel("dns"), 53, TransportProto::UDP},
        {AppLabel("smtp"), 25, TransportProto::TCP},
        {AppLabel("ssh"), 22, TransportProto::TCP},
        {AppLabel("https"), 443, TransportProto::TCP},
    };
}

void SyntheticConfig::validate() const
{
    if (n_flows < 1)
        throw Error(Errc::InvalidConfig, "n_flows must be >= 1");
    if (n_flows > (1u << 24) - 2)
        throw Error(Errc::InvalidConfig, "n_flows too large for the 10.0.0.0/8 server pool");
    if (alpha < 0.0)
        throw Error(Errc::InvalidConfig, "alpha must be >= 0");
    if (packets_per_connection < 1.0)
        throw Error(Errc::InvalidConfig, "packets_per_connection must be >= 1");
    if (correlation_p < 0.0 || correlation_p >= 1.0)
        throw Error(Errc::InvalidConfig, "correlation_p must be in [0,1)");
    if (correlation_p > 0.0 && correlation_window < 1)
        throw Error(Errc::InvalidConfig, "correlation_window must be >= 1");
    if (profiles.empty())
        throw Error(Errc::InvalidConfig, "need at least one flow profile");
    if (mean_interarrival <= 0.0 || mean_packet_gap <= 0.0)
        throw Error(Errc::InvalidConfig, "timing means must be > 0");
}

namespace {

double quantize_us(double ts) { return std::round(ts * 1e6) / 1e6; }

// Canonical first-data payloads, one per label the default profiles use.
std::string payload_for(const AppLabel& label)
{
    const std::string& n = label.name();
    if (n == "http")
        return "GET /index.html HTTP/1.1\r\nHost: example.com\r\n\r\n";
    if (n == "https")
        return std::string("\x16\x03\x01\x02\x00\x01\x00\x01\xfc\x03\x03", 11) + "tlshello";
    if (n == "dns") {
        std::string q("\x12\x34\x01\x00\x00\x01\x00\x00\x00\x00\x00\x00", 12);
        q += "\x07";
        q += "example";
        q += "\x03";
        q += "com";
        q.append("\x00\x00\x01\x00\x01", 5);
        return q;
    }
    if (n == "smtp")
        return "EHLO client.example.com\r\n";
    if (n == "ssh")
        return "SSH-2.0-OpenSSH_8.9\r\n";
    return "payload:" + n;
}

// Zipf rank sampler over 1..n with P(r) ~ r^-alpha, by inverse CDF.
class ZipfSampler {
public:
    ZipfSampler(uint64_t n, double alpha)
    {
        cum_.reserve(n);
        double total = 0.0;
        for (uint64_t r = 1; r <= n; ++r) {
            total += std::pow(double(r), -alpha);
            cum_.push_back(total);
        }
    }

    uint64_t sample(Rng& rng) const
    {
        double u = rng.uniform() * cum_.back();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        if (it == cum_.end())
            --it;
        return uint64_t(it - cum_.begin()); // 0-based flow index
    }

private:
    std::vector<double> cum_;
};

} // namespace

std::vector<PacketRecord> generate_synthetic(const SyntheticConfig& cfg)
{
    cfg.validate();
    Rng rng(cfg.seed);
    ZipfSampler zipf(cfg.n_flows, cfg.alpha);

    struct Flow {
        Endpoint server;
        AppLabel label;
    };
    std::vector<Flow> flows;
    flows.reserve(cfg.n_flows);
    for (uint64_t i = 0; i < cfg.n_flows; ++i) {
        const FlowProfile& p = cfg.profiles[i % cfg.profiles.size()];
        flows.push_back({Endpoint{uint32_t(0x0A000001 + i), p.port, p.proto}, p.label});
    }

    // LRU stack of recently referenced distinct flows, capped at W.
    std::vector<uint64_t> window;
    window.reserve(cfg.correlation_window);

    std::vector<PacketRecord> records;
    records.reserve(size_t(double(cfg.n_connections) * cfg.packets_per_connection));

    double t = 1.6e9; // arbitrary epoch offset
    for (uint64_t c = 0; c < cfg.n_connections; ++c) {
        t += rng.exponential(cfg.mean_interarrival);

        uint64_t flow_idx;
        if (cfg.correlation_p > 0.0 && !window.empty() && rng.uniform() < cfg.correlation_p)
            flow_idx = window[rng.below(window.size())];
        else
            flow_idx = zipf.sample(rng);

        if (cfg.correlation_p > 0.0) {
            auto it = std::find(window.begin(), window.end(), flow_idx);
            if (it != window.end())
                window.erase(it);
            window.insert(window.begin(), flow_idx);
            if (window.size() > cfg.correlation_window)
                window.pop_back();
        }

        const Flow& flow = flows[flow_idx];
        bool tcp = flow.server.proto == TransportProto::TCP;
        Endpoint client{uint32_t(0xAC000000 + uint32_t(c / 64512)),
                        uint16_t(1024 + c % 64512), flow.server.proto};

        uint64_t npkts = rng.geometric(cfg.packets_per_connection);
        double pt = t;
        for (uint64_t k = 0; k < npkts; ++k) {
            if (k > 0)
                pt += rng.exponential(cfg.mean_packet_gap);
            PacketRecord rec;
            rec.ts = quantize_us(pt);
            bool client_to_server = (k % 2 == 0);
            rec.tuple.src = client_to_server ? client : flow.server;
            rec.tuple.dst = client_to_server ? flow.server : client;
            if (tcp) {
                if (k == 0)
                    rec.tcp_flags = tcpflag::SYN;
                else if (k == 1)
                    rec.tcp_flags = tcpflag::SYN | tcpflag::ACK;
                else
                    rec.tcp_flags = tcpflag::ACK;
            }
            bool data_pkt = cfg.with_payload && (tcp ? k == 2 : k == 0);
            if (data_pkt) {
                std::string pl = payload_for(flow.label);
                rec.payload_len = uint32_t(pl.size());
                rec.payload = std::move(pl);
                if (tcp)
                    rec.tcp_flags |= tcpflag::PSH;
            }
            rec.truth_label = flow.label;
            records.push_back(std::move(rec));
        }
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.ts < b.ts; });
    return records;
}

std::vector<PacketRecord> scramble_trace(const std::vector<PacketRecord>& records, uint64_t seed)
{
    // Connections in order of first appearance; each carries its key.
    std::unordered_map<FiveTuple, size_t> conn_index;
    std::vector<AggregateFlowKey> keys;
    std::vector<size_t> packet_conn(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        FiveTuple canon = canonical_tuple(records[i].tuple);
        auto [it, fresh] = conn_index.try_emplace(canon, keys.size());
        if (fresh)
            keys.push_back(aggregate_key(records[i]));
        packet_conn[i] = it->second;
    }

    std::vector<AggregateFlowKey> shuffled = keys;
    Rng rng(seed);
    rng.shuffle(shuffled);

    // Connection i keeps its timing and shape but adopts the server endpoint
    // of shuffled[i]; the reference order becomes a uniform permutation while
    // the key multiset and timestamp sequence stay put.
    std::vector<PacketRecord> out = records;
    for (size_t i = 0; i < out.size(); ++i) {
        const Endpoint& old_server = keys[packet_conn[i]].server;
        const Endpoint& new_server = shuffled[packet_conn[i]].server;
        PacketRecord& rec = out[i];
        bool dst_is_server = rec.tuple.dst == old_server;
        Endpoint& server_side = dst_is_server ? rec.tuple.dst : rec.tuple.src;
        Endpoint& client_side = dst_is_server ? rec.tuple.src : rec.tuple.dst;
        server_side = new_server;
        client_side.proto = new_server.proto;
        if (new_server.proto == TransportProto::UDP)
            rec.tcp_flags = 0;
    }
    return out;
}

} // namespace afc
