#ifndef AFC_TRACE_IO_HPP
#define AFC_TRACE_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "afc/flow.hpp"

namespace afc {

enum class TraceFormat { Csv, Pcap };

TraceFormat parse_format(const std::string& name); // throws InvalidConfig

struct IngestStats {
    uint64_t records = 0;
    uint64_t skipped_non_ipv4 = 0;
    uint64_t skipped_non_tcpudp = 0;
    uint64_t skipped_truncated = 0;
    uint64_t skipped_fragment = 0;
    uint64_t skipped_parse_error = 0;
    uint64_t reordered = 0; // rows stable-sorted within the 1 s tolerance window
    std::vector<std::string> warnings; // first few row-level problems, with line numbers

    uint64_t skipped_total() const
    {
        return skipped_non_ipv4 + skipped_non_tcpudp + skipped_truncated + skipped_fragment +
               skipped_parse_error;
    }
};

// Classic pcap, linktype 1 (Ethernet), IPv4 TCP/UDP only. Both microsecond and
// nanosecond magics plus their byte-swapped variants are accepted. Packets that
// do not conform are skipped and counted by reason.
std::vector<PacketRecord> read_pcap(std::istream& in, IngestStats* stats = nullptr);
void write_pcap(std::ostream& out, const std::vector<PacketRecord>& records);

// Schema (header row required):
//   ts,src_ip,src_port,dst_ip,dst_port,proto,len,flags,label,payload_hex
// proto in {tcp,udp}; flags a subset of SAFRP; label and payload_hex optional.
// Bad rows are skipped and counted with their line number.
std::vector<PacketRecord> read_csv(std::istream& in, IngestStats* stats = nullptr);
void write_csv(std::ostream& out, const std::vector<PacketRecord>& records);

std::vector<PacketRecord> read_trace_file(const std::string& path, TraceFormat format,
                                          IngestStats* stats = nullptr);
// Atomic: writes to a temp file in the same directory, then renames.
void write_trace_file(const std::string& path, TraceFormat format,
                      const std::vector<PacketRecord>& records);

// Per-flow template: server port/protocol and the truth label attached to
// every packet of the flow's connections.
struct FlowProfile {
    AppLabel label;
    uint16_t port = 80;
    TransportProto proto = TransportProto::TCP;
};

std::vector<FlowProfile> default_flow_profiles();

struct SyntheticConfig {
    uint64_t n_flows = 1000;
    double alpha = 1.0;        // Zipf exponent, >= 0
    uint64_t n_connections = 10000;
    double packets_per_connection = 10.0; // geometric mean, >= 1
    double correlation_p = 0.0;           // [0,1): short-term re-reference probability
    unsigned correlation_window = 256;    // W recent distinct flows
    uint64_t seed = 0;
    std::vector<FlowProfile> profiles = default_flow_profiles(); // flow i uses profiles[i % n]
    bool with_payload = false;            // emit label-typical payload bytes
    double mean_interarrival = 0.001;     // s between connection starts
    double mean_packet_gap = 0.010;       // s between packets of a connection

    void validate() const; // throws InvalidConfig
};

// Zipf-popular aggregate-flows with optional short-term correlation: each new
// connection picks flow rank n with probability ~ n^-alpha, except with
// probability correlation_p it re-references one of the last W distinct flows.
// Timestamps are microsecond-quantized; same seed and config give byte-identical
// output.
std::vector<PacketRecord> generate_synthetic(const SyntheticConfig& config);

// Uniformly permutes the aggregate-flow reference order while preserving the
// key multiset and the original timestamp sequence: connections keep their
// timing and shape but take their server endpoint from another connection.
std::vector<PacketRecord> scramble_trace(const std::vector<PacketRecord>& records, uint64_t seed);

} // namespace afc

#endif
