#ifndef AFC_FLOW_HPP
#define AFC_FLOW_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>

#include "afc/hash.hpp"

namespace afc {

// Only TCP and UDP are classifiable; everything else is rejected at ingestion.
enum class TransportProto : uint8_t { TCP = 6, UDP = 17 };

const char* proto_name(TransportProto p);

// TCP flag bits as they appear on the wire (low byte of the flags field).
namespace tcpflag {
constexpr uint8_t FIN = 0x01;
constexpr uint8_t SYN = 0x02;
constexpr uint8_t RST = 0x04;
constexpr uint8_t PSH = 0x08;
constexpr uint8_t ACK = 0x10;
} // namespace tcpflag

// One side of a connection: (IPv4 address, transport port, protocol).
struct Endpoint {
    uint32_t ip = 0;
    uint16_t port = 0;
    TransportProto proto = TransportProto::TCP;

    bool operator==(const Endpoint&) const = default;

    // ip:port ordering; used for canonical tuple direction.
    bool addr_less(const Endpoint& o) const
    {
        if (ip != o.ip)
            return ip < o.ip;
        return port < o.port;
    }

    uint64_t pack() const
    {
        return (uint64_t(ip) << 24) | (uint64_t(port) << 8) | uint64_t(proto);
    }
};

// Identity of an aggregate-flow: the server endpoint shared by its connections.
struct AggregateFlowKey {
    Endpoint server;

    bool operator==(const AggregateFlowKey&) const = default;
    uint64_t pack() const { return server.pack(); }
};

// Connection identity. src/dst as observed; canonical form is direction-free.
struct FiveTuple {
    Endpoint src;
    Endpoint dst;

    bool operator==(const FiveTuple&) const = default;

    uint64_t pack() const { return mix64(src.pack()) ^ (mix64(dst.pack()) * 3); }
};

// Direction-independent form: lexicographically smaller (ip, port) first.
FiveTuple canonical_tuple(const FiveTuple& t);

std::string format_ipv4(uint32_t ip);
uint32_t parse_ipv4(const std::string& s); // throws ParseError

// Application label token: nonempty lowercase ASCII, at most 32 chars.
// "unknown" is the reserved invalid/unidentified value.
class AppLabel {
public:
    AppLabel() : name_("unknown") {}
    explicit AppLabel(std::string name); // validates, throws InvalidConfig

    const std::string& name() const { return name_; }
    bool is_unknown() const { return name_ == "unknown"; }

    static AppLabel unknown() { return AppLabel(); }

    bool operator==(const AppLabel&) const = default;
    bool operator<(const AppLabel& o) const { return name_ < o.name_; }

private:
    std::string name_;
};

struct IdentificationResult {
    AppLabel label;
    bool cacheable = false; // always false when label is "unknown"
    double confidence = 1.0;
};

struct PacketRecord {
    double ts = 0.0; // seconds since epoch, microsecond precision
    FiveTuple tuple;
    uint8_t tcp_flags = 0; // 0 for UDP
    uint32_t payload_len = 0;
    std::optional<std::string> payload; // captured bytes, length <= payload_len
    std::optional<AppLabel> truth_label;
};

enum class ConnState { Pending, Labeled, Sampled };

struct ConnectionRecord {
    FiveTuple tuple; // canonical
    AggregateFlowKey key;
    std::optional<AppLabel> label;
    ConnState state = ConnState::Pending;
    double first_ts = 0.0;
    double last_ts = 0.0;
    uint64_t packets_seen = 0;
    uint64_t bytes_seen = 0;
};

// Direction rules for recovering the server endpoint:
//   D1: SYN without ACK -> destination is the server.
//   D3: exactly one side's port is < 1024 or in `well_known` -> that side.
//   D2: otherwise the destination of the first observed packet.
// With prior state the connection's key is already fixed and is returned as is.
AggregateFlowKey aggregate_key(const PacketRecord& first_packet,
                               const ConnectionRecord* prior_state = nullptr,
                               const std::unordered_set<uint16_t>* well_known = nullptr);

} // namespace afc

template <> struct std::hash<afc::Endpoint> {
    size_t operator()(const afc::Endpoint& e) const { return afc::mix64(e.pack()); }
};

template <> struct std::hash<afc::AggregateFlowKey> {
    size_t operator()(const afc::AggregateFlowKey& k) const { return afc::mix64(k.pack()); }
};

template <> struct std::hash<afc::FiveTuple> {
    size_t operator()(const afc::FiveTuple& t) const { return t.pack(); }
};

#endif
