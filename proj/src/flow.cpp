#include "afc/flow.hpp"

#include <cstdio>

#include "afc/error.hpp"

namespace afc {

const char* proto_name(TransportProto p)
{
    return p == TransportProto::TCP ? "tcp" : "udp";
}

FiveTuple canonical_tuple(const FiveTuple& t)
{
    if (t.dst.addr_less(t.src))
        return FiveTuple{t.dst, t.src};
    return t;
}

std::string format_ipv4(uint32_t ip)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 0xff, (ip >> 16) & 0xff,
                  (ip >> 8) & 0xff, ip & 0xff);
    return buf;
}

uint32_t parse_ipv4(const std::string& s)
{
    unsigned a, b, c, d;
    char tail;
    if (std::sscanf(s.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) != 4 || a > 255 ||
        b > 255 || c > 255 || d > 255)
        throw Error(Errc::ParseError, "bad IPv4 address '" + s + "'");
    return (a << 24) | (b << 16) | (c << 8) | d;
}

AppLabel::AppLabel(std::string name) : name_(std::move(name))
{
    if (name_.empty() || name_.size() > 32)
        throw Error(Errc::InvalidConfig, "label must be 1..32 chars: '" + name_ + "'");
    for (char ch : name_) {
        bool ok = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '-' ||
                  ch == '_' || ch == '.';
        if (!ok)
            throw Error(Errc::InvalidConfig,
                        "label must be lowercase ASCII tokens: '" + name_ + "'");
    }
}

static bool is_well_known(uint16_t port, const std::unordered_set<uint16_t>* wk)
{
    return port < 1024 || (wk != nullptr && wk->count(port) > 0);
}

AggregateFlowKey aggregate_key(const PacketRecord& pkt, const ConnectionRecord* prior,
                               const std::unordered_set<uint16_t>* well_known)
{
    if (prior != nullptr)
        return prior->key;

    const Endpoint& src = pkt.tuple.src;
    const Endpoint& dst = pkt.tuple.dst;

    if (src.proto == TransportProto::TCP) {
        uint8_t f = pkt.tcp_flags;
        if ((f & tcpflag::SYN) != 0 && (f & tcpflag::ACK) == 0)
            return AggregateFlowKey{dst}; // D1
    }

    bool src_wk = is_well_known(src.port, well_known);
    bool dst_wk = is_well_known(dst.port, well_known);
    if (src_wk != dst_wk)
        return AggregateFlowKey{src_wk ? src : dst}; // D3

    return AggregateFlowKey{dst}; // D2
}

} // namespace afc
