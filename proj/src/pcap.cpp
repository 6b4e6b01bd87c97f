#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "afc/error.hpp"
#include "afc/trace_io.hpp"

namespace afc {

void enforce_time_order(std::vector<PacketRecord>& records, IngestStats& stats);

namespace {

constexpr uint32_t kMagicUsec = 0xa1b2c3d4;
constexpr uint32_t kMagicUsecSwap = 0xd4c3b2a1;
constexpr uint32_t kMagicNsec = 0xa1b23c4d;
constexpr uint32_t kMagicNsecSwap = 0x4d3cb2a1;

constexpr size_t kEthLen = 14;

uint32_t swap32(uint32_t v)
{
    return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}

uint16_t swap16(uint16_t v) { return uint16_t((v << 8) | (v >> 8)); }

struct Cursor {
    const unsigned char* p;
    size_t len;
    size_t off = 0;

    size_t remaining() const { return len - off; }
    bool take(void* dst, size_t n)
    {
        if (remaining() < n)
            return false;
        std::memcpy(dst, p + off, n);
        off += n;
        return true;
    }
};

// Big-endian loads for the network headers inside the frame.
uint16_t be16(const unsigned char* p) { return uint16_t((p[0] << 8) | p[1]); }
uint32_t be32(const unsigned char* p)
{
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

void put16be(std::string& out, uint16_t v)
{
    out.push_back(char(v >> 8));
    out.push_back(char(v & 0xff));
}

void put32be(std::string& out, uint32_t v)
{
    out.push_back(char(v >> 24));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char(v & 0xff));
}

void put16le(std::string& out, uint16_t v)
{
    out.push_back(char(v & 0xff));
    out.push_back(char(v >> 8));
}

void put32le(std::string& out, uint32_t v)
{
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char(v >> 24));
}

uint16_t ip_checksum(const unsigned char* hdr, size_t len)
{
    uint32_t sum = 0;
    for (size_t i = 0; i + 1 < len; i += 2)
        sum += be16(hdr + i);
    while (sum >> 16)
        sum = (sum & 0xffff) + (sum >> 16);
    return uint16_t(~sum);
}

// Parses one captured Ethernet frame into a record. Returns false when the
// packet was skipped (and counted in stats).
bool parse_frame(const unsigned char* data, size_t caplen, double ts, IngestStats& stats,
                 PacketRecord& out)
{
    if (caplen < kEthLen) {
        ++stats.skipped_truncated;
        return false;
    }
    uint16_t ethertype = be16(data + 12);
    if (ethertype != 0x0800) {
        ++stats.skipped_non_ipv4;
        return false;
    }
    const unsigned char* ip = data + kEthLen;
    size_t ip_avail = caplen - kEthLen;
    if (ip_avail < 20) {
        ++stats.skipped_truncated;
        return false;
    }
    if ((ip[0] >> 4) != 4) {
        ++stats.skipped_non_ipv4;
        return false;
    }
    size_t ihl = size_t(ip[0] & 0x0f) * 4;
    if (ihl < 20 || ip_avail < ihl) {
        ++stats.skipped_truncated;
        return false;
    }
    uint16_t frag = be16(ip + 6);
    if ((frag & 0x1fff) != 0) {
        ++stats.skipped_fragment;
        return false;
    }
    uint8_t proto = ip[9];
    if (proto != 6 && proto != 17) {
        ++stats.skipped_non_tcpudp;
        return false;
    }
    uint16_t total_len = be16(ip + 2);
    if (total_len < ihl) {
        ++stats.skipped_truncated;
        return false;
    }

    const unsigned char* l4 = ip + ihl;
    size_t l4_avail = ip_avail - ihl;
    size_t l4_hdr = 0;
    uint8_t flags = 0;
    if (proto == 6) {
        if (l4_avail < 20) {
            ++stats.skipped_truncated;
            return false;
        }
        l4_hdr = size_t(l4[12] >> 4) * 4;
        if (l4_hdr < 20 || l4_avail < l4_hdr) {
            ++stats.skipped_truncated;
            return false;
        }
        flags = l4[13];
    } else {
        if (l4_avail < 8) {
            ++stats.skipped_truncated;
            return false;
        }
        l4_hdr = 8;
    }
    if (size_t(total_len) < ihl + l4_hdr) {
        ++stats.skipped_truncated;
        return false;
    }

    TransportProto tp = proto == 6 ? TransportProto::TCP : TransportProto::UDP;
    out.ts = ts;
    out.tuple.src = Endpoint{be32(ip + 12), be16(l4), tp};
    out.tuple.dst = Endpoint{be32(ip + 16), be16(l4 + 2), tp};
    out.tcp_flags = tp == TransportProto::TCP ? flags : uint8_t(0);
    out.payload_len = uint32_t(total_len - ihl - l4_hdr);
    out.payload.reset();
    out.truth_label.reset();

    size_t captured = l4_avail - l4_hdr; // may include Ethernet padding
    captured = std::min(captured, size_t(out.payload_len));
    if (captured > 0)
        out.payload = std::string(reinterpret_cast<const char*>(l4 + l4_hdr), captured);
    return true;
}

} // namespace

std::vector<PacketRecord> read_pcap(std::istream& in, IngestStats* stats_out)
{
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Cursor cur{reinterpret_cast<const unsigned char*>(buf.data()), buf.size()};

    uint32_t magic = 0;
    if (!cur.take(&magic, 4))
        throw Error(Errc::TruncatedHeader, "file shorter than pcap magic");
    bool swapped, nsec;
    switch (magic) {
    case kMagicUsec: swapped = false; nsec = false; break;
    case kMagicUsecSwap: swapped = true; nsec = false; break;
    case kMagicNsec: swapped = false; nsec = true; break;
    case kMagicNsecSwap: swapped = true; nsec = true; break;
    default: throw Error(Errc::BadMagic, "unrecognized pcap magic");
    }

    struct {
        uint16_t ver_major, ver_minor;
        int32_t thiszone;
        uint32_t sigfigs, snaplen, network;
    } gh;
    if (!cur.take(&gh, 20))
        throw Error(Errc::TruncatedHeader, "incomplete pcap global header");
    uint32_t network = swapped ? swap32(gh.network) : gh.network;
    if (network != 1)
        throw Error(Errc::ParseError,
                    "unsupported linktype " + std::to_string(network) + " (Ethernet only)");

    IngestStats stats;
    std::vector<PacketRecord> records;
    double tick = nsec ? 1e-9 : 1e-6;
    while (cur.remaining() > 0) {
        uint32_t hdr[4];
        if (!cur.take(hdr, 16))
            throw Error(Errc::TruncatedHeader, "incomplete pcap record header");
        uint32_t ts_sec = swapped ? swap32(hdr[0]) : hdr[0];
        uint32_t ts_frac = swapped ? swap32(hdr[1]) : hdr[1];
        uint32_t incl_len = swapped ? swap32(hdr[2]) : hdr[2];
        if (cur.remaining() < incl_len)
            throw Error(Errc::TruncatedHeader, "pcap record data cut short");
        const unsigned char* data = cur.p + cur.off;
        cur.off += incl_len;

        PacketRecord rec;
        if (parse_frame(data, incl_len, double(ts_sec) + double(ts_frac) * tick, stats, rec))
            records.push_back(std::move(rec));
    }

    enforce_time_order(records, stats);
    stats.records = records.size();
    if (stats_out != nullptr)
        *stats_out = stats;
    return records;
}

void write_pcap(std::ostream& out, const std::vector<PacketRecord>& records)
{
    std::string buf;
    buf.reserve(24 + records.size() * 96);
    put32le(buf, kMagicUsec);
    put16le(buf, 2);
    put16le(buf, 4);
    put32le(buf, 0); // thiszone
    put32le(buf, 0); // sigfigs
    put32le(buf, 65535);
    put32le(buf, 1); // Ethernet

    for (const PacketRecord& r : records) {
        bool tcp = r.tuple.src.proto == TransportProto::TCP;
        size_t l4_hdr = tcp ? 20 : 8;
        if (r.payload_len > 65535 - 20 - l4_hdr)
            throw Error(Errc::ParseError, "payload_len too large for an IPv4 frame");

        double sec_part;
        double frac = std::modf(r.ts, &sec_part);
        uint32_t ts_sec = uint32_t(sec_part);
        uint32_t ts_usec = uint32_t(std::llround(frac * 1e6));
        if (ts_usec >= 1000000) {
            ts_usec -= 1000000;
            ++ts_sec;
        }

        size_t captured = r.payload ? r.payload->size() : 0;
        uint32_t incl = uint32_t(kEthLen + 20 + l4_hdr + captured);
        uint32_t orig = uint32_t(kEthLen + 20 + l4_hdr + r.payload_len);
        put32le(buf, ts_sec);
        put32le(buf, ts_usec);
        put32le(buf, incl);
        put32le(buf, orig);

        // Ethernet: synthetic locally-administered MACs
        static const char dst_mac[6] = {0x02, 0, 0, 0, 0, 0x02};
        static const char src_mac[6] = {0x02, 0, 0, 0, 0, 0x01};
        buf.append(dst_mac, 6);
        buf.append(src_mac, 6);
        put16be(buf, 0x0800);

        std::string ip;
        ip.push_back(0x45); // v4, ihl 5
        ip.push_back(0);
        put16be(ip, uint16_t(20 + l4_hdr + r.payload_len));
        put16be(ip, 0);      // id
        put16be(ip, 0x4000); // DF, offset 0
        ip.push_back(64);    // ttl
        ip.push_back(char(tcp ? 6 : 17));
        put16be(ip, 0); // checksum placeholder
        put32be(ip, r.tuple.src.ip);
        put32be(ip, r.tuple.dst.ip);
        uint16_t csum = ip_checksum(reinterpret_cast<const unsigned char*>(ip.data()), 20);
        ip[10] = char(csum >> 8);
        ip[11] = char(csum & 0xff);
        buf += ip;

        if (tcp) {
            put16be(buf, r.tuple.src.port);
            put16be(buf, r.tuple.dst.port);
            put32be(buf, 0); // seq
            put32be(buf, 0); // ack
            buf.push_back(char(5 << 4));
            buf.push_back(char(r.tcp_flags));
            put16be(buf, 65535);
            put16be(buf, 0); // checksum not filled in
            put16be(buf, 0);
        } else {
            put16be(buf, r.tuple.src.port);
            put16be(buf, r.tuple.dst.port);
            put16be(buf, uint16_t(8 + r.payload_len));
            put16be(buf, 0);
        }
        if (r.payload)
            buf += *r.payload;
    }
    out.write(buf.data(), std::streamsize(buf.size()));
}

} // namespace afc
