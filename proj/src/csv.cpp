#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "afc/error.hpp"
#include "afc/trace_io.hpp"

namespace afc {

void enforce_time_order(std::vector<PacketRecord>& records, IngestStats& stats);

static const char* kCsvHeader = "ts,src_ip,src_port,dst_ip,dst_port,proto,len,flags,label,payload_hex";

TraceFormat parse_format(const std::string& name)
{
    if (name == "csv")
        return TraceFormat::Csv;
    if (name == "pcap")
        return TraceFormat::Pcap;
    throw Error(Errc::InvalidConfig, "unknown trace format '" + name + "'");
}

// Readers tolerate jitter up to 1 s and stable-sort; larger disorder is an error.
void enforce_time_order(std::vector<PacketRecord>& records, IngestStats& stats)
{
    double max_ts = -1e300;
    bool disorder = false;
    for (const PacketRecord& r : records) {
        if (r.ts < max_ts) {
            if (max_ts - r.ts > 1.0)
                throw Error(Errc::ParseError, "timestamps out of order by more than 1 s");
            disorder = true;
            ++stats.reordered;
        } else {
            max_ts = r.ts;
        }
    }
    if (disorder)
        std::stable_sort(records.begin(), records.end(),
                         [](const PacketRecord& a, const PacketRecord& b) { return a.ts < b.ts; });
}

static void note_row_problem(IngestStats& stats, size_t line, const std::string& what)
{
    ++stats.skipped_parse_error;
    if (stats.warnings.size() < 20)
        stats.warnings.push_back("line " + std::to_string(line) + ": " + what);
}

static uint8_t parse_flags(const std::string& s)
{
    uint8_t f = 0;
    for (char ch : s) {
        switch (ch) {
        case 'S': f |= tcpflag::SYN; break;
        case 'A': f |= tcpflag::ACK; break;
        case 'F': f |= tcpflag::FIN; break;
        case 'R': f |= tcpflag::RST; break;
        case 'P': f |= tcpflag::PSH; break;
        default: throw Error(Errc::ParseError, std::string("bad flag char '") + ch + "'");
        }
    }
    return f;
}

static std::string format_flags(uint8_t f)
{
    std::string s;
    if (f & tcpflag::SYN)
        s += 'S';
    if (f & tcpflag::ACK)
        s += 'A';
    if (f & tcpflag::FIN)
        s += 'F';
    if (f & tcpflag::RST)
        s += 'R';
    if (f & tcpflag::PSH)
        s += 'P';
    return s;
}

static int hex_nibble(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

static std::string decode_hex(const std::string& s)
{
    if (s.size() % 2 != 0)
        throw Error(Errc::ParseError, "odd-length payload_hex");
    std::string out;
    out.reserve(s.size() / 2);
    for (size_t i = 0; i < s.size(); i += 2) {
        int hi = hex_nibble(s[i]);
        int lo = hex_nibble(s[i + 1]);
        if (hi < 0 || lo < 0)
            throw Error(Errc::ParseError, "bad hex digit in payload_hex");
        out.push_back(char((hi << 4) | lo));
    }
    return out;
}

static std::string encode_hex(const std::string& bytes)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

static std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::vector<PacketRecord> read_csv(std::istream& in, IngestStats* stats_out)
{
    IngestStats stats;
    std::string line;
    if (!std::getline(in, line))
        throw Error(Errc::SchemaMismatch, "empty input, expected CSV header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kCsvHeader)
        throw Error(Errc::SchemaMismatch, "header does not match trace schema");

    std::vector<PacketRecord> records;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto f = split_fields(line);
        if (f.size() != 10) {
            note_row_problem(stats, lineno, "expected 10 fields");
            continue;
        }
        TransportProto proto;
        if (f[5] == "tcp")
            proto = TransportProto::TCP;
        else if (f[5] == "udp")
            proto = TransportProto::UDP;
        else {
            ++stats.skipped_non_tcpudp;
            continue;
        }
        try {
            PacketRecord rec;
            size_t pos = 0;
            rec.ts = std::stod(f[0], &pos);
            if (pos != f[0].size())
                throw Error(Errc::ParseError, "bad ts");
            unsigned long sport = std::stoul(f[2]);
            unsigned long dport = std::stoul(f[4]);
            if (sport > 65535 || dport > 65535)
                throw Error(Errc::ParseError, "port out of range");
            rec.tuple.src = Endpoint{parse_ipv4(f[1]), uint16_t(sport), proto};
            rec.tuple.dst = Endpoint{parse_ipv4(f[3]), uint16_t(dport), proto};
            rec.payload_len = uint32_t(std::stoul(f[6]));
            rec.tcp_flags = proto == TransportProto::TCP ? parse_flags(f[7]) : 0;
            if (!f[8].empty())
                rec.truth_label = AppLabel(f[8]);
            if (!f[9].empty()) {
                std::string bytes = decode_hex(f[9]);
                if (bytes.size() > rec.payload_len)
                    throw Error(Errc::ParseError, "payload longer than len");
                rec.payload = std::move(bytes);
            }
            records.push_back(std::move(rec));
        } catch (const Error& e) {
            note_row_problem(stats, lineno, e.what());
        } catch (const std::exception&) {
            note_row_problem(stats, lineno, "bad numeric field");
        }
    }
    enforce_time_order(records, stats);
    stats.records = records.size();
    if (stats_out != nullptr)
        *stats_out = stats;
    return records;
}

void write_csv(std::ostream& out, const std::vector<PacketRecord>& records)
{
    out << kCsvHeader << '\n';
    char ts_buf[40];
    for (const PacketRecord& r : records) {
        std::snprintf(ts_buf, sizeof(ts_buf), "%.6f", r.ts);
        out << ts_buf << ',' << format_ipv4(r.tuple.src.ip) << ',' << r.tuple.src.port << ','
            << format_ipv4(r.tuple.dst.ip) << ',' << r.tuple.dst.port << ','
            << proto_name(r.tuple.src.proto) << ',' << r.payload_len << ','
            << (r.tuple.src.proto == TransportProto::TCP ? format_flags(r.tcp_flags) : "")
            << ',' << (r.truth_label ? r.truth_label->name() : "") << ','
            << (r.payload ? encode_hex(*r.payload) : "") << '\n';
    }
}

std::vector<PacketRecord> read_trace_file(const std::string& path, TraceFormat format,
                                          IngestStats* stats)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::Io, "cannot open '" + path + "'");
    return format == TraceFormat::Csv ? read_csv(in, stats) : read_pcap(in, stats);
}

void write_trace_file(const std::string& path, TraceFormat format,
                      const std::vector<PacketRecord>& records)
{
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(Errc::Io, "cannot write '" + tmp + "'");
        if (format == TraceFormat::Csv)
            write_csv(out, records);
        else
            write_pcap(out, records);
        if (!out)
            throw Error(Errc::Io, "short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error(Errc::Io, "rename failed for '" + path + "'");
}

} // namespace afc
