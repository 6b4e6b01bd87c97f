#include "afc/engines.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "afc/error.hpp"

namespace afc {

std::optional<IdentificationResult> OracleEngine::identify(const EngineContext&,
                                                           const PacketRecord& pkt) const
{
    if (!pkt.truth_label)
        throw Error(Errc::MissingTruthLabel, "oracle engine needs truth labels in the trace");
    return IdentificationResult{*pkt.truth_label, !pkt.truth_label->is_unknown(), 1.0};
}

static std::vector<PortRule> builtin_port_rules()
{
    using P = TransportProto;
    return {
        {P::TCP, 80, AppLabel("http"), true},
        {P::TCP, 443, AppLabel("https"), true},
        {P::UDP, 53, AppLabel("dns"), true},
        {P::TCP, 25, AppLabel("smtp"), true},
        {P::TCP, 22, AppLabel("ssh"), true},
        {P::TCP, 21, AppLabel("ftp"), true},
        {P::TCP, 20, AppLabel("ftp-data"), false},
        {P::UDP, 5060, AppLabel("sip"), true},
        {P::TCP, 6881, AppLabel("bittorrent"), true},
    };
}

PortTableEngine::PortTableEngine() : rules_(builtin_port_rules()) {}

PortTableEngine::PortTableEngine(std::vector<PortRule> rules) : rules_(std::move(rules)) {}

std::optional<IdentificationResult> PortTableEngine::identify(const EngineContext& ctx,
                                                              const PacketRecord&) const
{
    for (const PortRule& r : rules_) {
        if (r.proto == ctx.key.server.proto && r.port == ctx.key.server.port)
            return IdentificationResult{r.label, r.cacheable && !r.label.is_unknown(), 1.0};
    }
    return IdentificationResult{AppLabel::unknown(), false, 0.0};
}

PortTableEngine PortTableEngine::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, "cannot open port table '" + path + "'");
    std::vector<PortRule> rules;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        std::stringstream ss(line);
        std::string proto, port, label, cacheable;
        if (!std::getline(ss, proto, ',') || !std::getline(ss, port, ',') ||
            !std::getline(ss, label, ',') || !std::getline(ss, cacheable))
            throw Error(Errc::ParseError,
                        "port table line " + std::to_string(lineno) + ": expected 4 fields");
        PortRule rule;
        if (proto == "tcp")
            rule.proto = TransportProto::TCP;
        else if (proto == "udp")
            rule.proto = TransportProto::UDP;
        else
            throw Error(Errc::ParseError, "port table line " + std::to_string(lineno) +
                                              ": bad proto '" + proto + "'");
        unsigned long p = std::stoul(port);
        if (p > 65535)
            throw Error(Errc::ParseError,
                        "port table line " + std::to_string(lineno) + ": port out of range");
        rule.port = uint16_t(p);
        rule.label = AppLabel(label);
        rule.cacheable = cacheable == "1" || cacheable == "true" || cacheable == "yes";
        rules.push_back(std::move(rule));
    }
    return PortTableEngine(std::move(rules));
}

// ---- pattern matching ----

static int hex_val(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

// Reads one escape sequence starting after the backslash; advances i past it.
static char parse_escape(const std::string& s, size_t& i)
{
    if (i >= s.size())
        throw Error(Errc::InvalidConfig, "pattern ends in backslash");
    char c = s[i++];
    switch (c) {
    case 'n': return '\n';
    case 'r': return '\r';
    case 't': return '\t';
    case '0': return '\0';
    case 'x': {
        if (i + 1 >= s.size() || hex_val(s[i]) < 0 || hex_val(s[i + 1]) < 0)
            throw Error(Errc::InvalidConfig, "bad \\x escape in pattern");
        char v = char((hex_val(s[i]) << 4) | hex_val(s[i + 1]));
        i += 2;
        return v;
    }
    default: return c; // \. \* \\ \[ etc.
    }
}

std::vector<Pattern::Atom> Pattern::parse_sequence(const std::string& s, size_t& i, bool in_group)
{
    std::vector<Atom> out;
    while (i < s.size()) {
        char c = s[i];
        if (in_group && (c == ')' || c == '|'))
            break;
        Atom a;
        if (c == '(') {
            ++i;
            a.kind = Atom::Group;
            while (true) {
                a.alts.push_back(parse_sequence(s, i, true));
                if (i >= s.size())
                    throw Error(Errc::InvalidConfig, "unterminated group in pattern");
                if (s[i] == '|') {
                    ++i;
                    continue;
                }
                ++i; // ')'
                break;
            }
        } else if (c == '[') {
            ++i;
            a.kind = Atom::Class;
            if (i < s.size() && s[i] == '^') {
                a.negate = true;
                ++i;
            }
            while (i < s.size() && s[i] != ']') {
                char lo = s[i] == '\\' ? (++i, parse_escape(s, i)) : s[i++];
                if (i + 1 < s.size() && s[i] == '-' && s[i + 1] != ']') {
                    ++i;
                    char hi = s[i] == '\\' ? (++i, parse_escape(s, i)) : s[i++];
                    if ((unsigned char)hi < (unsigned char)lo)
                        throw Error(Errc::InvalidConfig, "reversed range in class");
                    for (int v = (unsigned char)lo; v <= (unsigned char)hi; ++v)
                        a.class_chars.push_back(char(v));
                } else {
                    a.class_chars.push_back(lo);
                }
            }
            if (i >= s.size())
                throw Error(Errc::InvalidConfig, "unterminated class in pattern");
            ++i; // ']'
        } else if (c == '.') {
            a.kind = Atom::Any;
            ++i;
        } else if (c == '\\') {
            ++i;
            a.kind = Atom::Char;
            a.ch = parse_escape(s, i);
        } else if (c == '*') {
            throw Error(Errc::InvalidConfig, "'*' with nothing to repeat");
        } else if (c == ')') {
            throw Error(Errc::InvalidConfig, "unbalanced ')' in pattern");
        } else {
            a.kind = Atom::Char;
            a.ch = c;
            ++i;
        }
        if (i < s.size() && s[i] == '*') {
            a.star = true;
            ++i;
        }
        out.push_back(std::move(a));
    }
    return out;
}

Pattern::Pattern(const std::string& text) : text_(text)
{
    size_t i = 0;
    if (!text.empty() && text[0] == '^') {
        anchored_ = true;
        i = 1;
    }
    seq_ = parse_sequence(text, i, false);
    if (i != text.size())
        throw Error(Errc::InvalidConfig, "unbalanced ')' in pattern");
    if (seq_.empty())
        throw Error(Errc::InvalidConfig, "empty pattern");
}

bool Pattern::match_one(const Atom& a, std::string_view text, size_t ti,
                        const std::function<bool(size_t)>& k)
{
    switch (a.kind) {
    case Atom::Char:
        return ti < text.size() && text[ti] == a.ch && k(ti + 1);
    case Atom::Any:
        return ti < text.size() && k(ti + 1);
    case Atom::Class: {
        if (ti >= text.size())
            return false;
        bool in = a.class_chars.find(text[ti]) != std::string::npos;
        return (in != a.negate) && k(ti + 1);
    }
    case Atom::Group:
        for (const auto& alt : a.alts)
            if (match_seq(alt, 0, text, ti, k))
                return true;
        return false;
    }
    return false;
}

bool Pattern::match_seq(const std::vector<Atom>& seq, size_t ai, std::string_view text, size_t ti,
                        const std::function<bool(size_t)>& k)
{
    if (ai == seq.size())
        return k(ti);
    const Atom& a = seq[ai];
    if (a.star) {
        if (match_seq(seq, ai + 1, text, ti, k))
            return true;
        return match_one(a, text, ti, [&](size_t nt) {
            return nt > ti && match_seq(seq, ai, text, nt, k);
        });
    }
    return match_one(a, text, ti,
                     [&](size_t nt) { return match_seq(seq, ai + 1, text, nt, k); });
}

bool Pattern::matches(std::string_view text) const
{
    static const std::function<bool(size_t)> accept = [](size_t) { return true; };
    if (anchored_)
        return match_seq(seq_, 0, text, 0, accept);
    for (size_t start = 0; start <= text.size(); ++start)
        if (match_seq(seq_, 0, text, start, accept))
            return true;
    return false;
}

// ---- signature engine ----

static std::vector<SignatureRule> builtin_signature_rules()
{
    std::vector<SignatureRule> rules;
    auto add = [&](const char* label, const char* pat) {
        rules.push_back(SignatureRule{AppLabel(label), Pattern(pat)});
    };
    add("http", "^(GET|POST|HEAD|PUT|OPTIONS).*HTTP/1\\.");
    add("ssh", "^SSH-[12]\\.");
    add("smtp", "^(EHLO|HELO|220 )");
    add("https", "^\\x16\\x03");
    add("dns", "^..\\x01\\x00\\x00\\x01\\x00\\x00");
    return rules;
}

SignatureEngine::SignatureEngine()
    : rules_(builtin_signature_rules()), max_payload_packets_(10), scan_bytes_(256)
{
}

SignatureEngine::SignatureEngine(std::vector<SignatureRule> rules, uint32_t max_payload_packets,
                                 uint32_t scan_bytes)
    : rules_(std::move(rules)), max_payload_packets_(max_payload_packets),
      scan_bytes_(scan_bytes)
{
    if (max_payload_packets_ < 1 || scan_bytes_ < 1)
        throw Error(Errc::InvalidConfig, "signature engine limits must be >= 1");
}

std::optional<IdentificationResult> SignatureEngine::identify(const EngineContext& ctx,
                                                              const PacketRecord& pkt) const
{
    if (!pkt.payload || pkt.payload->empty())
        return std::nullopt; // header packets do not consume the inspection budget
    std::string_view window(*pkt.payload);
    window = window.substr(0, std::min<size_t>(window.size(), scan_bytes_));
    for (const SignatureRule& r : rules_)
        if (r.pattern.matches(window))
            return IdentificationResult{r.label, true, 1.0};
    if (ctx.payload_packets_seen + 1 >= max_payload_packets_)
        return IdentificationResult{AppLabel::unknown(), false, 0.0};
    return std::nullopt;
}

double SignatureEngine::cost(const PacketRecord& pkt) const
{
    if (!pkt.payload)
        return 0.0;
    return double(std::min<size_t>(pkt.payload->size(), scan_bytes_));
}

SignatureEngine SignatureEngine::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, "cannot open signature set '" + path + "'");
    std::vector<SignatureRule> rules;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw Error(Errc::ParseError, "signature line " + std::to_string(lineno) +
                                              ": expected label<TAB>pattern");
        rules.push_back(SignatureRule{AppLabel(line.substr(0, tab)),
                                      Pattern(line.substr(tab + 1))});
    }
    if (rules.empty())
        throw Error(Errc::ParseError, "signature set '" + path + "' has no rules");
    return SignatureEngine(std::move(rules));
}

std::unique_ptr<Engine> make_engine(const std::string& name, const std::string& ports_file,
                                    const std::string& signatures_file)
{
    if (name == "oracle")
        return std::make_unique<OracleEngine>();
    if (name == "ports") {
        if (!ports_file.empty())
            return std::make_unique<PortTableEngine>(PortTableEngine::from_file(ports_file));
        return std::make_unique<PortTableEngine>();
    }
    if (name == "signature") {
        if (!signatures_file.empty())
            return std::make_unique<SignatureEngine>(SignatureEngine::from_file(signatures_file));
        return std::make_unique<SignatureEngine>();
    }
    throw Error(Errc::InvalidConfig, "unknown engine '" + name + "'");
}

} // namespace afc
