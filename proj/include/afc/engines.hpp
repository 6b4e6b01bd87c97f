#ifndef AFC_ENGINES_HPP
#define AFC_ENGINES_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afc/flow.hpp"

namespace afc {

// Per-connection progress the pipeline tracks on behalf of the (stateless)
// engine implementations.
struct EngineContext {
    FiveTuple tuple; // canonical
    AggregateFlowKey key;
    uint64_t packets_seen = 0;          // packets already fed, excluding this one
    uint32_t payload_packets_seen = 0;  // payload-bearing packets already inspected
};

// Identification engine contract: consulted per packet until it returns a
// result; a connection is never consulted again afterwards. cost() is the
// abstract work charged for inspecting one packet.
class Engine {
public:
    virtual ~Engine() = default;
    virtual const char* name() const = 0;
    virtual std::optional<IdentificationResult> identify(const EngineContext& ctx,
                                                         const PacketRecord& pkt) const = 0;
    virtual double cost(const PacketRecord& pkt) const = 0;
    virtual bool requires_payload() const { return false; }
};

// Returns the trace's ground-truth label on the first packet; cost 1/packet.
class OracleEngine : public Engine {
public:
    const char* name() const override { return "oracle"; }
    std::optional<IdentificationResult> identify(const EngineContext& ctx,
                                                 const PacketRecord& pkt) const override;
    double cost(const PacketRecord&) const override { return 1.0; }
};

struct PortRule {
    TransportProto proto;
    uint16_t port;
    AppLabel label;
    bool cacheable; // false for dynamically negotiated channels (ftp-data, ...)
};

// Maps the server port of the aggregate-flow key through a rule table.
class PortTableEngine : public Engine {
public:
    PortTableEngine(); // built-in table
    explicit PortTableEngine(std::vector<PortRule> rules);

    const char* name() const override { return "ports"; }
    std::optional<IdentificationResult> identify(const EngineContext& ctx,
                                                 const PacketRecord& pkt) const override;
    double cost(const PacketRecord&) const override { return 1.0; }

    // Lines: proto,port,label,cacheable  ('#' comments allowed)
    static PortTableEngine from_file(const std::string& path);

private:
    std::vector<PortRule> rules_;
};

// Pattern over payload bytes: literals, '.', '*' on the previous atom,
// character classes, groups with alternation, and backslash escapes including
// \xNN for binary protocols. A leading '^' anchors at offset zero; otherwise
// the pattern may match at any offset.
class Pattern {
public:
    explicit Pattern(const std::string& text); // throws InvalidConfig
    bool matches(std::string_view text) const;
    const std::string& text() const { return text_; }

private:
    struct Atom {
        enum Kind { Char, Any, Class, Group } kind = Char;
        char ch = 0;
        bool star = false;
        bool negate = false;                 // Class only
        std::string class_chars;             // Class member bytes, ranges expanded
        std::vector<std::vector<Atom>> alts; // Group alternatives
    };

    static std::vector<Atom> parse_sequence(const std::string& s, size_t& i, bool in_group);
    static bool match_seq(const std::vector<Atom>& seq, size_t ai, std::string_view text,
                          size_t ti, const std::function<bool(size_t)>& k);
    static bool match_one(const Atom& a, std::string_view text, size_t ti,
                          const std::function<bool(size_t)>& k);

    std::string text_;
    bool anchored_ = false;
    std::vector<Atom> seq_;
};

struct SignatureRule {
    AppLabel label;
    Pattern pattern;
};

// Payload inspection modeled after DPI engines: the ordered rule list is
// applied to the first scan_bytes of each payload-bearing packet; gives up
// with "unknown" after max_payload_packets of them. Cost per inspected packet
// is the number of payload bytes in the scan window.
class SignatureEngine : public Engine {
public:
    SignatureEngine(); // built-in rule set
    explicit SignatureEngine(std::vector<SignatureRule> rules, uint32_t max_payload_packets = 10,
                             uint32_t scan_bytes = 256);

    const char* name() const override { return "signature"; }
    std::optional<IdentificationResult> identify(const EngineContext& ctx,
                                                 const PacketRecord& pkt) const override;
    double cost(const PacketRecord& pkt) const override;
    bool requires_payload() const override { return true; }

    // Lines: label<TAB>pattern  ('#' comments allowed)
    static SignatureEngine from_file(const std::string& path);

private:
    std::vector<SignatureRule> rules_;
    uint32_t max_payload_packets_;
    uint32_t scan_bytes_;
};

std::unique_ptr<Engine> make_engine(const std::string& name, const std::string& ports_file,
                                    const std::string& signatures_file);

} // namespace afc

#endif
