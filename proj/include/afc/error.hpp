#ifndef AFC_ERROR_HPP
#define AFC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace afc {

// Machine-parseable error classes. The CLI maps these to exit codes:
// config errors -> 2, input errors -> 3, internal invariant violations -> 4.
enum class Errc {
    InvalidConfig,
    DomainError,
    BadMagic,
    TruncatedHeader,
    SchemaMismatch,
    ParseError,
    UnsupportedProtocol,
    EmptyInput,
    InsufficientRanks,
    InsufficientBins,
    MissingPayload,
    MissingTruthLabel,
    Io,
    Internal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code)
    {
    }

    Errc code() const { return code_; }

    // 2 = config error, 3 = input error, 4 = internal invariant violation
    int exit_code() const
    {
        switch (code_) {
        case Errc::InvalidConfig:
        case Errc::DomainError: return 2;
        case Errc::Internal: return 4;
        default: return 3;
        }
    }

private:
    Errc code_;
};

} // namespace afc

#endif
