#include "afc/error.hpp"

namespace afc {

const char* errc_name(Errc c)
{
    switch (c) {
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::DomainError: return "DomainError";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedHeader: return "TruncatedHeader";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::UnsupportedProtocol: return "UnsupportedProtocol";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InsufficientRanks: return "InsufficientRanks";
    case Errc::InsufficientBins: return "InsufficientBins";
    case Errc::MissingPayload: return "MissingPayload";
    case Errc::MissingTruthLabel: return "MissingTruthLabel";
    case Errc::Io: return "Io";
    case Errc::Internal: return "Internal";
    }
    return "Unknown";
}

} // namespace afc
