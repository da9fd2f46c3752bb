#include "fgiot/error.hpp"

namespace fgiot {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::PastEvent: return "PastEvent";
    case Errc::DuplicateImsi: return "DuplicateImsi";
    case Errc::UnknownImsi: return "UnknownImsi";
    case Errc::NoSimProfile: return "NoSimProfile";
    case Errc::AlreadyAttached: return "AlreadyAttached";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::NotPending: return "NotPending";
    case Errc::PoolExhausted: return "PoolExhausted";
    case Errc::NoActiveSession: return "NoActiveSession";
    case Errc::MalformedPolicy: return "MalformedPolicy";
    case Errc::UnknownService: return "UnknownService";
    case Errc::NoFederationPeer: return "NoFederationPeer";
    case Errc::DomainUnreachable: return "DomainUnreachable";
    case Errc::DuplicatePrefix: return "DuplicatePrefix";
    case Errc::DuplicatePriority: return "DuplicatePriority";
    case Errc::RangeError: return "RangeError";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::InvalidEncoding: return "InvalidEncoding";
    case Errc::AddressInUse: return "AddressInUse";
    case Errc::BadLink: return "BadLink";
    case Errc::NoResponder: return "NoResponder";
    case Errc::BadFilter: return "BadFilter";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::NotFound: return "NotFound";
    case Errc::Conflict: return "Conflict";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

} // namespace fgiot
