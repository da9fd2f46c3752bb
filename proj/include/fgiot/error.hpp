#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fgiot {

enum class Errc {
    PastEvent,
    DuplicateImsi,
    UnknownImsi,
    NoSimProfile,
    AlreadyAttached,
    UnknownSession,
    NotPending,
    PoolExhausted,
    NoActiveSession,
    MalformedPolicy,
    UnknownService,
    NoFederationPeer,
    DomainUnreachable,
    DuplicatePrefix,
    DuplicatePriority,
    RangeError,
    OutOfRange,
    InvalidEncoding,
    AddressInUse,
    BadLink,
    NoResponder,
    BadFilter,
    Unauthorized,
    NotFound,
    Conflict,
    ParseError,
    ValidationError,
};

std::string_view errc_name(Errc code) noexcept;

/// Every recoverable failure in the library surfaces as this exception.
/// `code()` identifies the contract violation; `what()` carries detail.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace fgiot
