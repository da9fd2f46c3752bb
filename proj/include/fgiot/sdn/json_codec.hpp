#pragma once

#include <json.hpp>

#include "fgiot/gateway/policy.hpp"
#include "fgiot/iot/bus.hpp"
#include "fgiot/sdn/controller.hpp"

namespace fgiot::sdn {

// Decoders throw Error(MalformedPolicy) for policy payloads and
// Error(ParseError) for everything else.

nlohmann::json to_json(const gateway::AuthorizationPolicy& p);
gateway::AuthorizationPolicy policy_from_json(const nlohmann::json& j);

nlohmann::json to_json(const gateway::ServiceCatalog& c);
gateway::ServiceCatalog catalog_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CanonicalPolicySet& p);
CanonicalPolicySet policy_set_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SessionView& v);
nlohmann::json to_json(const gateway::PermissionSet& s);

nlohmann::json to_json(const iot::CommissioningRecord& r);
iot::CommissioningRecord commissioning_from_json(const nlohmann::json& j);

} // namespace fgiot::sdn
