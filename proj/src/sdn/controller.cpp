#include "fgiot/sdn/controller.hpp"

#include <algorithm>

#include "fgiot/error.hpp"
#include "fgiot/gateway/route_program.hpp"

namespace fgiot::sdn {

std::string EnforcementProgram::render() const
{
    std::string out;
    for (const auto& r : routes) {
        out += pep::to_string(r) + '\n';
    }
    for (const auto& a : acls) {
        out += pep::to_string(a) + '\n';
    }
    return out;
}

EnforcementProgram compile_enforcement(const SessionView& view, const CanonicalPolicySet& policies,
                                       const core5g::DomainId& domain)
{
    std::map<net::Cidr, std::string> routes;
    for (const auto& [name, ep] : policies.service_catalog) {
        routes.emplace(net::Cidr::host(ep.ip), "svc:" + name);
    }

    std::vector<const gateway::SessionRecord*> active;
    for (const auto& rec : view.entries) {
        if (rec.session.domain == domain && rec.session.state == core5g::SessionState::Active && rec.session.ip) {
            active.push_back(&rec);
        }
    }
    std::sort(active.begin(), active.end(), [](const auto* a, const auto* b) { return *a->session.ip < *b->session.ip; });

    EnforcementProgram prog;
    std::uint32_t block = 0;
    for (const auto* rec : active) {
        block += kSessionBlock;
        const auto permitted = gateway::session_permissions(*rec, policies);
        auto derived = gateway::derive_route_program(*rec->session.ip, permitted, policies.service_catalog);
        for (auto& r : derived.routes) {
            routes.emplace(r.prefix, std::move(r.next_hop));
        }
        for (auto& acl : derived.acls) {
            if (acl.priority >= kSessionBlock) {
                throw Error(Errc::ValidationError, "session ACL block overflow for " + rec->session.imsi);
            }
            acl.priority += block;
            prog.acls.push_back(std::move(acl));
        }
    }
    prog.acls.push_back(
        {kGlobalDenyPriority, net::Cidr::any(), net::Cidr::any(), std::nullopt, "*", pep::AclAction::Deny});

    for (auto& [prefix, hop] : routes) {
        prog.routes.push_back({prefix, hop});
    }
    std::sort(prog.routes.begin(), prog.routes.end(), [](const pep::RouteEntry& a, const pep::RouteEntry& b) {
        if (a.prefix.length != b.prefix.length) {
            return a.prefix.length > b.prefix.length;
        }
        return a.prefix.base < b.prefix.base;
    });
    return prog;
}

std::map<core5g::DomainId, EnforcementProgram> compile_enforcement(const SessionView& view,
                                                                   const CanonicalPolicySet& policies,
                                                                   const std::vector<core5g::DomainId>& domains)
{
    std::map<core5g::DomainId, EnforcementProgram> out;
    for (const auto& d : domains) {
        out.emplace(d, compile_enforcement(view, policies, d));
    }
    return out;
}

Controller::Controller(sim::Kernel& kernel, CanonicalPolicySet initial, ControllerConfig config)
    : kernel_(kernel), config_(config)
{
    gateway::validate_policies(initial.rules);
    if (initial.version == 0) {
        initial.version = 1;
    }
    canonical_ = std::make_shared<const CanonicalPolicySet>(std::move(initial));
    audit_.push_back({canonical_->version, "bootstrap", "initial policy set", kernel_.now(), false});
    kernel_.log("fed-sdn", "policy_updated",
                {{"actor", "bootstrap"},
                 {"concurrent", false},
                 {"description", "initial policy set"},
                 {"rule_count", canonical_->rules.size()},
                 {"version", canonical_->version}});
}

void Controller::register_domain(gateway::Gateway& gw, pep::Router& router)
{
    const auto domain = gw.domain();
    domains_[domain] = DomainState{&gw, &router};
    gw.core().on_session_change([this, domain](const core5g::PduSession& s) {
        if (s.ip && (s.state == core5g::SessionState::Active || s.state == core5g::SessionState::Released)) {
            schedule_push(domain, "session_change");
        }
    });
}

void Controller::start()
{
    for (const auto& [domain, st] : domains_) {
        schedule_push(domain, "initial");
    }
    kernel_.schedule_in(config_.reconcile_period_ms, "fed-sdn", "reconcile", [this] { reconcile_tick(); });
}

std::uint64_t Controller::update_policies(const std::string& actor, const std::string& description,
                                          const PolicyMutation& mutation)
{
    auto next = *canonical_;
    mutation(next);
    gateway::validate_policies(next.rules);
    next.version = canonical_->version + 1;
    canonical_ = std::make_shared<const CanonicalPolicySet>(std::move(next));

    // The bootstrap record is not a writer and never makes a later write concurrent.
    const bool concurrent = audit_.size() > 1 && audit_.back().ts == kernel_.now() && audit_.back().actor != actor;
    audit_.push_back({canonical_->version, actor, description, kernel_.now(), concurrent});
    kernel_.log("fed-sdn", "policy_updated",
                {{"actor", actor},
                 {"concurrent", concurrent},
                 {"description", description},
                 {"rule_count", canonical_->rules.size()},
                 {"version", canonical_->version}});
    for (const auto& [domain, st] : domains_) {
        schedule_push(domain, "policy_update");
    }
    return canonical_->version;
}

std::uint64_t Controller::add_rule(const std::string& actor, gateway::AuthorizationPolicy rule)
{
    gateway::validate_policy(rule);
    const auto id = rule.rule_id;
    return update_policies(actor, "add rule " + id, [&](CanonicalPolicySet& p) {
        if (std::any_of(p.rules.begin(), p.rules.end(), [&](const auto& r) { return r.rule_id == id; })) {
            throw Error(Errc::Conflict, "rule " + id + " already exists");
        }
        p.rules.push_back(std::move(rule));
    });
}

std::uint64_t Controller::remove_rule(const std::string& actor, const std::string& rule_id)
{
    return update_policies(actor, "remove rule " + rule_id, [&](CanonicalPolicySet& p) {
        auto it = std::find_if(p.rules.begin(), p.rules.end(), [&](const auto& r) { return r.rule_id == rule_id; });
        if (it == p.rules.end()) {
            throw Error(Errc::NotFound, "rule " + rule_id);
        }
        p.rules.erase(it);
    });
}

SessionView Controller::poll_sessions()
{
    SessionView view;
    view.as_of = kernel_.now();
    for (const auto& [domain, st] : domains_) {
        if (!st.reachable) {
            view.unreachable.push_back(domain);
            continue;
        }
        auto recs = st.gateway->live_sessions();
        view.entries.insert(view.entries.end(), std::make_move_iterator(recs.begin()),
                            std::make_move_iterator(recs.end()));
    }
    kernel_.log("fed-sdn", "sessions_polled",
                {{"entries", view.entries.size()}, {"unreachable", view.unreachable.size()}});
    return view;
}

void Controller::push_program(const core5g::DomainId& domain, const EnforcementProgram& program,
                              const CanonicalPolicySet& policies)
{
    auto it = domains_.find(domain);
    if (it == domains_.end()) {
        throw Error(Errc::DomainUnreachable, "domain " + domain + " is not registered");
    }
    auto& st = it->second;
    if (!st.reachable) {
        throw Error(Errc::DomainUnreachable, "domain " + domain + " is down");
    }
    if (st.drops_pending > 0) {
        --st.drops_pending;
        throw Error(Errc::DomainUnreachable, "push to " + domain + " dropped");
    }
    st.pep->apply_program(program.routes, program.acls, policies.version);
    st.gateway->apply_policies(policies);
    st.applied_policy_version = std::max(st.applied_policy_version, policies.version);
}

void Controller::schedule_push(const core5g::DomainId& domain, const std::string& reason)
{
    if (auto it = domains_.find(domain); it != domains_.end()) {
        ++it->second.outstanding_pushes;
    }
    kernel_.log("fed-sdn", "push_scheduled", {{"domain", domain}, {"reason", reason}, {"version", version()}});
    kernel_.schedule(kernel_.now(), "fed-sdn", "push",
                     [this, domain, snapshot = canonical_, reason] { deliver_push(domain, snapshot, reason, 0); });
}

void Controller::deliver_push(const core5g::DomainId& domain, std::shared_ptr<const CanonicalPolicySet> snapshot,
                              std::string reason, int attempt)
{
    auto it = domains_.find(domain);
    DomainState* st = it == domains_.end() ? nullptr : &it->second;
    auto finish = [&] {
        if (st != nullptr && st->outstanding_pushes > 0) {
            --st->outstanding_pushes;
        }
    };
    if (st != nullptr && snapshot->version < st->applied_policy_version) {
        kernel_.log("fed-sdn", "push_skipped",
                    {{"applied", st->applied_policy_version}, {"domain", domain}, {"version", snapshot->version}});
        finish();
        return;
    }
    try {
        SessionView view;
        view.as_of = kernel_.now();
        if (st != nullptr && st->reachable) {
            view.entries = st->gateway->live_sessions();
        }
        const auto program = compile_enforcement(view, *snapshot, domain);
        push_program(domain, program, *snapshot);
        kernel_.log("fed-sdn", "program_applied",
                    {{"acl_count", program.acls.size()},
                     {"attempt", attempt},
                     {"domain", domain},
                     {"reason", reason},
                     {"route_count", program.routes.size()},
                     {"version", snapshot->version}});
        finish();
    } catch (const Error& e) {
        if (e.code() != Errc::DomainUnreachable) {
            throw;
        }
        kernel_.log("fed-sdn", "push_failed",
                    {{"attempt", attempt}, {"detail", e.what()}, {"domain", domain}, {"version", snapshot->version}});
        if (st != nullptr && attempt < config_.max_retries) {
            kernel_.schedule_in(config_.retry_backoff_ms, "fed-sdn", "push_retry",
                                [this, domain, reason, attempt] { deliver_push(domain, canonical_, reason, attempt + 1); });
        } else {
            kernel_.log("fed-sdn", "push_alarm", {{"attempts", attempt + 1}, {"domain", domain}});
            finish();
        }
    }
}

std::vector<std::pair<core5g::DomainId, std::string>> Controller::reconcile()
{
    std::vector<std::pair<core5g::DomainId, std::string>> actions;
    for (const auto& [domain, st] : domains_) {
        if (st.applied_policy_version < version() && st.outstanding_pushes == 0) {
            actions.emplace_back(domain, "push");
        }
    }
    for (const auto& [domain, action] : actions) {
        schedule_push(domain, "reconcile");
    }
    if (!actions.empty()) {
        kernel_.log("fed-sdn", "reconcile", {{"actions", actions.size()}, {"version", version()}});
    }
    return actions;
}

void Controller::reconcile_tick()
{
    reconcile();
    kernel_.schedule_in(config_.reconcile_period_ms, "fed-sdn", "reconcile", [this] { reconcile_tick(); });
}

bool Controller::converged() const
{
    return std::all_of(domains_.begin(), domains_.end(),
                       [&](const auto& kv) { return kv.second.applied_policy_version == version(); });
}

void Controller::inject_push_drops(const core5g::DomainId& domain, int count)
{
    auto it = domains_.find(domain);
    if (it == domains_.end()) {
        throw Error(Errc::DomainUnreachable, domain);
    }
    it->second.drops_pending += count;
    kernel_.log("fed-sdn", "fault_injected", {{"count", count}, {"domain", domain}, {"kind", "drop_push"}});
}

void Controller::set_reachable(const core5g::DomainId& domain, bool reachable)
{
    auto it = domains_.find(domain);
    if (it == domains_.end()) {
        throw Error(Errc::DomainUnreachable, domain);
    }
    it->second.reachable = reachable;
    kernel_.log("fed-sdn", "domain_reachability", {{"domain", domain}, {"reachable", reachable}});
}

gateway::Gateway* Controller::gateway_for(const core5g::DomainId& domain) const
{
    auto it = domains_.find(domain);
    return it == domains_.end() ? nullptr : it->second.gateway;
}

std::vector<core5g::DomainId> Controller::domain_ids() const
{
    std::vector<core5g::DomainId> out;
    for (const auto& [d, st] : domains_) {
        out.push_back(d);
    }
    return out;
}

} // namespace fgiot::sdn
