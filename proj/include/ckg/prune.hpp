#pragma once

#include <set>
#include <string>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/kg/ontology.hpp"
#include "ckg/rdf/model.hpp"

// Access-control pruning: keep the subgraph touching entry functions that
// carry an access check, the authority variables those functions use, and the
// guard evidence itself (matched modifiers, builtins, environment values).
// Including the evidence keeps the operation idempotent: re-pruning the
// result can re-derive the same relevant set.

namespace ckg {

struct PruneConfig {
    std::set<std::string> guard_modifier_names = {"onlyOwner", "onlyRole"};
    std::set<std::string> guard_builtin_names = {"msg.sender", "require", "hasRole"};
    std::set<std::string> authority_var_names = {"owner", "roles"};
    bool prefix_match = false; // opt-in: config names match as prefixes

    bool matches(const std::set<std::string>& names, const std::string& value) const {
        if (names.count(value)) return true;
        if (!prefix_match) return false;
        for (const std::string& n : names)
            if (value.rfind(n, 0) == 0) return true;
        return false;
    }
};

namespace detail {

inline void require_function(const rdf::GraphIndex& index, const rdf::Iri& f) {
    for (const rdf::Term& t : index.objects(f, rdf::rdf_type()))
        if (rdf::is_iri(t) && rdf::as_iri(t) == rdf::ckg_iri("Function")) return;
    throw NotAFunction(f.value);
}

inline bool entry_visibility(const rdf::GraphIndex& index, const rdf::Iri& f) {
    auto vis = index.literal_of(f, rdf::ckg_iri("visibilityIs"));
    return vis == "public" || vis == "external";
}

/// Modifiers applied by f whose name matches the guard set.
inline std::vector<rdf::Iri> guard_modifiers(const rdf::GraphIndex& index,
                                             const rdf::Iri& f, const PruneConfig& cfg) {
    std::vector<rdf::Iri> out;
    for (const rdf::Term& m : index.objects(f, rdf::ckg_iri("appliesModifier"))) {
        if (!rdf::is_iri(m)) continue;
        auto name = index.literal_of(rdf::as_iri(m), rdf::ckg_iri("nameIs"));
        if (name && cfg.matches(cfg.guard_modifier_names, *name))
            out.push_back(rdf::as_iri(m));
    }
    return out;
}

/// Targets read or invoked by f's statements whose name matches the guard set.
inline std::vector<rdf::Iri> guard_uses(const rdf::GraphIndex& index, const rdf::Iri& f,
                                        const PruneConfig& cfg) {
    std::vector<rdf::Iri> out;
    for (const rdf::Term& st : index.objects(f, rdf::ckg_iri("hasStatement"))) {
        if (!rdf::is_iri(st)) continue;
        for (const char* prop : {"readsVar", "invokes"}) {
            for (const rdf::Term& x : index.objects(rdf::as_iri(st), rdf::ckg_iri(prop))) {
                if (!rdf::is_iri(x)) continue;
                auto name = index.literal_of(rdf::as_iri(x), rdf::ckg_iri("nameIs"));
                if (name && cfg.matches(cfg.guard_builtin_names, *name))
                    out.push_back(rdf::as_iri(x));
            }
        }
    }
    return out;
}

} // namespace detail

/// True iff f is callable from outside: visibility public or external.
inline bool is_entry_function(const rdf::Graph& g, const rdf::Iri& f) {
    rdf::GraphIndex index(g);
    detail::require_function(index, f);
    return detail::entry_visibility(index, f);
}

/// True iff f carries a guard: a matching modifier, or a statement that reads
/// or invokes a matching builtin/environment name.
inline bool has_access_check(const rdf::Graph& g, const rdf::Iri& f,
                             const PruneConfig& cfg = {}) {
    rdf::GraphIndex index(g);
    detail::require_function(index, f);
    return !detail::guard_modifiers(index, f, cfg).empty() ||
           !detail::guard_uses(index, f, cfg).empty();
}

/// The access-control-relevant subgraph. Ontology triples are always kept.
inline rdf::Graph prune_access_control(const rdf::Graph& g, const PruneConfig& cfg = {}) {
    if (cfg.guard_modifier_names.empty() || cfg.guard_builtin_names.empty() ||
        cfg.authority_var_names.empty())
        throw Error("prune config name sets must be non-empty");

    rdf::GraphIndex index(g);
    std::set<rdf::Iri> relevant;

    // guarded entry functions plus their guard evidence
    std::vector<rdf::Iri> kept_functions;
    for (const rdf::Triple* t : index.with_predicate(rdf::rdf_type())) {
        if (!rdf::is_iri(t->object) || rdf::as_iri(t->object) != rdf::ckg_iri("Function"))
            continue;
        const rdf::Iri& f = t->subject;
        if (!detail::entry_visibility(index, f)) continue;
        std::vector<rdf::Iri> mods = detail::guard_modifiers(index, f, cfg);
        std::vector<rdf::Iri> uses = detail::guard_uses(index, f, cfg);
        if (mods.empty() && uses.empty()) continue;
        relevant.insert(f);
        relevant.insert(mods.begin(), mods.end());
        relevant.insert(uses.begin(), uses.end());
        kept_functions.push_back(f);
    }

    // authority variables used by the kept functions
    for (const rdf::Iri& f : kept_functions) {
        for (const rdf::Term& st : index.objects(f, rdf::ckg_iri("hasStatement"))) {
            if (!rdf::is_iri(st)) continue;
            for (const char* prop : {"readsVar", "writesVar"}) {
                for (const rdf::Term& v :
                     index.objects(rdf::as_iri(st), rdf::ckg_iri(prop))) {
                    if (!rdf::is_iri(v)) continue;
                    auto name = index.literal_of(rdf::as_iri(v), rdf::ckg_iri("nameIs"));
                    if (name && cfg.matches(cfg.authority_var_names, *name))
                        relevant.insert(rdf::as_iri(v));
                }
            }
        }
    }

    std::set<rdf::Triple> kept;
    for (const rdf::Triple& t : g.triples()) {
        bool touches = relevant.count(t.subject) > 0 ||
                       (rdf::is_iri(t.object) && relevant.count(rdf::as_iri(t.object)) > 0);
        if (touches || kg::is_ontology_triple(t)) kept.insert(t);
    }
    return rdf::Graph(std::move(kept), g.namespaces());
}

} // namespace ckg
