#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ckg/kg/ontology.hpp"
#include "ckg/rdf/model.hpp"
#include "ckg/sol/ir.hpp"

// Instance-layer construction: walks a lowered unit and emits one typed node
// per contract, callable, variable and statement, linked per the ontology.
// IRIs are deterministic functions of the source id and declaration path.

namespace ckg::kg {

namespace iri {

/// Percent-encodes bytes N-Triples does not allow inside an IRIREF.
inline std::string encode(const std::string& raw) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(raw.size());
    for (unsigned char c : raw) {
        bool bad = c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' ||
                   c == '}' || c == '|' || c == '^' || c == '`' || c == '\\' ||
                   c == '%' || c == 0x7f;
        if (bad) {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xf];
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

inline rdf::Iri contract(const std::string& source_id, const std::string& name) {
    return rdf::Iri("urn:ckg:" + encode(source_id) + ":" + encode(name));
}
inline rdf::Iri state_var(const std::string& source_id, const std::string& contract,
                          const std::string& var) {
    return rdf::Iri("urn:ckg:" + encode(source_id) + ":" + encode(contract) + "." +
                    encode(var));
}
inline rdf::Iri modifier(const std::string& source_id, const std::string& contract,
                         const std::string& name) {
    return rdf::Iri("urn:ckg:" + encode(source_id) + ":" + encode(contract) + "." +
                    encode(name));
}
inline rdf::Iri function(const std::string& source_id, const std::string& contract,
                         const std::string& symbol) {
    return rdf::Iri("urn:ckg:" + encode(source_id) + ":" + encode(contract) + "." +
                    encode(symbol));
}
inline rdf::Iri statement(const rdf::Iri& callable, std::size_t index) {
    return rdf::Iri(callable.value + "#s" + std::to_string(index));
}
inline rdf::Iri local(const rdf::Iri& callable, const std::string& name) {
    return rdf::Iri(callable.value + "#l" + encode(name));
}
inline rdf::Iri builtin(const std::string& name) {
    return rdf::Iri("urn:ckg:builtin:" + encode(name));
}
inline rdf::Iri external(const std::string& name) {
    return rdf::Iri("urn:ckg:extern:" + encode(name));
}
inline rdf::Iri env(const std::string& name) {
    return rdf::Iri("urn:ckg:env:" + encode(name));
}

} // namespace iri

/// Instance graph plus source back-references for reporting.
struct InstanceBuild {
    rdf::Graph graph; // ontology triples merged in
    std::map<std::string, SourceSpan> spans;
    std::string source_id;
};

namespace detail {

class InstanceBuilder {
public:
    explicit InstanceBuilder(const sol::ContractIR& ir) : ir_(ir) {
        for (const sol::CallEdge& e : ir.call_graph)
            edges_by_site_[e.caller].push_back(&e);
    }

    InstanceBuild run() {
        rdf::Graph schema = ontology().to_graph();
        for (const rdf::Triple& t : schema.triples()) add(t);
        for (const sol::ContractDecl& c : ir_.unit.contracts) emit_contract(c);
        InstanceBuild out;
        out.graph = rdf::Graph(std::move(triples_));
        out.spans = std::move(spans_);
        out.source_id = ir_.unit.source_id;
        return out;
    }

private:
    using Iri = rdf::Iri;
    using Literal = rdf::Literal;

    void add(rdf::Triple t) { triples_.insert(std::move(t)); }
    void add(const Iri& s, const char* prop, const Iri& o) {
        add({s, rdf::ckg_iri(prop), o});
    }
    void add(const Iri& s, const char* prop, Literal lit) {
        add({s, rdf::ckg_iri(prop), std::move(lit)});
    }
    void type_as(const Iri& s, const char* cls) {
        add({s, rdf::rdf_type(), rdf::ckg_iri(cls)});
    }
    void note_span(const Iri& s, const SourceSpan& sp) { spans_[s.value] = sp; }

    void emit_contract(const sol::ContractDecl& c) {
        const std::string& sid = ir_.unit.source_id;
        Iri ci = iri::contract(sid, c.name);
        switch (c.kind) {
        case sol::ContractKind::Interface: type_as(ci, "Interface"); break;
        case sol::ContractKind::Library: type_as(ci, "Library"); break;
        default: type_as(ci, "Contract"); break;
        }
        add(ci, "nameIs", Literal::str(c.name));
        add(ci, "spanIs", Literal::str(c.span.to_string()));
        note_span(ci, c.span);

        const auto& lin = ir_.linearized_bases.at(c.name);
        for (std::size_t i = 1; i < lin.size(); ++i)
            add(ci, "inheritsFrom", iri::contract(sid, lin[i]));

        for (const sol::StateVarDecl& v : c.state_vars) {
            Iri vi = iri::state_var(sid, c.name, v.name);
            type_as(vi, "StateVar");
            add(ci, "hasStateVar", vi);
            add(vi, "nameIs", Literal::str(v.name));
            add(vi, "visibilityIs", Literal::str(to_string(v.visibility)));
            add(vi, "typeIs", Literal::str(v.type_name));
            add(vi, "spanIs", Literal::str(v.span.to_string()));
            note_span(vi, v.span);
        }

        for (const sol::ModifierDecl& m : c.modifiers) {
            Iri mi = iri::modifier(sid, c.name, m.name);
            type_as(mi, "Modifier");
            add(ci, "hasModifier", mi);
            add(mi, "nameIs", Literal::str(m.name));
            add(mi, "spanIs", Literal::str(m.span.to_string()));
            note_span(mi, m.span);
            if (m.has_body) {
                sol::CallableKey key{c.name, m.name, true};
                emit_body(c, key, mi, m.body, m.params);
            }
        }

        for (const sol::FunctionDecl& f : c.functions) {
            std::string symbol = sol::function_symbol(f);
            Iri fi = iri::function(sid, c.name, symbol);
            type_as(fi, "Function");
            add(ci, "hasFunction", fi);
            add(fi, "nameIs", Literal::str(f.is_constructor ? "constructor" : f.name));
            add(fi, "visibilityIs", Literal::str(to_string(f.visibility)));
            add(fi, "mutabilityIs", Literal::str(to_string(f.mutability)));
            add(fi, "spanIs", Literal::str(f.span.to_string()));
            note_span(fi, f.span);

            sol::CallableKey key{c.name, symbol, false};
            for (const sol::CallEdge* e : edges_at(key, std::nullopt))
                if (e->kind == sol::CallEdge::Kind::ModifierApplication)
                    add(fi, "appliesModifier", callee_iri(*e));

            if (f.has_body) {
                if (!f.body.empty()) add(fi, "entryPointIs", iri::statement(fi, 0));
                emit_body(c, key, fi, f.body, f.params);
            }
        }
    }

    void emit_body(const sol::ContractDecl& c, const sol::CallableKey& key,
                   const Iri& owner, const std::vector<sol::Statement>& body,
                   const std::vector<sol::Param>& params) {
        const sol::BodyAnalysis& analysis = ir_.bodies.at(key);
        const sol::Cfg& cfg = analysis.cfg;

        std::set<std::string> param_names;
        for (const sol::Param& p : params)
            if (!p.name.empty()) param_names.insert(p.name);
        std::map<std::string, std::string> state_owner = visible_state_vars(c.name);

        for (const sol::Statement& s : body) {
            Iri si = iri::statement(owner, s.index);
            type_as(si, "Statement");
            add(owner, "hasStatement", si);
            add(si, "kindIs", Literal::str(to_string(s.kind)));
            add(si, "indexIs", Literal::integer(static_cast<long long>(s.index)));
            add(si, "spanIs", Literal::str(s.span.to_string()));
            note_span(si, s.span);

            for (const std::string& r : s.reads)
                add(si, "readsVar", variable_iri(r, owner, param_names, state_owner));
            for (const std::string& w : s.writes)
                add(si, "writesVar", variable_iri(w, owner, param_names, state_owner));

            if (s.kind != sol::StatementKind::Emit)
                for (const sol::CallEdge* e : edges_at(key, s.index))
                    add(si, "invokes", callee_iri(*e));
        }

        emit_flow(owner, body, cfg);
    }

    // hasNext follows intra-block order and fallthrough edges (through empty
    // blocks); branch edges become branchTrue/branchFalse.
    void emit_flow(const Iri& owner, const std::vector<sol::Statement>& body,
                   const sol::Cfg& cfg) {
        for (const sol::CfgBlock& b : cfg.blocks) {
            for (std::size_t i = b.stmts.first; i + 1 < b.stmts.past_end(); ++i)
                add(iri::statement(owner, i), "hasNext", iri::statement(owner, i + 1));
        }
        for (const sol::CfgEdge& e : cfg.edges) {
            const sol::CfgBlock& from = cfg.blocks[e.from];
            if (from.stmts.count == 0) continue;
            std::size_t last = from.stmts.past_end() - 1;
            std::optional<std::size_t> target = first_stmt_through(cfg, e.to);
            if (!target) continue;
            switch (e.kind) {
            case sol::EdgeKind::Fallthrough:
                add(iri::statement(owner, last), "hasNext", iri::statement(owner, *target));
                break;
            case sol::EdgeKind::TrueBranch:
                add(iri::statement(owner, last), "branchTrue", iri::statement(owner, *target));
                break;
            case sol::EdgeKind::FalseBranch:
                add(iri::statement(owner, last), "branchFalse",
                    iri::statement(owner, *target));
                break;
            case sol::EdgeKind::LoopBack:
                break; // back edges stay out of the execution chain
            }
        }
    }

    /// First statement reachable from `block` along fallthrough edges only.
    static std::optional<std::size_t> first_stmt_through(const sol::Cfg& cfg,
                                                         std::size_t block) {
        std::set<std::size_t> seen;
        std::size_t cur = block;
        for (;;) {
            if (!seen.insert(cur).second) return std::nullopt;
            const sol::CfgBlock& b = cfg.blocks[cur];
            if (b.stmts.count > 0) return b.stmts.first;
            std::optional<std::size_t> next;
            for (const sol::CfgEdge& e : cfg.edges)
                if (e.from == cur && e.kind == sol::EdgeKind::Fallthrough) next = e.to;
            if (!next) return std::nullopt;
            cur = *next;
        }
    }

    /// Maps a read/write name to its variable node, resolving scope as
    /// environment, then parameter, then visible state variable, then local.
    Iri variable_iri(const std::string& name, const Iri& owner,
                     const std::set<std::string>& params,
                     const std::map<std::string, std::string>& state_owner) {
        const std::string& sid = ir_.unit.source_id;
        if (sol::env_variables().count(name)) {
            Iri vi = iri::env(name);
            type_as(vi, "EnvVar");
            add(vi, "nameIs", Literal::str(name));
            return vi;
        }
        if (params.count(name)) {
            Iri vi = iri::local(owner, name);
            type_as(vi, "LocalVar");
            add(vi, "nameIs", Literal::str(name));
            return vi;
        }
        auto st = state_owner.find(name);
        if (st != state_owner.end()) return iri::state_var(sid, st->second, name);
        Iri vi = iri::local(owner, name);
        type_as(vi, "LocalVar");
        add(vi, "nameIs", Literal::str(name));
        return vi;
    }

    Iri callee_iri(const sol::CallEdge& e) {
        const std::string& sid = ir_.unit.source_id;
        if (e.resolved) {
            const sol::CallableKey& k = *e.resolved;
            return k.is_modifier ? iri::modifier(sid, k.contract, k.symbol)
                                 : iri::function(sid, k.contract, k.symbol);
        }
        if (sol::builtin_callables().count(e.callee_name)) {
            Iri bi = iri::builtin(e.callee_name);
            type_as(bi, "Builtin");
            add(bi, "nameIs", Literal::str(e.callee_name));
            return bi;
        }
        Iri xi = iri::external(e.callee_name);
        type_as(xi, "ExternalCallable");
        add(xi, "nameIs", Literal::str(e.callee_name));
        return xi;
    }

    /// name -> defining contract, along the linearization (derived first).
    std::map<std::string, std::string> visible_state_vars(const std::string& contract) {
        std::map<std::string, std::string> out;
        for (const std::string& cn : ir_.linearized_bases.at(contract)) {
            const sol::ContractDecl* cd = ir_.unit.find_contract(cn);
            if (!cd) continue;
            for (const sol::StateVarDecl& v : cd->state_vars)
                out.emplace(v.name, cn);
        }
        return out;
    }

    std::vector<const sol::CallEdge*> edges_at(const sol::CallableKey& key,
                                               std::optional<std::size_t> stmt) {
        std::vector<const sol::CallEdge*> out;
        auto it = edges_by_site_.find(key);
        if (it == edges_by_site_.end()) return out;
        for (const sol::CallEdge* e : it->second) {
            if (stmt.has_value()) {
                if (e->stmt_index == stmt) out.push_back(e);
            } else {
                out.push_back(e);
            }
        }
        return out;
    }

    const sol::ContractIR& ir_;
    std::map<sol::CallableKey, std::vector<const sol::CallEdge*>> edges_by_site_;
    std::set<rdf::Triple> triples_;
    std::map<std::string, SourceSpan> spans_;
};

} // namespace detail

/// Ontology plus instance triples for a lowered unit, with source spans.
inline InstanceBuild build_instance(const sol::ContractIR& ir) {
    return detail::InstanceBuilder(ir).run();
}

/// Graph-only convenience per the module surface.
inline rdf::Graph build_instance_graph(const sol::ContractIR& ir) {
    return build_instance(ir).graph;
}

} // namespace ckg::kg
