#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/sol/ast.hpp"
#include "ckg/sol/cfg.hpp"
#include "ckg/sol/inheritance.hpp"
#include "ckg/sol/parser.hpp"
#include "ckg/sol/ssa.hpp"

// Whole-unit IR: per-contract linearizations, per-body CFG and SSA, and the
// call graph. Pointers reference declarations owned by the contained unit.

namespace ckg::sol {

/// Identifies a function or modifier by defining contract and symbol.
struct CallableKey {
    std::string contract;
    std::string symbol; // function_symbol() for functions, bare name for modifiers
    bool is_modifier = false;
    auto operator<=>(const CallableKey&) const = default;
};

struct CallEdge {
    enum class Kind { Call, ModifierApplication };
    CallableKey caller;
    std::string callee_name;                // name as written at the call site
    std::optional<CallableKey> resolved;    // empty when external
    Kind kind = Kind::Call;
    std::optional<std::size_t> stmt_index;  // defined for Kind::Call
    auto operator<=>(const CallEdge&) const = default;
};

/// Names treated as language-level builtins when a callee does not resolve.
inline const std::set<std::string>& builtin_callables() {
    static const std::set<std::string> names = {
        "require", "assert", "revert", "keccak256", "sha256", "ripemd160",
        "ecrecover", "addmod", "mulmod", "selfdestruct", "transfer", "send",
        "call", "delegatecall", "staticcall", "push", "pop",
    };
    return names;
}

/// Environment value names recognized from member access lowering.
inline const std::set<std::string>& env_variables() {
    static const std::set<std::string> names = {
        "msg.sender", "msg.value", "msg.data", "msg.sig",
        "block.timestamp", "block.number", "block.coinbase", "block.difficulty",
        "block.gaslimit", "block.chainid", "block.basefee",
        "tx.origin", "tx.gasprice", "this", "now",
    };
    return names;
}

struct BodyAnalysis {
    Cfg cfg;
    SsaForm ssa;
};

struct ContractIR {
    CompilationUnit unit;
    std::map<std::string, std::vector<std::string>> linearized_bases;
    // keyed by (contract, symbol, is_modifier); only callables with bodies
    std::map<CallableKey, BodyAnalysis> bodies;
    std::vector<CallEdge> call_graph;
    Warnings warnings;

    const ContractDecl* find_contract(const std::string& name) const {
        return unit.find_contract(name);
    }
};

namespace detail {

class IrBuilder {
public:
    explicit IrBuilder(CompilationUnit unit) {
        ir_.unit = std::move(unit);
        resolver_.emplace(ir_.unit);
    }

    ContractIR run() {
        ir_.warnings = ir_.unit.warnings;
        for (const ContractDecl& c : ir_.unit.contracts)
            ir_.linearized_bases[c.name] = resolver_->linearize(c.name);

        for (const ContractDecl& c : ir_.unit.contracts) {
            for (const FunctionDecl& f : c.functions) analyze_body(c, f);
            for (const ModifierDecl& m : c.modifiers) analyze_modifier(c, m);
        }
        return std::move(ir_);
    }

private:
    void analyze_body(const ContractDecl& c, const FunctionDecl& f) {
        CallableKey key{c.name, function_symbol(f), false};
        if (f.has_body) {
            BodyAnalysis a;
            a.cfg = build_cfg(f.body);
            a.ssa = to_ssa(a.cfg, f.body);
            ir_.bodies.emplace(key, std::move(a));
        }
        for (const std::string& mod : f.applied_modifiers) {
            // base-constructor invocations in the attribute list are not
            // modifier applications
            if (resolver_->known(mod)) continue;
            CallEdge e;
            e.caller = key;
            e.callee_name = mod;
            e.kind = CallEdge::Kind::ModifierApplication;
            e.resolved = resolve_modifier(c.name, mod);
            ir_.call_graph.push_back(std::move(e));
        }
        if (f.has_body) collect_call_edges(c, key, f.body);
    }

    void analyze_modifier(const ContractDecl& c, const ModifierDecl& m) {
        CallableKey key{c.name, m.name, true};
        if (!m.has_body) return;
        BodyAnalysis a;
        a.cfg = build_cfg(m.body);
        a.ssa = to_ssa(a.cfg, m.body);
        ir_.bodies.emplace(key, std::move(a));
        collect_call_edges(c, key, m.body);
    }

    void collect_call_edges(const ContractDecl& c, const CallableKey& caller,
                            const std::vector<Statement>& body) {
        for (const Statement& s : body) {
            if (s.kind == StatementKind::Emit) continue; // event names are not callables
            for (const std::string& callee : s.callees) {
                CallEdge e;
                e.caller = caller;
                e.callee_name = callee;
                e.kind = CallEdge::Kind::Call;
                e.stmt_index = s.index;
                e.resolved = resolve_function(c.name, callee);
                if (!e.resolved) e.resolved = resolve_modifier(c.name, callee);
                ir_.call_graph.push_back(std::move(e));
            }
        }
    }

    std::optional<CallableKey> resolve_function(const std::string& contract,
                                                const std::string& name) const {
        for (const std::string& cn : resolver_->linearize(contract)) {
            for (const FunctionDecl& f : resolver_->lookup(cn)->functions) {
                if (f.name == name)
                    return CallableKey{cn, function_symbol(f), false};
            }
        }
        return std::nullopt;
    }

    std::optional<CallableKey> resolve_modifier(const std::string& contract,
                                                const std::string& name) const {
        for (const std::string& cn : resolver_->linearize(contract)) {
            for (const ModifierDecl& m : resolver_->lookup(cn)->modifiers) {
                if (m.name == name) return CallableKey{cn, m.name, true};
            }
        }
        return std::nullopt;
    }

    ContractIR ir_;
    std::optional<InheritanceResolver> resolver_;
};

} // namespace detail

/// Full frontend: inheritance, CFG and SSA per body, call graph.
inline ContractIR lower_to_ir(CompilationUnit unit) {
    return detail::IrBuilder(std::move(unit)).run();
}

inline ContractIR lower_source(std::string_view text, std::string source_id) {
    return lower_to_ir(parse_source(text, std::move(source_id)));
}

} // namespace ckg::sol
