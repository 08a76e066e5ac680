#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "ckg/source.hpp"

namespace ckg::sol {

enum class ContractKind { Contract, Interface, Library };
enum class Visibility { Public, External, Internal, Private };
enum class Mutability { Pure, View, Payable, Nonpayable };

inline const char* to_string(ContractKind k) {
    switch (k) {
    case ContractKind::Interface: return "interface";
    case ContractKind::Library: return "library";
    default: return "contract";
    }
}
inline const char* to_string(Visibility v) {
    switch (v) {
    case Visibility::External: return "external";
    case Visibility::Internal: return "internal";
    case Visibility::Private: return "private";
    default: return "public";
    }
}
inline const char* to_string(Mutability m) {
    switch (m) {
    case Mutability::Pure: return "pure";
    case Mutability::View: return "view";
    case Mutability::Payable: return "payable";
    default: return "nonpayable";
    }
}

// --- expressions -------------------------------------------------------------

/// Value-semantic expression tree; `text` holds the name, operator or lexeme.
struct Expr {
    enum class Kind {
        Identifier, // text = name
        Member,     // text = member name, children[0] = base
        Index,      // children[0] = base, children[1] = index
        Call,       // children[0] = callee, children[1..] = arguments
        Binary,     // text = operator
        Unary,      // text = operator (prefix)
        Postfix,    // text = ++ or --
        Literal,    // text = lexeme
        Assign,     // text = operator, children = {lhs, rhs}
        Tuple,
        Conditional, // children = {cond, then, else}
        New,         // text = type name
        TypeExpr     // text = elementary type used as cast callee
    };

    Kind kind = Kind::Literal;
    std::string text;
    std::vector<Expr> children;
    SourceSpan span{};
};

/// Member bases whose members read ambient chain state rather than storage.
inline bool is_env_namespace(const std::string& name) {
    return name == "msg" || name == "block" || name == "tx";
}

namespace detail {

// Root identifier written by an lvalue: a.b[i].c writes a.
inline void collect_lvalue(const Expr& e, std::set<std::string>& writes,
                           std::set<std::string>& reads, bool& unknown);

inline void collect_reads(const Expr& e, std::set<std::string>& reads,
                          std::set<std::string>& writes,
                          std::vector<std::string>& callees, bool& unknown) {
    switch (e.kind) {
    case Expr::Kind::Identifier:
        reads.insert(e.text);
        break;
    case Expr::Kind::Member: {
        const Expr& base = e.children[0];
        if (base.kind == Expr::Kind::Identifier && is_env_namespace(base.text)) {
            reads.insert(base.text + "." + e.text);
        } else if (base.kind == Expr::Kind::Identifier && base.text == "abi") {
            // abi.encode* reads only its arguments
        } else {
            collect_reads(base, reads, writes, callees, unknown);
        }
        break;
    }
    case Expr::Kind::Index:
        collect_reads(e.children[0], reads, writes, callees, unknown);
        if (e.children.size() > 1)
            collect_reads(e.children[1], reads, writes, callees, unknown);
        break;
    case Expr::Kind::Call: {
        const Expr& callee = e.children[0];
        if (callee.kind == Expr::Kind::Identifier || callee.kind == Expr::Kind::TypeExpr) {
            callees.push_back(callee.text);
        } else if (callee.kind == Expr::Kind::Member) {
            const Expr& base = callee.children[0];
            callees.push_back(callee.text);
            if (!(base.kind == Expr::Kind::Identifier &&
                  (is_env_namespace(base.text) || base.text == "abi")))
                collect_reads(base, reads, writes, callees, unknown);
        } else {
            collect_reads(callee, reads, writes, callees, unknown);
        }
        for (std::size_t i = 1; i < e.children.size(); ++i)
            collect_reads(e.children[i], reads, writes, callees, unknown);
        break;
    }
    case Expr::Kind::Assign: {
        collect_lvalue(e.children[0], writes, reads, unknown);
        if (e.text != "=") // compound assignment also reads the target
            collect_reads(e.children[0], reads, writes, callees, unknown);
        collect_reads(e.children[1], reads, writes, callees, unknown);
        break;
    }
    case Expr::Kind::Unary:
        if (e.text == "++" || e.text == "--") {
            collect_lvalue(e.children[0], writes, reads, unknown);
            collect_reads(e.children[0], reads, writes, callees, unknown);
        } else if (e.text == "delete") {
            collect_lvalue(e.children[0], writes, reads, unknown);
        } else {
            collect_reads(e.children[0], reads, writes, callees, unknown);
        }
        break;
    case Expr::Kind::Postfix:
        collect_lvalue(e.children[0], writes, reads, unknown);
        collect_reads(e.children[0], reads, writes, callees, unknown);
        break;
    case Expr::Kind::Binary:
    case Expr::Kind::Conditional:
    case Expr::Kind::Tuple:
        for (const Expr& c : e.children)
            collect_reads(c, reads, writes, callees, unknown);
        break;
    case Expr::Kind::Literal:
    case Expr::Kind::New:
    case Expr::Kind::TypeExpr:
        break;
    }
}

inline void collect_lvalue(const Expr& e, std::set<std::string>& writes,
                           std::set<std::string>& reads, bool& unknown) {
    switch (e.kind) {
    case Expr::Kind::Identifier:
        writes.insert(e.text);
        break;
    case Expr::Kind::Member: {
        const Expr& base = e.children[0];
        if (base.kind == Expr::Kind::Identifier && is_env_namespace(base.text))
            break; // environment members are not writable storage
        collect_lvalue(base, writes, reads, unknown);
        break;
    }
    case Expr::Kind::Index: {
        collect_lvalue(e.children[0], writes, reads, unknown);
        if (e.children.size() > 1) {
            bool dummy = false;
            std::vector<std::string> no_callees;
            collect_reads(e.children[1], reads, writes, no_callees, dummy);
        }
        break;
    }
    case Expr::Kind::Tuple:
        for (const Expr& c : e.children) collect_lvalue(c, writes, reads, unknown);
        break;
    default:
        unknown = true; // e.g. assignment through a call result
        break;
    }
}

} // namespace detail

/// Def/use facts of one expression.
struct Effects {
    std::set<std::string> reads;
    std::set<std::string> writes;
    std::vector<std::string> callees;
    bool unknown = false;
};

inline Effects effects_of(const Expr& e) {
    Effects fx;
    detail::collect_reads(e, fx.reads, fx.writes, fx.callees, fx.unknown);
    return fx;
}

// --- statements --------------------------------------------------------------

enum class StatementKind {
    Assignment,
    RequireCall,
    ExpressionCall,
    If,
    Loop,
    Return,
    Emit,
    Declaration,
    Other
};

inline const char* to_string(StatementKind k) {
    switch (k) {
    case StatementKind::Assignment: return "assignment";
    case StatementKind::RequireCall: return "require_call";
    case StatementKind::ExpressionCall: return "expression_call";
    case StatementKind::If: return "if";
    case StatementKind::Loop: return "loop";
    case StatementKind::Return: return "return";
    case StatementKind::Emit: return "emit";
    case StatementKind::Declaration: return "declaration";
    default: return "other";
    }
}

/// Index range into the enclosing flat statement list.
struct StmtRange {
    std::size_t first = 0;
    std::size_t count = 0;
    bool empty() const { return count == 0; }
    std::size_t past_end() const { return first + count; }
};

/// One entry of a function body flattened in execution pre-order. Control
/// statements record the ranges their nested bodies occupy.
struct Statement {
    StatementKind kind = StatementKind::Other;
    std::set<std::string> reads;
    std::set<std::string> writes;
    std::vector<std::string> callees;
    std::size_t index = 0;
    SourceSpan span{};

    StmtRange then_range{}; // if: then-branch; loop: body (including for-post)
    StmtRange else_range{};
    bool has_else = false;
    bool effects_unknown = false; // opaque construct, def/use conservative
    bool placeholder = false;     // modifier body `_`
};

// --- declarations ------------------------------------------------------------

struct Param {
    std::string type_name;
    std::string name;
    SourceSpan span{};
};

struct StateVarDecl {
    std::string name;
    std::string type_name;
    Visibility visibility = Visibility::Internal;
    bool has_initializer = false;
    std::set<std::string> init_reads;
    SourceSpan span{};
};

struct FunctionDecl {
    std::string name; // empty for constructors
    Visibility visibility = Visibility::Public;
    Mutability mutability = Mutability::Nonpayable;
    std::vector<Param> params;
    std::vector<Param> returns;
    std::vector<std::string> applied_modifiers;
    std::vector<Statement> body;
    bool has_body = false;
    bool is_constructor = false;
    SourceSpan span{};
};

struct ModifierDecl {
    std::string name;
    std::vector<Param> params;
    std::vector<Statement> body;
    bool has_body = false;
    SourceSpan span{};
};

struct ContractDecl {
    std::string name;
    ContractKind kind = ContractKind::Contract;
    std::vector<std::string> bases; // declared order
    std::vector<StateVarDecl> state_vars;
    std::vector<FunctionDecl> functions;
    std::vector<ModifierDecl> modifiers;
    std::vector<std::string> events;
    SourceSpan span{};
};

struct CompilationUnit {
    std::vector<std::string> pragmas;
    std::vector<ContractDecl> contracts;
    std::string source_id;
    Warnings warnings;

    const ContractDecl* find_contract(const std::string& name) const {
        for (const ContractDecl& c : contracts)
            if (c.name == name) return &c;
        return nullptr;
    }
};

/// Canonical symbol "name(type,type)"; constructors use the name "constructor".
inline std::string function_symbol(const FunctionDecl& f) {
    std::string sym = f.is_constructor ? "constructor" : f.name;
    sym += '(';
    for (std::size_t i = 0; i < f.params.size(); ++i) {
        if (i) sym += ',';
        for (char c : f.params[i].type_name)
            if (c != ' ') sym += c;
    }
    sym += ')';
    return sym;
}

} // namespace ckg::sol
