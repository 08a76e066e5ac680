#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/sol/ast.hpp"
#include "ckg/sol/lexer.hpp"

// Recursive-descent parser for the supported Solidity subset. Constructs the
// pipeline stays total on: assembly, try/catch and similar constructs become
// opaque `other` statements with a warning instead of failing the parse.

namespace ckg::sol {

namespace detail {

/// Nested statement produced by the parser before flattening.
struct StmtNode {
    StatementKind kind = StatementKind::Other;
    std::optional<Expr> expr;
    std::vector<StmtNode> body_a; // then-branch or loop body
    std::vector<StmtNode> body_b; // else-branch
    bool has_else = false;
    bool placeholder = false;
    bool effects_unknown = false;
    std::vector<std::string> decl_names;
    SourceSpan span{};
};

inline bool is_elementary_type(const std::string& t) {
    if (t == "address" || t == "bool" || t == "string" || t == "byte" || t == "var")
        return true;
    auto numeric_suffix = [](std::string_view rest) {
        if (rest.empty()) return true;
        for (char c : rest)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    };
    std::string_view v(t);
    if (v.rfind("uint", 0) == 0) return numeric_suffix(v.substr(4));
    if (v.rfind("int", 0) == 0) return numeric_suffix(v.substr(3));
    if (v.rfind("bytes", 0) == 0) return numeric_suffix(v.substr(5));
    if (v.rfind("ufixed", 0) == 0) return true;
    if (v.rfind("fixed", 0) == 0) return true;
    return false;
}

} // namespace detail

class Parser {
public:
    Parser(std::string_view source, std::string source_id)
        : tokens_(Lexer(source).run()), source_id_(std::move(source_id)) {}

    CompilationUnit run() {
        CompilationUnit unit;
        unit.source_id = source_id_;
        while (!at_end()) {
            const Token& t = peek();
            if (t.is("pragma")) {
                unit.pragmas.push_back(parse_pragma());
            } else if (t.is("import")) {
                warn("import directive ignored", t.span);
                skip_past_semicolon();
            } else if (t.is("abstract")) {
                ++idx_;
                if (!peek().is("contract")) fail("expected 'contract' after 'abstract'");
                unit.contracts.push_back(parse_contract(ContractKind::Contract));
            } else if (t.is("contract")) {
                unit.contracts.push_back(parse_contract(ContractKind::Contract));
            } else if (t.is("interface")) {
                unit.contracts.push_back(parse_contract(ContractKind::Interface));
            } else if (t.is("library")) {
                unit.contracts.push_back(parse_contract(ContractKind::Library));
            } else if (t.is("struct") || t.is("enum")) {
                warn(t.text + " declaration treated as opaque", t.span);
                skip_type_declaration();
            } else if (t.is("function")) {
                warn("free function ignored", t.span);
                skip_free_function();
            } else if (t.is("error") || t.is("type") || t.is("using")) {
                warn(t.text + " declaration ignored", t.span);
                skip_past_semicolon();
            } else {
                fail("expected contract, interface or library declaration");
            }
        }
        for (std::size_t i = 0; i < unit.contracts.size(); ++i)
            for (std::size_t j = i + 1; j < unit.contracts.size(); ++j)
                if (unit.contracts[i].name == unit.contracts[j].name)
                    throw ParseError("duplicate contract name '" + unit.contracts[i].name + "'",
                                     unit.contracts[j].span.line, unit.contracts[j].span.column);
        unit.warnings = std::move(warnings_);
        return unit;
    }

private:
    // --- token plumbing ------------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = idx_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    bool at_end() const { return peek().kind == Token::Kind::End; }

    const Token& advance() { return tokens_[idx_ < tokens_.size() - 1 ? idx_++ : idx_]; }

    bool accept(std::string_view text) {
        if (peek().is(text)) {
            ++idx_;
            return true;
        }
        return false;
    }

    const Token& expect(std::string_view text) {
        if (!peek().is(text)) fail("expected '" + std::string(text) + "'");
        return advance();
    }

    std::string expect_identifier(const char* what) {
        if (peek().kind != Token::Kind::Identifier)
            fail(std::string("expected ") + what);
        return advance().text;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string got = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", got " + got, t.span.line, t.span.column);
    }

    void warn(const std::string& msg, const SourceSpan& span) {
        warnings_.push_back({msg, span});
    }

    SourceSpan span_from(std::size_t start_tok) const {
        SourceSpan s = tokens_[start_tok].span;
        if (idx_ > start_tok) s.end = tokens_[idx_ - 1].span.end;
        return s;
    }

    void skip_past_semicolon() {
        int depth = 0;
        while (!at_end()) {
            const Token& t = advance();
            if (t.is("(") || t.is("{") || t.is("[")) ++depth;
            else if (t.is(")") || t.is("}") || t.is("]")) --depth;
            else if (t.is(";") && depth <= 0) return;
        }
    }

    void skip_balanced(std::string_view open, std::string_view close) {
        expect(open);
        int depth = 1;
        while (!at_end() && depth > 0) {
            const Token& t = advance();
            if (t.is(open)) ++depth;
            else if (t.is(close)) --depth;
        }
        if (depth > 0) fail("unterminated '" + std::string(open) + "'");
    }

    void skip_type_declaration() { // struct / enum
        ++idx_;
        expect_identifier("type name");
        skip_balanced("{", "}");
    }

    void skip_free_function() {
        ++idx_;
        if (peek().is_ident()) ++idx_;
        skip_balanced("(", ")");
        while (!at_end() && !peek().is("{") && !peek().is(";")) {
            if (peek().is("(")) skip_balanced("(", ")");
            else ++idx_;
        }
        if (peek().is("{")) skip_balanced("{", "}");
        else expect(";");
    }

    // --- top level -----------------------------------------------------------

    std::string parse_pragma() {
        expect("pragma");
        std::string text = "pragma";
        while (!at_end() && !peek().is(";")) {
            text += " " + advance().text;
        }
        expect(";");
        if (text.find("solidity") != std::string::npos &&
            text.find("0.4") != std::string::npos)
            legacy_ = true;
        return text;
    }

    ContractDecl parse_contract(ContractKind kind) {
        std::size_t start = idx_;
        ++idx_; // keyword
        ContractDecl c;
        c.kind = kind;
        c.name = expect_identifier("contract name");
        if (accept("is")) {
            do {
                std::string base = expect_identifier("base name");
                while (accept(".")) base = expect_identifier("base name"); // take leaf
                if (peek().is("(")) skip_balanced("(", ")"); // base constructor args
                c.bases.push_back(base);
            } while (accept(","));
        }
        expect("{");
        while (!peek().is("}")) {
            if (at_end()) fail("unterminated contract body");
            parse_member(c);
        }
        expect("}");
        c.span = span_from(start);
        return c;
    }

    void parse_member(ContractDecl& c) {
        const Token& t = peek();
        if (t.is("function") || t.is("receive") || t.is("fallback")) {
            c.functions.push_back(parse_function(c));
        } else if (t.is("constructor")) {
            c.functions.push_back(parse_constructor());
        } else if (t.is("modifier")) {
            c.modifiers.push_back(parse_modifier());
        } else if (t.is("event")) {
            ++idx_;
            c.events.push_back(expect_identifier("event name"));
            skip_balanced("(", ")");
            accept("anonymous");
            expect(";");
        } else if (t.is("struct") || t.is("enum")) {
            warn(t.text + " declaration treated as opaque", t.span);
            skip_type_declaration();
        } else if (t.is("using")) {
            warn("using-for directive ignored", t.span);
            skip_past_semicolon();
        } else if (t.is("error") || t.is("type")) {
            warn(t.text + " declaration ignored", t.span);
            skip_past_semicolon();
        } else {
            c.state_vars.push_back(parse_state_var());
        }
    }

    StateVarDecl parse_state_var() {
        std::size_t start = idx_;
        StateVarDecl v;
        v.type_name = parse_type_name();
        for (;;) {
            if (accept("public")) v.visibility = Visibility::Public;
            else if (accept("private")) v.visibility = Visibility::Private;
            else if (accept("internal")) v.visibility = Visibility::Internal;
            else if (accept("constant") || accept("immutable") || accept("override")) continue;
            else break;
        }
        v.name = expect_identifier("state variable name");
        if (accept("=")) {
            Expr init = parse_expression();
            Effects fx = effects_of(init);
            v.has_initializer = true;
            v.init_reads = std::move(fx.reads);
        }
        expect(";");
        v.span = span_from(start);
        return v;
    }

    FunctionDecl parse_function(const ContractDecl& enclosing) {
        std::size_t start = idx_;
        FunctionDecl f;
        if (peek().is("receive") || peek().is("fallback")) {
            f.name = advance().text;
        } else {
            expect("function");
            f.name = expect_identifier("function name");
        }
        f.params = parse_params();
        bool explicit_visibility = parse_function_attrs(f);
        if (f.name == enclosing.name && legacy_) {
            f.is_constructor = true; // pre-0.5 constructor style
            f.name.clear();
        }
        if (!explicit_visibility && !f.is_constructor) {
            f.visibility = Visibility::Public;
            if (!legacy_)
                warn("missing visibility specifier; defaulting to public",
                     tokens_[start].span);
        }
        parse_function_body(f);
        f.span = span_from(start);
        return f;
    }

    FunctionDecl parse_constructor() {
        std::size_t start = idx_;
        expect("constructor");
        FunctionDecl f;
        f.is_constructor = true;
        f.params = parse_params();
        parse_function_attrs(f);
        parse_function_body(f);
        f.span = span_from(start);
        return f;
    }

    void parse_function_body(FunctionDecl& f) {
        if (peek().is("{")) {
            f.has_body = true;
            std::vector<detail::StmtNode> nodes = parse_block();
            flatten(nodes, f.body);
        } else {
            expect(";");
        }
    }

    /// Returns true when a visibility keyword was written explicitly.
    bool parse_function_attrs(FunctionDecl& f) {
        bool explicit_visibility = false;
        for (;;) {
            const Token& t = peek();
            if (t.is("public")) { f.visibility = Visibility::Public; explicit_visibility = true; ++idx_; }
            else if (t.is("external")) { f.visibility = Visibility::External; explicit_visibility = true; ++idx_; }
            else if (t.is("internal")) { f.visibility = Visibility::Internal; explicit_visibility = true; ++idx_; }
            else if (t.is("private")) { f.visibility = Visibility::Private; explicit_visibility = true; ++idx_; }
            else if (t.is("pure")) { f.mutability = Mutability::Pure; ++idx_; }
            else if (t.is("view") || t.is("constant")) { f.mutability = Mutability::View; ++idx_; }
            else if (t.is("payable")) { f.mutability = Mutability::Payable; ++idx_; }
            else if (t.is("virtual")) { ++idx_; }
            else if (t.is("override")) {
                ++idx_;
                if (peek().is("(")) skip_balanced("(", ")");
            } else if (t.is("returns")) {
                ++idx_;
                f.returns = parse_params();
            } else if (t.is_ident() && !t.is("{")) {
                // modifier (or base constructor) invocation
                f.applied_modifiers.push_back(advance().text);
                if (peek().is("(")) {
                    expect("(");
                    if (!peek().is(")")) {
                        do {
                            parse_expression(); // argument effects are not tracked
                        } while (accept(","));
                    }
                    expect(")");
                }
            } else {
                break;
            }
        }
        return explicit_visibility;
    }

    ModifierDecl parse_modifier() {
        std::size_t start = idx_;
        expect("modifier");
        ModifierDecl m;
        m.name = expect_identifier("modifier name");
        if (peek().is("(")) m.params = parse_params();
        while (accept("virtual") || accept("override")) {
            if (peek().is("(")) skip_balanced("(", ")");
        }
        if (peek().is("{")) {
            m.has_body = true;
            std::vector<detail::StmtNode> nodes = parse_block();
            flatten(nodes, m.body);
        } else {
            expect(";");
        }
        m.span = span_from(start);
        return m;
    }

    std::vector<Param> parse_params() {
        expect("(");
        std::vector<Param> params;
        if (!peek().is(")")) {
            do {
                std::size_t start = idx_;
                Param p;
                p.type_name = parse_type_name();
                accept("indexed");
                if (accept("storage") || accept("memory") || accept("calldata")) {}
                if (peek().is_ident()) p.name = advance().text;
                p.span = span_from(start);
                params.push_back(std::move(p));
            } while (accept(","));
        }
        expect(")");
        return params;
    }

    std::string parse_type_name() {
        std::string text;
        const Token& t = peek();
        if (t.is("mapping")) {
            ++idx_;
            expect("(");
            std::string key = parse_type_name();
            expect("=>");
            std::string val = parse_type_name();
            expect(")");
            text = "mapping(" + key + " => " + val + ")";
        } else if (t.is("function")) {
            // function type: function(...) [attrs] [returns(...)]
            ++idx_;
            text = "function";
            skip_balanced("(", ")");
            while (peek().is("internal") || peek().is("external") || peek().is("pure") ||
                   peek().is("view") || peek().is("payable"))
                ++idx_;
            if (accept("returns")) skip_balanced("(", ")");
        } else if (t.is_ident()) {
            text = advance().text;
            if (text == "address" && accept("payable")) text += " payable";
            while (peek().is(".") && peek(1).is_ident()) {
                ++idx_;
                text += "." + advance().text;
            }
        } else {
            fail("expected type name");
        }
        while (peek().is("[")) {
            expect("[");
            text += "[";
            if (!peek().is("]")) {
                Expr size = parse_expression();
                // Literal sizes stay verbatim; computed sizes collapse to "n"
                // so distinct spellings of one type cannot fork symbols.
                if (size.kind == Expr::Kind::Literal)
                    text += size.text;
                else
                    text += "n";
            }
            expect("]");
            text += "]";
        }
        return text;
    }

    // --- statements ----------------------------------------------------------

    std::vector<detail::StmtNode> parse_block() {
        expect("{");
        std::vector<detail::StmtNode> out;
        while (!peek().is("}")) {
            if (at_end()) fail("unterminated block");
            parse_statement_into(out);
        }
        expect("}");
        return out;
    }

    std::vector<detail::StmtNode> parse_branch() {
        if (peek().is("{")) return parse_block();
        std::vector<detail::StmtNode> out;
        parse_statement_into(out);
        return out;
    }

    void parse_statement_into(std::vector<detail::StmtNode>& out) {
        const Token& t = peek();
        std::size_t start = idx_;
        detail::StmtNode node;

        if (t.is("{")) {
            std::vector<detail::StmtNode> inner = parse_block();
            for (auto& n : inner) out.push_back(std::move(n));
            return;
        }
        if (t.is("unchecked")) {
            ++idx_;
            std::vector<detail::StmtNode> inner = parse_block();
            for (auto& n : inner) out.push_back(std::move(n));
            return;
        }
        if (t.is("if")) {
            ++idx_;
            expect("(");
            node.kind = StatementKind::If;
            node.expr = parse_expression();
            expect(")");
            node.span = span_from(start);
            node.body_a = parse_branch();
            if (accept("else")) {
                node.has_else = true;
                node.body_b = parse_branch();
            }
            out.push_back(std::move(node));
            return;
        }
        if (t.is("while")) {
            ++idx_;
            expect("(");
            node.kind = StatementKind::Loop;
            node.expr = parse_expression();
            expect(")");
            node.span = span_from(start);
            node.body_a = parse_branch();
            out.push_back(std::move(node));
            return;
        }
        if (t.is("for")) {
            parse_for_into(out);
            return;
        }
        if (t.is("do")) {
            ++idx_;
            warn("do-while lowered as a condition-first loop", t.span);
            std::vector<detail::StmtNode> body = parse_branch();
            expect("while");
            expect("(");
            node.kind = StatementKind::Loop;
            node.expr = parse_expression();
            expect(")");
            expect(";");
            node.span = span_from(start);
            node.body_a = std::move(body);
            out.push_back(std::move(node));
            return;
        }
        if (t.is("return")) {
            ++idx_;
            node.kind = StatementKind::Return;
            if (!peek().is(";")) node.expr = parse_expression();
            expect(";");
            node.span = span_from(start);
            out.push_back(std::move(node));
            return;
        }
        if (t.is("emit")) {
            ++idx_;
            node.kind = StatementKind::Emit;
            node.expr = parse_expression();
            expect(";");
            node.span = span_from(start);
            out.push_back(std::move(node));
            return;
        }
        if (t.is("_") && peek(1).is(";")) {
            idx_ += 2;
            node.kind = StatementKind::Other;
            node.placeholder = true;
            node.span = span_from(start);
            out.push_back(std::move(node));
            return;
        }
        if (t.is("assembly")) {
            ++idx_;
            warn("assembly block treated as opaque", t.span);
            if (peek().kind == Token::Kind::String) ++idx_;
            if (peek().is("(")) skip_balanced("(", ")");
            skip_balanced("{", "}");
            node.kind = StatementKind::Other;
            node.effects_unknown = true;
            node.span = span_from(start);
            out.push_back(std::move(node));
            return;
        }
        if (t.is("try")) {
            ++idx_;
            warn("try/catch treated as opaque", t.span);
            parse_expression();
            if (accept("returns")) skip_balanced("(", ")");
            skip_balanced("{", "}");
            while (accept("catch")) {
                if (peek().is_ident() && !peek().is("{")) ++idx_;
                if (peek().is("(")) skip_balanced("(", ")");
                skip_balanced("{", "}");
            }
            node.kind = StatementKind::Other;
            node.effects_unknown = true;
            node.span = span_from(start);
            out.push_back(std::move(node));
            return;
        }
        if (t.is("break") || t.is("continue")) {
            warn(t.text + " treated as straight-line", t.span);
            ++idx_;
            expect(";");
            node.kind = StatementKind::Other;
            node.span = span_from(start);
            out.push_back(std::move(node));
            return;
        }
        if (t.is("revert") && peek(1).is_ident()) {
            ++idx_; // revert CustomError(args);
            Expr call = parse_expression();
            // The error name is a type, not a callable; keep the builtin as
            // the callee so all revert forms share one call-graph target.
            Expr wrapped;
            wrapped.kind = Expr::Kind::Call;
            wrapped.span = t.span;
            Expr callee;
            callee.kind = Expr::Kind::Identifier;
            callee.text = "revert";
            callee.span = t.span;
            wrapped.children.push_back(std::move(callee));
            if (call.kind == Expr::Kind::Call)
                for (std::size_t i = 1; i < call.children.size(); ++i)
                    wrapped.children.push_back(std::move(call.children[i]));
            expect(";");
            node.kind = StatementKind::ExpressionCall;
            node.expr = std::move(wrapped);
            node.span = span_from(start);
            out.push_back(std::move(node));
            return;
        }

        // declaration or expression statement
        if (starts_declaration()) {
            out.push_back(parse_declaration());
            return;
        }
        node.expr = parse_expression();
        expect(";");
        node.span = span_from(start);
        node.kind = classify_expression(*node.expr);
        out.push_back(std::move(node));
    }

    void parse_for_into(std::vector<detail::StmtNode>& out) {
        std::size_t start = idx_;
        expect("for");
        expect("(");
        if (!accept(";")) {
            std::size_t init_start = idx_;
            detail::StmtNode init;
            if (starts_declaration()) {
                init = parse_declaration_no_semi();
            } else {
                init.expr = parse_expression();
                init.kind = classify_expression(*init.expr);
            }
            init.span = span_from(init_start);
            expect(";");
            out.push_back(std::move(init));
        }
        detail::StmtNode loop;
        loop.kind = StatementKind::Loop;
        if (!peek().is(";")) loop.expr = parse_expression();
        expect(";");
        std::optional<detail::StmtNode> post;
        if (!peek().is(")")) {
            std::size_t post_start = idx_;
            detail::StmtNode p;
            p.expr = parse_expression();
            p.kind = classify_expression(*p.expr);
            p.span = span_from(post_start);
            post = std::move(p);
        }
        expect(")");
        loop.span = span_from(start);
        loop.body_a = parse_branch();
        if (post) loop.body_a.push_back(std::move(*post));
        out.push_back(std::move(loop));
    }

    bool starts_declaration() {
        const Token& t = peek();
        if (t.is("mapping") || t.is("function")) return true;
        if (t.kind == Token::Kind::Identifier && detail::is_elementary_type(t.text))
            return !peek(1).is("(") || t.is("var"); // `address(x)` is a cast
        if (t.is("(")) {
            // tuple declaration iff some element looks like `type name`
            std::size_t i = idx_ + 1;
            int depth = 1;
            bool prev_ident = false;
            while (i < tokens_.size() && depth > 0) {
                const Token& u = tokens_[i];
                if (u.is("(")) { ++depth; prev_ident = false; }
                else if (u.is(")")) { --depth; prev_ident = false; }
                else if (u.kind == Token::Kind::Identifier &&
                         !u.is("memory") && !u.is("storage") && !u.is("calldata")) {
                    if (prev_ident && depth == 1) return true;
                    if (detail::is_elementary_type(u.text) && depth == 1) return true;
                    prev_ident = true;
                } else {
                    prev_ident = false;
                }
                ++i;
            }
            return false;
        }
        if (t.kind != Token::Kind::Identifier) return false;
        // `Ident Ident` / `Ident.Path Ident` / `Ident[] Ident` signals a declaration
        std::size_t i = idx_ + 1;
        while (i + 1 < tokens_.size() && tokens_[i].is(".") && tokens_[i + 1].is_ident())
            i += 2;
        while (i < tokens_.size() && tokens_[i].is("[")) {
            int depth = 1;
            ++i;
            while (i < tokens_.size() && depth > 0) {
                if (tokens_[i].is("[")) ++depth;
                if (tokens_[i].is("]")) --depth;
                ++i;
            }
        }
        if (i < tokens_.size() &&
            (tokens_[i].is("storage") || tokens_[i].is("memory") || tokens_[i].is("calldata")))
            ++i;
        return i < tokens_.size() && tokens_[i].kind == Token::Kind::Identifier;
    }

    detail::StmtNode parse_declaration() {
        detail::StmtNode node = parse_declaration_no_semi();
        expect(";");
        node.span.end = tokens_[idx_ - 1].span.end;
        return node;
    }

    detail::StmtNode parse_declaration_no_semi() {
        std::size_t start = idx_;
        detail::StmtNode node;
        node.kind = StatementKind::Declaration;
        if (peek().is("(")) { // tuple declaration
            expect("(");
            do {
                if (peek().is(",") || peek().is(")")) continue; // skipped slot
                parse_type_name();
                if (accept("storage") || accept("memory") || accept("calldata")) {}
                node.decl_names.push_back(expect_identifier("variable name"));
            } while (accept(","));
            expect(")");
        } else {
            parse_type_name();
            if (accept("storage") || accept("memory") || accept("calldata")) {}
            node.decl_names.push_back(expect_identifier("variable name"));
        }
        if (accept("=")) node.expr = parse_expression();
        node.span = span_from(start);
        return node;
    }

    StatementKind classify_expression(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Assign:
            return StatementKind::Assignment;
        case Expr::Kind::Unary:
            if (e.text == "++" || e.text == "--" || e.text == "delete")
                return StatementKind::Assignment;
            return StatementKind::Other;
        case Expr::Kind::Postfix:
            return StatementKind::Assignment;
        case Expr::Kind::Call: {
            const Expr& callee = e.children[0];
            if (callee.kind == Expr::Kind::Identifier &&
                (callee.text == "require" || callee.text == "assert"))
                return StatementKind::RequireCall;
            return StatementKind::ExpressionCall;
        }
        default:
            return StatementKind::Other;
        }
    }

    // --- expressions ---------------------------------------------------------

    Expr parse_expression() { return parse_assignment(); }

    Expr parse_assignment() {
        Expr lhs = parse_conditional();
        const Token& t = peek();
        static const char* kAssignOps[] = {"=",  "+=", "-=", "*=",  "/=",  "%=",
                                           "|=", "&=", "^=", "<<=", ">>=", "**="};
        for (const char* op : kAssignOps) {
            if (t.is(op)) {
                SourceSpan sp = t.span;
                ++idx_;
                Expr rhs = parse_assignment();
                Expr node;
                node.kind = Expr::Kind::Assign;
                node.text = op;
                node.span = sp;
                node.children.push_back(std::move(lhs));
                node.children.push_back(std::move(rhs));
                return node;
            }
        }
        return lhs;
    }

    Expr parse_conditional() {
        Expr cond = parse_binary(0);
        if (!peek().is("?")) return cond;
        SourceSpan sp = peek().span;
        ++idx_;
        Expr then_e = parse_expression();
        expect(":");
        Expr else_e = parse_conditional();
        Expr node;
        node.kind = Expr::Kind::Conditional;
        node.span = sp;
        node.children.push_back(std::move(cond));
        node.children.push_back(std::move(then_e));
        node.children.push_back(std::move(else_e));
        return node;
    }

    // binary operator tiers, loosest first
    static const std::vector<std::vector<std::string_view>>& binary_tiers() {
        static const std::vector<std::vector<std::string_view>> tiers = {
            {"||"},
            {"&&"},
            {"==", "!="},
            {"<", ">", "<=", ">="},
            {"|"},
            {"^"},
            {"&"},
            {"<<", ">>"},
            {"+", "-"},
            {"*", "/", "%"},
            {"**"},
        };
        return tiers;
    }

    Expr parse_binary(std::size_t tier) {
        const auto& tiers = binary_tiers();
        if (tier >= tiers.size()) return parse_unary();
        Expr lhs = parse_binary(tier + 1);
        for (;;) {
            bool matched = false;
            for (std::string_view op : tiers[tier]) {
                if (peek().is(op)) {
                    SourceSpan sp = peek().span;
                    ++idx_;
                    Expr rhs = parse_binary(tier + 1);
                    Expr node;
                    node.kind = Expr::Kind::Binary;
                    node.text = std::string(op);
                    node.span = sp;
                    node.children.push_back(std::move(lhs));
                    node.children.push_back(std::move(rhs));
                    lhs = std::move(node);
                    matched = true;
                    break;
                }
            }
            if (!matched) return lhs;
        }
    }

    Expr parse_unary() {
        const Token& t = peek();
        if (t.is("!") || t.is("~") || t.is("-") || t.is("+") || t.is("++") || t.is("--") ||
            t.is("delete")) {
            Expr node;
            node.kind = Expr::Kind::Unary;
            node.text = t.text;
            node.span = t.span;
            ++idx_;
            node.children.push_back(parse_unary());
            return node;
        }
        return parse_postfix();
    }

    Expr parse_postfix() {
        Expr e = parse_primary();
        for (;;) {
            const Token& t = peek();
            if (t.is(".")) {
                ++idx_;
                Expr node;
                node.kind = Expr::Kind::Member;
                node.text = expect_identifier("member name");
                node.span = t.span;
                node.children.push_back(std::move(e));
                e = std::move(node);
            } else if (t.is("[")) {
                ++idx_;
                Expr node;
                node.kind = Expr::Kind::Index;
                node.span = t.span;
                node.children.push_back(std::move(e));
                if (!peek().is("]")) node.children.push_back(parse_expression());
                expect("]");
                e = std::move(node);
            } else if (t.is("(")) {
                ++idx_;
                Expr node;
                node.kind = Expr::Kind::Call;
                node.span = t.span;
                node.children.push_back(std::move(e));
                if (!peek().is(")")) {
                    if (peek().is("{")) {
                        parse_named_args(node);
                    } else {
                        do {
                            node.children.push_back(parse_expression());
                        } while (accept(","));
                    }
                }
                expect(")");
                e = std::move(node);
            } else if (t.is("{")) {
                // call options: f{value: x}(...)
                ++idx_;
                Expr node;
                node.kind = Expr::Kind::Call;
                node.span = t.span;
                node.children.push_back(std::move(e));
                while (!peek().is("}")) {
                    expect_identifier("call option name");
                    expect(":");
                    node.children.push_back(parse_expression());
                    if (!accept(",")) break;
                }
                expect("}");
                if (peek().is("(")) {
                    ++idx_;
                    if (!peek().is(")")) {
                        do {
                            node.children.push_back(parse_expression());
                        } while (accept(","));
                    }
                    expect(")");
                }
                e = std::move(node);
            } else if (t.is("++") || t.is("--")) {
                ++idx_;
                Expr node;
                node.kind = Expr::Kind::Postfix;
                node.text = t.text;
                node.span = t.span;
                node.children.push_back(std::move(e));
                e = std::move(node);
            } else {
                return e;
            }
        }
    }

    void parse_named_args(Expr& call) {
        expect("{");
        while (!peek().is("}")) {
            expect_identifier("argument name");
            expect(":");
            call.children.push_back(parse_expression());
            if (!accept(",")) break;
        }
        expect("}");
    }

    Expr parse_primary() {
        const Token& t = peek();
        Expr node;
        node.span = t.span;
        if (t.kind == Token::Kind::Number || t.kind == Token::Kind::String) {
            node.kind = Expr::Kind::Literal;
            node.text = t.text;
            ++idx_;
            return node;
        }
        if (t.is("true") || t.is("false")) {
            node.kind = Expr::Kind::Literal;
            node.text = t.text;
            ++idx_;
            return node;
        }
        if (t.is("new")) {
            ++idx_;
            node.kind = Expr::Kind::New;
            node.text = parse_type_name();
            return node;
        }
        if (t.is("(") ) {
            ++idx_;
            std::vector<Expr> elems;
            if (!peek().is(")")) {
                do {
                    if (peek().is(",") || peek().is(")")) {
                        elems.push_back(Expr{}); // empty tuple slot
                        continue;
                    }
                    elems.push_back(parse_expression());
                } while (accept(","));
            }
            expect(")");
            if (elems.size() == 1) return std::move(elems[0]);
            node.kind = Expr::Kind::Tuple;
            node.children = std::move(elems);
            return node;
        }
        if (t.is("[")) {
            ++idx_;
            node.kind = Expr::Kind::Tuple;
            node.text = "[]";
            if (!peek().is("]")) {
                do {
                    node.children.push_back(parse_expression());
                } while (accept(","));
            }
            expect("]");
            return node;
        }
        if (t.kind == Token::Kind::Identifier) {
            if (detail::is_elementary_type(t.text) || t.is("payable")) {
                node.kind = Expr::Kind::TypeExpr;
                node.text = t.text;
                ++idx_;
                return node;
            }
            node.kind = Expr::Kind::Identifier;
            node.text = t.text;
            ++idx_;
            return node;
        }
        fail("expected expression");
    }

    // --- flattening ----------------------------------------------------------

    void flatten(const std::vector<detail::StmtNode>& nodes, std::vector<Statement>& out) {
        for (const detail::StmtNode& n : nodes) {
            std::size_t at = out.size();
            out.push_back(make_statement(n));
            if (n.kind == StatementKind::If) {
                out[at].then_range = flatten_range(n.body_a, out);
                if (n.has_else) {
                    out[at].has_else = true;
                    out[at].else_range = flatten_range(n.body_b, out);
                }
            } else if (n.kind == StatementKind::Loop) {
                out[at].then_range = flatten_range(n.body_a, out);
            }
        }
        for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
    }

    StmtRange flatten_range(const std::vector<detail::StmtNode>& nodes,
                            std::vector<Statement>& out) {
        StmtRange r;
        r.first = out.size();
        flatten(nodes, out);
        r.count = out.size() - r.first;
        return r;
    }

    Statement make_statement(const detail::StmtNode& n) {
        Statement s;
        s.kind = n.kind;
        s.span = n.span;
        s.placeholder = n.placeholder;
        s.effects_unknown = n.effects_unknown;
        if (n.expr) {
            Effects fx = effects_of(*n.expr);
            s.reads = std::move(fx.reads);
            s.writes = std::move(fx.writes);
            s.callees = std::move(fx.callees);
            if (fx.unknown) s.effects_unknown = true;
        }
        for (const std::string& d : n.decl_names) s.writes.insert(d);
        return s;
    }

    std::vector<Token> tokens_;
    std::size_t idx_ = 0;
    std::string source_id_;
    Warnings warnings_;
    bool legacy_ = false;
};

/// Parses Solidity source text into a compilation unit.
inline CompilationUnit parse_source(std::string_view text, std::string source_id) {
    return Parser(text, std::move(source_id)).run();
}

} // namespace ckg::sol
