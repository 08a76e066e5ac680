#pragma once

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/sparql/ast.hpp"

// Recursive-descent SPARQL-subset parser. Prefixed names expand during the
// parse; ckg/rdf/rdfs/xsd are predeclared. Constructs outside the subset
// raise UnsupportedFeature with the feature name; malformed input raises
// QuerySyntaxError with a character position.

namespace ckg::sparql {

namespace detail {

struct QToken {
    enum class Kind { Ident, IriRef, Pname, Var, Integer, String, Punct, End };
    Kind kind = Kind::End;
    std::string text;   // ident/punct text, var name, literal body, IRI value
    std::string prefix; // Pname only
    std::size_t pos = 0;
};

class QueryLexer {
public:
    explicit QueryLexer(std::string_view src) : src_(src) {}

    std::vector<QToken> run() {
        std::vector<QToken> out;
        while (true) {
            skip_space();
            if (pos_ >= src_.size()) break;
            out.push_back(next());
        }
        out.push_back({QToken::Kind::End, "", "", pos_});
        return out;
    }

private:
    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg, std::size_t at) {
        throw QuerySyntaxError(msg, at);
    }

    QToken next() {
        std::size_t at = pos_;
        char c = src_[pos_];
        if (c == '<') {
            // an IRI only when a well-formed <...> follows; otherwise the
            // comparison operator (handled by the punct branches below)
            std::size_t j = pos_ + 1;
            bool closed = false;
            while (j < src_.size()) {
                char d = src_[j];
                if (d == '>') {
                    closed = true;
                    break;
                }
                if (std::isspace(static_cast<unsigned char>(d)) || d == '"' ||
                    d == '{' || d == '}' || d == '<')
                    break;
                ++j;
            }
            if (closed) {
                std::string value(src_.substr(pos_ + 1, j - pos_ - 1));
                pos_ = j + 1;
                return {QToken::Kind::IriRef, value, "", at};
            }
        }
        if (c == '?' || c == '$') {
            ++pos_;
            std::string name;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_'))
                name += src_[pos_++];
            if (name.empty()) fail("expected variable name after '" + std::string(1, c) + "'", at);
            return {QToken::Kind::Var, name, "", at};
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            ++pos_;
            std::string body;
            while (pos_ < src_.size() && src_[pos_] != quote) {
                char d = src_[pos_++];
                if (d == '\\') {
                    if (pos_ >= src_.size()) fail("unterminated string escape", at);
                    char e = src_[pos_++];
                    switch (e) {
                    case 't': body += '\t'; break;
                    case 'n': body += '\n'; break;
                    case 'r': body += '\r'; break;
                    case '"': body += '"'; break;
                    case '\'': body += '\''; break;
                    case '\\': body += '\\'; break;
                    default: fail("unknown string escape", pos_ - 1);
                    }
                } else {
                    body += d;
                }
            }
            if (pos_ >= src_.size()) fail("unterminated string literal", at);
            ++pos_;
            return {QToken::Kind::String, body, "", at};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            std::string num(1, c);
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                num += src_[pos_++];
            if (pos_ < src_.size() && src_[pos_] == '.')
                throw UnsupportedFeature("non-integer numeric literal");
            return {QToken::Kind::Integer, num, "", at};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_' || src_[pos_] == '-' ||
                                          src_[pos_] == '.'))
                word += src_[pos_++];
            while (!word.empty() && word.back() == '.') { // trailing dot terminates a pattern
                word.pop_back();
                --pos_;
            }
            if (pos_ < src_.size() && src_[pos_] == ':') {
                ++pos_;
                std::string local;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                        src_[pos_] == '_' || src_[pos_] == '-'))
                    local += src_[pos_++];
                return {QToken::Kind::Pname, local, word, at};
            }
            return {QToken::Kind::Ident, word, "", at};
        }
        if (c == ':') { // empty-prefix pname
            ++pos_;
            std::string local;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_' || src_[pos_] == '-'))
                local += src_[pos_++];
            return {QToken::Kind::Pname, local, "", at};
        }
        static const char* kTwoChar[] = {"&&", "||", "!=", "<=", ">=", "^^"};
        if (pos_ + 1 < src_.size()) {
            std::string two = std::string(src_.substr(pos_, 2));
            for (const char* op : kTwoChar) {
                if (two == op) {
                    pos_ += 2;
                    return {QToken::Kind::Punct, two, "", at};
                }
            }
        }
        static const std::string kOneChar = "{}().,;*=<>!/@+-^|[]";
        if (kOneChar.find(c) != std::string::npos) {
            ++pos_;
            return {QToken::Kind::Punct, std::string(1, c), "", at};
        }
        fail(std::string("unexpected character '") + c + "'", at);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

inline std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

inline const std::set<std::string>& unsupported_keywords() {
    static const std::set<std::string> kws = {
        "OPTIONAL", "UNION",    "GRAPH",  "SERVICE", "MINUS",  "BIND",
        "VALUES",   "ORDER",    "GROUP",  "HAVING",  "OFFSET", "ASK",
        "CONSTRUCT", "DESCRIBE", "INSERT", "DELETE",  "BASE",   "REDUCED",
    };
    return kws;
}

} // namespace detail

class QueryParser {
public:
    explicit QueryParser(std::string_view text)
        : tokens_(detail::QueryLexer(text).run()) {
        ast_.prefixes = {{"ckg", rdf::kCkgNs},
                         {"rdf", rdf::kRdfNs},
                         {"rdfs", rdf::kRdfsNs},
                         {"xsd", rdf::kXsdNs}};
    }

    QueryAst run() {
        // reserved keywords are refused wherever they appear, so constructs
        // like UNION surface as unsupported rather than as syntax noise
        for (const QToken& t : tokens_) check_unsupported(t);
        parse_prologue();
        parse_select();
        expect_keyword("WHERE");
        parse_group(ast_.bgp, &ast_.filters, true);
        parse_limit();
        if (peek().kind != detail::QToken::Kind::End)
            fail("unexpected trailing input");
        validate_select_vars();
        return std::move(ast_);
    }

private:
    using QToken = detail::QToken;

    const QToken& peek(std::size_t ahead = 0) const {
        std::size_t i = idx_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    const QToken& advance() { return tokens_[idx_ < tokens_.size() - 1 ? idx_++ : idx_]; }

    bool is_keyword(const QToken& t, const char* kw) const {
        return t.kind == QToken::Kind::Ident && detail::upper(t.text) == kw;
    }
    bool accept_keyword(const char* kw) {
        if (is_keyword(peek(), kw)) {
            ++idx_;
            return true;
        }
        return false;
    }
    void expect_keyword(const char* kw) {
        if (!accept_keyword(kw)) fail(std::string("expected ") + kw);
    }
    bool accept_punct(const char* p) {
        if (peek().kind == QToken::Kind::Punct && peek().text == p) {
            ++idx_;
            return true;
        }
        return false;
    }
    void expect_punct(const char* p) {
        if (!accept_punct(p)) fail(std::string("expected '") + p + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw QuerySyntaxError(msg, peek().pos);
    }

    void check_unsupported(const QToken& t) const {
        if (t.kind != QToken::Kind::Ident) return;
        std::string up = detail::upper(t.text);
        if (detail::unsupported_keywords().count(up)) throw UnsupportedFeature(up);
    }

    void parse_prologue() {
        for (;;) {
            check_unsupported(peek());
            if (!accept_keyword("PREFIX")) return;
            const QToken& name = peek();
            if (name.kind != QToken::Kind::Pname || !name.text.empty())
                fail("expected prefix declaration like ex:");
            std::string prefix = name.prefix;
            ++idx_;
            const QToken& iri = peek();
            if (iri.kind != QToken::Kind::IriRef) fail("expected IRI after prefix");
            ast_.prefixes[prefix] = iri.text;
            ++idx_;
        }
    }

    void parse_select() {
        check_unsupported(peek());
        expect_keyword("SELECT");
        if (accept_keyword("DISTINCT")) ast_.distinct = true;
        if (is_keyword(peek(), "REDUCED")) throw UnsupportedFeature("REDUCED");
        if (accept_punct("*")) {
            ast_.select_star = true;
            return;
        }
        while (peek().kind == QToken::Kind::Var) {
            ast_.select_vars.push_back(Variable{advance().text});
        }
        if (ast_.select_vars.empty()) fail("expected variables or * after SELECT");
    }

    void parse_group(std::vector<TriplePattern>& bgp, std::vector<FilterExpr>* filters,
                     bool allow_filters) {
        expect_punct("{");
        for (;;) {
            if (accept_punct("}")) return;
            if (peek().kind == QToken::Kind::End) fail("unterminated group");
            check_unsupported(peek());
            if (is_keyword(peek(), "FILTER")) {
                if (!allow_filters) fail("FILTER not allowed inside EXISTS group");
                ++idx_;
                filters->push_back(parse_filter());
                continue;
            }
            bgp.push_back(parse_pattern());
            accept_punct(".");
        }
    }

    TriplePattern parse_pattern() {
        TriplePattern p;
        p.subject = parse_term(false);
        p.predicate = parse_term(true);
        if (peek().kind == QToken::Kind::Punct &&
            (peek().text == "/" || peek().text == "|" || peek().text == "^" ||
             peek().text == "+"))
            throw UnsupportedFeature("property paths");
        p.object = parse_term(false);
        if (peek().kind == QToken::Kind::Punct && peek().text == ";")
            throw UnsupportedFeature("predicate-object lists");
        if (peek().kind == QToken::Kind::Punct && peek().text == ",")
            throw UnsupportedFeature("object lists");
        return p;
    }

    PatternTerm parse_term(bool predicate_position) {
        const QToken& t = peek();
        switch (t.kind) {
        case QToken::Kind::Var:
            ++idx_;
            return Variable{t.text};
        case QToken::Kind::IriRef:
            ++idx_;
            return rdf::Iri{t.text};
        case QToken::Kind::Pname: {
            ++idx_;
            return rdf::Iri{expand_prefix(t)};
        }
        case QToken::Kind::Integer:
            ++idx_;
            return rdf::Literal(t.text, rdf::LiteralType::Integer);
        case QToken::Kind::String: {
            ++idx_;
            return finish_literal(t.text);
        }
        case QToken::Kind::Ident: {
            check_unsupported(t);
            if (predicate_position && t.text == "a") {
                ++idx_;
                return rdf::rdf_type();
            }
            std::string up = detail::upper(t.text);
            if (up == "TRUE" || up == "FALSE") {
                ++idx_;
                return rdf::Literal(up == "TRUE" ? "true" : "false",
                                    rdf::LiteralType::Boolean);
            }
            if (t.text == "_") throw UnsupportedFeature("blank nodes");
            fail("expected IRI, literal or variable");
        }
        default:
            if (t.kind == QToken::Kind::Punct && t.text == "[")
                throw UnsupportedFeature("blank nodes");
            fail("expected IRI, literal or variable");
        }
    }

    rdf::Literal finish_literal(const std::string& body) {
        if (accept_punct("@")) throw UnsupportedFeature("language tags");
        if (!accept_punct("^^")) return rdf::Literal::str(body);
        const QToken& t = peek();
        std::string dt;
        if (t.kind == QToken::Kind::IriRef) {
            dt = t.text;
            ++idx_;
        } else if (t.kind == QToken::Kind::Pname) {
            dt = expand_prefix(t);
            ++idx_;
        } else {
            fail("expected datatype IRI after ^^");
        }
        for (rdf::LiteralType lt :
             {rdf::LiteralType::String, rdf::LiteralType::Integer, rdf::LiteralType::Boolean})
            if (dt == rdf::xsd_iri(lt)) return rdf::Literal(body, lt);
        throw UnsupportedFeature("datatype " + dt);
    }

    std::string expand_prefix(const QToken& t) {
        auto it = ast_.prefixes.find(t.prefix);
        if (it == ast_.prefixes.end())
            throw QuerySyntaxError("undeclared prefix '" + t.prefix + "'", t.pos);
        return it->second + t.text;
    }

    FilterExpr parse_filter() {
        if (is_keyword(peek(), "EXISTS") || is_keyword(peek(), "NOT") ||
            is_keyword(peek(), "REGEX") || is_keyword(peek(), "BOUND"))
            return parse_builtin();
        expect_punct("(");
        FilterExpr e = parse_or();
        expect_punct(")");
        return e;
    }

    FilterExpr parse_or() {
        FilterExpr lhs = parse_and();
        while (accept_punct("||")) {
            FilterExpr node;
            node.kind = FilterExpr::Kind::Or;
            node.children.push_back(std::move(lhs));
            node.children.push_back(parse_and());
            lhs = std::move(node);
        }
        return lhs;
    }

    FilterExpr parse_and() {
        FilterExpr lhs = parse_not();
        while (accept_punct("&&")) {
            FilterExpr node;
            node.kind = FilterExpr::Kind::And;
            node.children.push_back(std::move(lhs));
            node.children.push_back(parse_not());
            lhs = std::move(node);
        }
        return lhs;
    }

    FilterExpr parse_not() {
        if (accept_punct("!")) {
            FilterExpr node;
            node.kind = FilterExpr::Kind::Not;
            node.children.push_back(parse_not());
            return node;
        }
        return parse_relational();
    }

    FilterExpr parse_relational() {
        if (peek().kind == QToken::Kind::Punct && peek().text == "(") {
            ++idx_;
            FilterExpr inner = parse_or();
            expect_punct(")");
            return inner;
        }
        if (is_keyword(peek(), "REGEX") || is_keyword(peek(), "BOUND") ||
            is_keyword(peek(), "EXISTS") || is_keyword(peek(), "NOT"))
            return parse_builtin();
        PatternTerm lhs = parse_term(false);
        std::string op = comparison_op();
        if (op.empty()) fail("expected comparison operator in filter");
        PatternTerm rhs = parse_term(false);
        FilterExpr node;
        node.kind = FilterExpr::Kind::Compare;
        node.op = op;
        node.operands.push_back(std::move(lhs));
        node.operands.push_back(std::move(rhs));
        return node;
    }

    std::string comparison_op() {
        const QToken& t = peek();
        if (t.kind != QToken::Kind::Punct) return "";
        for (const char* op : {"=", "!=", "<=", ">=", "<", ">"}) {
            if (t.text == op) {
                ++idx_;
                return op;
            }
        }
        return "";
    }

    FilterExpr parse_builtin() {
        if (accept_keyword("NOT")) {
            expect_keyword("EXISTS");
            return parse_exists(true);
        }
        if (accept_keyword("EXISTS")) return parse_exists(false);
        if (accept_keyword("BOUND")) {
            expect_punct("(");
            const QToken& v = peek();
            if (v.kind != QToken::Kind::Var) fail("BOUND expects a variable");
            ++idx_;
            expect_punct(")");
            FilterExpr node;
            node.kind = FilterExpr::Kind::Bound;
            node.operands.push_back(Variable{v.text});
            return node;
        }
        expect_keyword("REGEX");
        expect_punct("(");
        FilterExpr node;
        node.kind = FilterExpr::Kind::Regex;
        node.operands.push_back(parse_term(false));
        expect_punct(",");
        if (peek().kind != QToken::Kind::String) fail("REGEX pattern must be a string");
        node.regex_pattern = advance().text;
        if (accept_punct(",")) {
            if (peek().kind != QToken::Kind::String) fail("REGEX flags must be a string");
            node.regex_flags = advance().text;
        }
        expect_punct(")");
        return node;
    }

    FilterExpr parse_exists(bool negated) {
        FilterExpr node;
        node.kind = negated ? FilterExpr::Kind::NotExists : FilterExpr::Kind::Exists;
        parse_group(node.exists_bgp, nullptr, false);
        if (node.exists_bgp.empty()) fail("EXISTS group must contain patterns");
        return node;
    }

    void parse_limit() {
        check_unsupported(peek());
        if (!accept_keyword("LIMIT")) return;
        const QToken& t = peek();
        if (t.kind != QToken::Kind::Integer) fail("expected integer after LIMIT");
        long long n = std::stoll(t.text);
        if (n <= 0) fail("LIMIT must be positive");
        ++idx_;
        ast_.limit = static_cast<std::size_t>(n);
    }

    void collect_filter_vars(const FilterExpr& e, std::set<std::string>& out) const {
        for (const PatternTerm& t : e.operands)
            if (is_var(t)) out.insert(as_var(t).name);
        for (const TriplePattern& p : e.exists_bgp)
            for (const PatternTerm* t : {&p.subject, &p.predicate, &p.object})
                if (is_var(*t)) out.insert(as_var(*t).name);
        for (const FilterExpr& c : e.children) collect_filter_vars(c, out);
    }

    void validate_select_vars() const {
        if (ast_.select_star) return;
        std::set<std::string> known;
        for (const Variable& v : ast_.bgp_variables()) known.insert(v.name);
        for (const FilterExpr& f : ast_.filters) collect_filter_vars(f, known);
        for (const Variable& v : ast_.select_vars)
            if (!known.count(v.name))
                throw QuerySyntaxError("selected variable ?" + v.name +
                                           " does not occur in the query body",
                                       0);
    }

    std::vector<QToken> tokens_;
    std::size_t idx_ = 0;
    QueryAst ast_;
};

inline QueryAst parse_query(std::string_view text) { return QueryParser(text).run(); }

} // namespace ckg::sparql
