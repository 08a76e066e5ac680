#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/rdf/model.hpp"
#include "ckg/rdf/ntriples.hpp"
#include "ckg/sparql/ast.hpp"

// Query evaluation: nested-loop BGP join with a deterministic selectivity
// ordering, three-valued filter logic (true, false, error), lexicographic row
// ordering. A filter error that survives the connectives aborts the query
// with EvaluationError rather than silently dropping rows.

namespace ckg::sparql {

using Binding = std::map<std::string, rdf::Term>;

struct ResultSet {
    std::vector<std::string> columns;
    std::vector<std::vector<rdf::Term>> rows; // cells aligned with columns
    bool truncated = false;

    auto operator<=>(const ResultSet&) const = default;
};

/// Rejects regex constructs outside the documented dialect: literals, dot,
/// character classes, anchors, * + ?, alternation, grouping, common escapes.
inline std::optional<std::string> regex_dialect_error(const std::string& p) {
    int depth = 0;
    bool in_class = false;
    bool prev_quantifiable = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        char c = p[i];
        if (in_class) {
            if (c == '\\') {
                if (i + 1 >= p.size()) return "trailing backslash";
                ++i;
            } else if (c == ']') {
                in_class = false;
            }
            continue;
        }
        switch (c) {
        case '\\': {
            if (i + 1 >= p.size()) return "trailing backslash";
            char e = p[++i];
            static const std::string ok = "dDwWsSbB.\\^$*+?()[]|/-tnr";
            if (ok.find(e) == std::string::npos)
                return std::string("unsupported escape \\") + e;
            prev_quantifiable = true;
            break;
        }
        case '[':
            in_class = true;
            prev_quantifiable = true;
            break;
        case ']':
            return "unmatched ]";
        case '(':
            if (i + 1 < p.size() && p[i + 1] == '?') return "group modifiers unsupported";
            ++depth;
            prev_quantifiable = false;
            break;
        case ')':
            if (depth == 0) return "unmatched )";
            --depth;
            prev_quantifiable = true;
            break;
        case '{':
        case '}':
            return "counted repetition unsupported";
        case '*':
        case '+':
        case '?':
            if (!prev_quantifiable) return "quantifier without operand";
            prev_quantifiable = false;
            break;
        case '|':
        case '^':
        case '$':
            prev_quantifiable = false;
            break;
        default:
            prev_quantifiable = true;
            break;
        }
    }
    if (in_class) return "unterminated character class";
    if (depth != 0) return "unmatched (";
    return std::nullopt;
}

namespace detail {

enum class Tv { True, False, Error };

class Evaluator {
public:
    Evaluator(const QueryAst& q, const rdf::Graph& g) : q_(q), g_(g), index_(g) {}

    ResultSet run() {
        ResultSet out;
        std::vector<Variable> bgp_vars = q_.bgp_variables();
        if (q_.select_star) {
            for (const Variable& v : bgp_vars) out.columns.push_back(v.name);
        } else {
            std::set<std::string> bound_names;
            for (const Variable& v : bgp_vars) bound_names.insert(v.name);
            for (const Variable& v : q_.select_vars) {
                if (!bound_names.count(v.name))
                    throw EvaluationError("selected variable ?" + v.name +
                                          " is not bound by any pattern");
                out.columns.push_back(v.name);
            }
        }

        std::vector<Binding> solutions;
        join(order_patterns(q_.bgp), 0, Binding{}, solutions);

        std::vector<std::vector<rdf::Term>> rows;
        for (const Binding& b : solutions) {
            if (!passes_filters(b)) continue;
            std::vector<rdf::Term> row;
            for (const std::string& col : out.columns) row.push_back(b.at(col));
            rows.push_back(std::move(row));
        }

        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return row_key(a) < row_key(b);
        });
        if (q_.distinct)
            rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        if (q_.limit && rows.size() > *q_.limit) {
            rows.resize(*q_.limit);
            out.truncated = true;
        }
        out.rows = std::move(rows);
        return out;
    }

private:
    static std::vector<std::string> row_key(const std::vector<rdf::Term>& row) {
        std::vector<std::string> key;
        key.reserve(row.size());
        for (const rdf::Term& t : row) key.push_back(rdf::serialize_term(t));
        return key;
    }

    // --- join ----------------------------------------------------------------

    /// Greedy selectivity order: fewest variables unbound so far, then fewest
    /// triples matching the constant positions, then textual order.
    std::vector<TriplePattern> order_patterns(const std::vector<TriplePattern>& bgp) const {
        std::vector<std::size_t> remaining(bgp.size());
        for (std::size_t i = 0; i < bgp.size(); ++i) remaining[i] = i;
        std::set<std::string> bound;
        std::vector<TriplePattern> out;
        while (!remaining.empty()) {
            std::size_t best_pos = 0;
            auto score = [&](std::size_t idx) {
                const TriplePattern& p = bgp[idx];
                std::size_t unbound = 0;
                std::set<std::string> seen;
                for (const PatternTerm* t : {&p.subject, &p.predicate, &p.object})
                    if (is_var(*t) && !bound.count(as_var(*t).name) &&
                        seen.insert(as_var(*t).name).second)
                        ++unbound;
                return std::tuple(unbound, static_count(p), idx);
            };
            for (std::size_t i = 1; i < remaining.size(); ++i)
                if (score(remaining[i]) < score(remaining[best_pos])) best_pos = i;
            const TriplePattern& picked = bgp[remaining[best_pos]];
            for (const PatternTerm* t : {&picked.subject, &picked.predicate, &picked.object})
                if (is_var(*t)) bound.insert(as_var(*t).name);
            out.push_back(picked);
            remaining.erase(remaining.begin() + best_pos);
        }
        return out;
    }

    std::size_t static_count(const TriplePattern& p) const {
        std::size_t n = 0;
        for (const rdf::Triple& t : g_.triples())
            if (constant_match(p.subject, rdf::Term{t.subject}) &&
                constant_match(p.predicate, rdf::Term{t.predicate}) &&
                constant_match(p.object, t.object))
                ++n;
        return n;
    }

    static bool constant_match(const PatternTerm& pt, const rdf::Term& actual) {
        if (is_var(pt)) return true;
        return term_of(pt) == actual;
    }

    static rdf::Term term_of(const PatternTerm& pt) {
        if (is_iri(pt)) return as_iri(pt);
        return as_literal(pt);
    }

    void join(const std::vector<TriplePattern>& patterns, std::size_t at, Binding binding,
              std::vector<Binding>& out) const {
        if (at == patterns.size()) {
            out.push_back(std::move(binding));
            return;
        }
        const TriplePattern& p = patterns[at];
        for (const rdf::Triple* t : candidates(p, binding)) {
            Binding next = binding;
            if (!unify(p.subject, rdf::Term{t->subject}, next)) continue;
            if (!unify(p.predicate, rdf::Term{t->predicate}, next)) continue;
            if (!unify(p.object, t->object, next)) continue;
            join(patterns, at + 1, std::move(next), out);
        }
    }

    std::vector<const rdf::Triple*> candidates(const TriplePattern& p,
                                               const Binding& binding) const {
        auto resolved = [&](const PatternTerm& pt) -> std::optional<rdf::Term> {
            if (!is_var(pt)) return term_of(pt);
            auto it = binding.find(as_var(pt).name);
            if (it != binding.end()) return it->second;
            return std::nullopt;
        };
        std::optional<rdf::Term> s = resolved(p.subject);
        if (s && rdf::is_iri(*s)) return index_.with_subject(rdf::as_iri(*s));
        std::optional<rdf::Term> pr = resolved(p.predicate);
        if (pr && rdf::is_iri(*pr)) return index_.with_predicate(rdf::as_iri(*pr));
        std::vector<const rdf::Triple*> all;
        for (const rdf::Triple& t : g_.triples()) all.push_back(&t);
        return all;
    }

    static bool unify(const PatternTerm& pt, const rdf::Term& actual, Binding& b) {
        if (!is_var(pt)) return term_of(pt) == actual;
        auto [it, inserted] = b.try_emplace(as_var(pt).name, actual);
        return inserted || it->second == actual;
    }

    // --- filters -------------------------------------------------------------

    bool passes_filters(const Binding& b) const {
        for (const FilterExpr& f : q_.filters) {
            std::string err;
            Tv v = eval(f, b, err);
            if (v == Tv::Error) throw EvaluationError(err);
            if (v == Tv::False) return false;
        }
        return true;
    }

    Tv eval(const FilterExpr& e, const Binding& b, std::string& err) const {
        switch (e.kind) {
        case FilterExpr::Kind::And: {
            Tv l = eval(e.children[0], b, err);
            Tv r = eval(e.children[1], b, err);
            if (l == Tv::False || r == Tv::False) return Tv::False;
            if (l == Tv::Error || r == Tv::Error) return Tv::Error;
            return Tv::True;
        }
        case FilterExpr::Kind::Or: {
            Tv l = eval(e.children[0], b, err);
            Tv r = eval(e.children[1], b, err);
            if (l == Tv::True || r == Tv::True) return Tv::True;
            if (l == Tv::Error || r == Tv::Error) return Tv::Error;
            return Tv::False;
        }
        case FilterExpr::Kind::Not: {
            Tv v = eval(e.children[0], b, err);
            if (v == Tv::Error) return v;
            return v == Tv::True ? Tv::False : Tv::True;
        }
        case FilterExpr::Kind::Bound:
            return b.count(as_var(e.operands[0]).name) ? Tv::True : Tv::False;
        case FilterExpr::Kind::Compare:
            return compare(e, b, err);
        case FilterExpr::Kind::Regex:
            return regex_match_tv(e, b, err);
        case FilterExpr::Kind::Exists:
            return exists(e.exists_bgp, b) ? Tv::True : Tv::False;
        case FilterExpr::Kind::NotExists:
            return exists(e.exists_bgp, b) ? Tv::False : Tv::True;
        }
        err = "unreachable filter kind";
        return Tv::Error;
    }

    std::optional<rdf::Term> resolve(const PatternTerm& pt, const Binding& b,
                                     std::string& err) const {
        if (!is_var(pt)) return term_of(pt);
        auto it = b.find(as_var(pt).name);
        if (it == b.end()) {
            err = "unbound variable ?" + as_var(pt).name + " in filter";
            return std::nullopt;
        }
        return it->second;
    }

    Tv compare(const FilterExpr& e, const Binding& b, std::string& err) const {
        std::optional<rdf::Term> l = resolve(e.operands[0], b, err);
        if (!l) return Tv::Error;
        std::optional<rdf::Term> r = resolve(e.operands[1], b, err);
        if (!r) return Tv::Error;

        const bool equality = e.op == "=" || e.op == "!=";
        if (rdf::is_iri(*l) != rdf::is_iri(*r)) {
            // IRI vs literal: equality is decidable, ordering is not
            if (equality) return (e.op == "!=") ? Tv::True : Tv::False;
            err = "type mismatch: ordering comparison between IRI and literal";
            return Tv::Error;
        }
        if (rdf::is_iri(*l)) {
            if (!equality) {
                err = "type mismatch: ordering comparison on IRIs";
                return Tv::Error;
            }
            bool eq = rdf::as_iri(*l) == rdf::as_iri(*r);
            return (eq == (e.op == "=")) ? Tv::True : Tv::False;
        }

        const rdf::Literal& ll = rdf::as_literal(*l);
        const rdf::Literal& rl = rdf::as_literal(*r);
        if (ll.datatype != rl.datatype) {
            err = "type mismatch: comparison across literal datatypes";
            return Tv::Error;
        }
        int cmp = 0;
        switch (ll.datatype) {
        case rdf::LiteralType::Integer: {
            try {
                long long a = std::stoll(ll.lexical), c = std::stoll(rl.lexical);
                cmp = a < c ? -1 : (a > c ? 1 : 0);
            } catch (const std::out_of_range&) {
                err = "integer literal out of comparable range";
                return Tv::Error;
            }
            break;
        }
        case rdf::LiteralType::Boolean: {
            int a = ll.lexical == "true", c = rl.lexical == "true";
            cmp = a - c;
            break;
        }
        default:
            cmp = ll.lexical.compare(rl.lexical);
            cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
            break;
        }
        bool res;
        if (e.op == "=") res = cmp == 0;
        else if (e.op == "!=") res = cmp != 0;
        else if (e.op == "<") res = cmp < 0;
        else if (e.op == "<=") res = cmp <= 0;
        else if (e.op == ">") res = cmp > 0;
        else res = cmp >= 0;
        return res ? Tv::True : Tv::False;
    }

    Tv regex_match_tv(const FilterExpr& e, const Binding& b, std::string& err) const {
        std::optional<rdf::Term> t = resolve(e.operands[0], b, err);
        if (!t) return Tv::Error;
        if (rdf::is_iri(*t)) {
            err = "regex applied to an IRI";
            return Tv::Error;
        }
        const rdf::Literal& lit = rdf::as_literal(*t);
        if (lit.datatype != rdf::LiteralType::String) {
            err = "regex applied to a non-string literal";
            return Tv::Error;
        }
        if (!e.regex_flags.empty() && e.regex_flags != "i") {
            err = "unsupported regex flags '" + e.regex_flags + "'";
            return Tv::Error;
        }
        if (auto bad = regex_dialect_error(e.regex_pattern)) {
            err = "regex outside supported dialect: " + *bad;
            return Tv::Error;
        }
        try {
            auto flags = std::regex::ECMAScript;
            if (e.regex_flags == "i") flags |= std::regex::icase;
            std::regex re(e.regex_pattern, flags);
            return std::regex_search(lit.lexical, re) ? Tv::True : Tv::False;
        } catch (const std::regex_error& ex) {
            err = std::string("regex rejected: ") + ex.what();
            return Tv::Error;
        }
    }

    bool exists(const std::vector<TriplePattern>& bgp, const Binding& b) const {
        std::vector<Binding> found;
        join_limited(order_patterns(bgp), 0, b, found);
        return !found.empty();
    }

    /// Like join but stops at the first full solution.
    void join_limited(const std::vector<TriplePattern>& patterns, std::size_t at,
                      Binding binding, std::vector<Binding>& out) const {
        if (!out.empty()) return;
        if (at == patterns.size()) {
            out.push_back(std::move(binding));
            return;
        }
        const TriplePattern& p = patterns[at];
        for (const rdf::Triple* t : candidates(p, binding)) {
            if (!out.empty()) return;
            Binding next = binding;
            if (!unify(p.subject, rdf::Term{t->subject}, next)) continue;
            if (!unify(p.predicate, rdf::Term{t->predicate}, next)) continue;
            if (!unify(p.object, t->object, next)) continue;
            join_limited(patterns, at + 1, std::move(next), out);
        }
    }

    const QueryAst& q_;
    const rdf::Graph& g_;
    rdf::GraphIndex index_;
};

} // namespace detail

inline ResultSet execute(const QueryAst& q, const rdf::Graph& g) {
    return detail::Evaluator(q, g).run();
}

} // namespace ckg::sparql
