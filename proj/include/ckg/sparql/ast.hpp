#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ckg/rdf/model.hpp"

// Query AST for the supported SPARQL subset: SELECT [DISTINCT] over a basic
// graph pattern with filters, optional LIMIT, PREFIX declarations. FILTER
// supports comparisons, boolean connectives, regex, bound and [NOT] EXISTS
// over a nested basic graph pattern.

namespace ckg::sparql {

struct Variable {
    std::string name; // without the leading '?'
    auto operator<=>(const Variable&) const = default;
};

using PatternTerm = std::variant<rdf::Iri, rdf::Literal, Variable>;

inline bool is_var(const PatternTerm& t) { return std::holds_alternative<Variable>(t); }
inline const Variable& as_var(const PatternTerm& t) { return std::get<Variable>(t); }
inline bool is_iri(const PatternTerm& t) { return std::holds_alternative<rdf::Iri>(t); }
inline const rdf::Iri& as_iri(const PatternTerm& t) { return std::get<rdf::Iri>(t); }
inline bool is_literal(const PatternTerm& t) {
    return std::holds_alternative<rdf::Literal>(t);
}
inline const rdf::Literal& as_literal(const PatternTerm& t) {
    return std::get<rdf::Literal>(t);
}

struct TriplePattern {
    PatternTerm subject;
    PatternTerm predicate;
    PatternTerm object;
};

struct FilterExpr {
    enum class Kind { Compare, And, Or, Not, Regex, Bound, Exists, NotExists };
    Kind kind = Kind::Compare;
    std::string op;                        // Compare: one of = != < <= > >=
    std::vector<FilterExpr> children;      // And/Or: 2, Not: 1
    std::vector<PatternTerm> operands;     // Compare: 2; Regex: 1; Bound: 1
    std::string regex_pattern;
    std::string regex_flags;
    std::vector<TriplePattern> exists_bgp; // Exists/NotExists
};

struct QueryAst {
    std::map<std::string, std::string> prefixes;
    bool distinct = false;
    bool select_star = false;
    std::vector<Variable> select_vars; // empty iff select_star
    std::vector<TriplePattern> bgp;
    std::vector<FilterExpr> filters;
    std::optional<std::size_t> limit;

    /// Variables of the outer pattern group in first-appearance order.
    std::vector<Variable> bgp_variables() const {
        std::vector<Variable> out;
        auto note = [&](const PatternTerm& t) {
            if (is_var(t)) {
                const Variable& v = as_var(t);
                for (const Variable& seen : out)
                    if (seen == v) return;
                out.push_back(v);
            }
        };
        for (const TriplePattern& p : bgp) {
            note(p.subject);
            note(p.predicate);
            note(p.object);
        }
        return out;
    }
};

} // namespace ckg::sparql
