#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ckg/errors.hpp"

namespace ckg::rdf {

// Well-known namespace bases. Instance nodes use urn:ckg:... IRIs instead.
inline constexpr const char* kCkgNs = "http://ckg.dev/ontology#";
inline constexpr const char* kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr const char* kRdfsNs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr const char* kXsdNs = "http://www.w3.org/2001/XMLSchema#";

struct Iri {
    std::string value;

    Iri() = default;
    explicit Iri(std::string v) : value(std::move(v)) {}

    auto operator<=>(const Iri&) const = default;

    bool in_namespace(const char* ns) const {
        return value.rfind(ns, 0) == 0;
    }
    /// Local name after the last '#', ':' or '/'.
    std::string local_name() const {
        auto pos = value.find_last_of("#/:");
        return pos == std::string::npos ? value : value.substr(pos + 1);
    }
};

inline Iri ckg_iri(const std::string& local) { return Iri(std::string(kCkgNs) + local); }
inline Iri rdf_type() { return Iri(std::string(kRdfNs) + "type"); }

enum class LiteralType { String, Integer, Boolean };

inline const char* xsd_iri(LiteralType t) {
    switch (t) {
    case LiteralType::Integer: return "http://www.w3.org/2001/XMLSchema#integer";
    case LiteralType::Boolean: return "http://www.w3.org/2001/XMLSchema#boolean";
    default: return "http://www.w3.org/2001/XMLSchema#string";
    }
}

/// Typed literal. The lexical form must parse under the datatype.
struct Literal {
    std::string lexical;
    LiteralType datatype = LiteralType::String;

    Literal() = default;
    Literal(std::string lex, LiteralType t) : lexical(std::move(lex)), datatype(t) {}

    static Literal str(std::string s) { return Literal(std::move(s), LiteralType::String); }
    static Literal integer(long long v) {
        return Literal(std::to_string(v), LiteralType::Integer);
    }
    static Literal boolean(bool v) {
        return Literal(v ? "true" : "false", LiteralType::Boolean);
    }

    auto operator<=>(const Literal&) const = default;

    bool valid() const {
        switch (datatype) {
        case LiteralType::Integer: {
            if (lexical.empty()) return false;
            std::size_t i = (lexical[0] == '-' || lexical[0] == '+') ? 1 : 0;
            if (i == lexical.size()) return false;
            for (; i < lexical.size(); ++i)
                if (lexical[i] < '0' || lexical[i] > '9') return false;
            return true;
        }
        case LiteralType::Boolean:
            return lexical == "true" || lexical == "false";
        default:
            return true;
        }
    }
};

using Term = std::variant<Iri, Literal>;

inline bool is_iri(const Term& t) { return std::holds_alternative<Iri>(t); }
inline const Iri& as_iri(const Term& t) { return std::get<Iri>(t); }
inline const Literal& as_literal(const Term& t) { return std::get<Literal>(t); }

struct Triple {
    Iri subject;
    Iri predicate;
    Term object;

    Triple() = default;
    Triple(Iri s, Iri p, Term o)
        : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {}

    auto operator<=>(const Triple&) const = default;
};

/// Immutable set of triples plus a prefix table used only for display.
class Graph {
public:
    Graph() : namespaces_(default_namespaces()) {}

    explicit Graph(std::vector<Triple> triples,
                   std::map<std::string, std::string> namespaces = default_namespaces())
        : triples_(triples.begin(), triples.end()), namespaces_(std::move(namespaces)) {}

    explicit Graph(std::set<Triple> triples,
                   std::map<std::string, std::string> namespaces = default_namespaces())
        : triples_(std::move(triples)), namespaces_(std::move(namespaces)) {}

    const std::set<Triple>& triples() const { return triples_; }
    const std::map<std::string, std::string>& namespaces() const { return namespaces_; }

    std::size_t size() const { return triples_.size(); }
    bool empty() const { return triples_.empty(); }
    bool contains(const Triple& t) const { return triples_.count(t) > 0; }

    /// Equality is triple-set equality; the prefix table is presentation only.
    friend bool operator==(const Graph& a, const Graph& b) {
        return a.triples_ == b.triples_;
    }

    static std::map<std::string, std::string> default_namespaces() {
        return {{"ckg", kCkgNs}, {"rdf", kRdfNs}, {"rdfs", kRdfsNs}, {"xsd", kXsdNs}};
    }

private:
    std::set<Triple> triples_;
    std::map<std::string, std::string> namespaces_;
};

/// Subject->triples / predicate->triples lookup built on demand over a Graph.
class GraphIndex {
public:
    explicit GraphIndex(const Graph& g) : graph_(&g) {
        for (const Triple& t : g.triples()) {
            by_subject_[t.subject].push_back(&t);
            by_predicate_[t.predicate].push_back(&t);
            if (is_iri(t.object)) by_object_[as_iri(t.object)].push_back(&t);
        }
    }

    const std::vector<const Triple*>& with_subject(const Iri& s) const {
        return lookup(by_subject_, s);
    }
    const std::vector<const Triple*>& with_predicate(const Iri& p) const {
        return lookup(by_predicate_, p);
    }
    const std::vector<const Triple*>& with_object_iri(const Iri& o) const {
        return lookup(by_object_, o);
    }

    /// Objects o of (s, p, o).
    std::vector<Term> objects(const Iri& s, const Iri& p) const {
        std::vector<Term> out;
        for (const Triple* t : with_subject(s))
            if (t->predicate == p) out.push_back(t->object);
        return out;
    }

    /// First string-literal object of (s, p, _), if any.
    std::optional<std::string> literal_of(const Iri& s, const Iri& p) const {
        for (const Triple* t : with_subject(s))
            if (t->predicate == p && !is_iri(t->object))
                return as_literal(t->object).lexical;
        return std::nullopt;
    }

    const Graph& graph() const { return *graph_; }

private:
    static const std::vector<const Triple*>& lookup(
        const std::map<Iri, std::vector<const Triple*>>& m, const Iri& k) {
        static const std::vector<const Triple*> empty;
        auto it = m.find(k);
        return it == m.end() ? empty : it->second;
    }

    const Graph* graph_;
    std::map<Iri, std::vector<const Triple*>> by_subject_;
    std::map<Iri, std::vector<const Triple*>> by_predicate_;
    std::map<Iri, std::vector<const Triple*>> by_object_;
};

} // namespace ckg::rdf
