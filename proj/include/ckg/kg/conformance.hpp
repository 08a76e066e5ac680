#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ckg/kg/ontology.hpp"
#include "ckg/kg/summary.hpp"
#include "ckg/rdf/model.hpp"

// Schema validation over a merged graph: typing totality, domain/range
// conformance, datatype agreement, hasNext acyclicity and index contiguity.
// Violations are data, not errors; callers decide severity.

namespace ckg::kg {

struct Violation {
    std::string code;    // stable identifier, e.g. "missing-type"
    std::string subject; // offending IRI or property
    std::string detail;
};

namespace detail {

inline bool is_rdf_vocabulary(const rdf::Iri& p) {
    return p.in_namespace(rdf::kRdfNs) || p.in_namespace(rdf::kRdfsNs);
}

} // namespace detail

inline std::vector<Violation> check_conformance(const rdf::Graph& g) {
    std::vector<Violation> out;
    const OntologySchema& schema = ontology();
    const rdf::Iri type = rdf::rdf_type();

    // instance -> asserted classes
    std::map<rdf::Iri, std::vector<rdf::Iri>> types;
    std::set<rdf::Iri> instance_subjects;
    for (const rdf::Triple& t : g.triples()) {
        if (!is_instance_iri(t.subject)) continue;
        if (t.predicate == type && rdf::is_iri(t.object)) {
            types[t.subject].push_back(rdf::as_iri(t.object));
        } else {
            instance_subjects.insert(t.subject);
        }
    }

    for (const rdf::Iri& s : instance_subjects) {
        auto it = types.find(s);
        if (it == types.end() || it->second.empty()) {
            out.push_back({"missing-type", s.value, "no type assertion"});
        } else if (it->second.size() > 1) {
            out.push_back({"multiple-types", s.value,
                           std::to_string(it->second.size()) + " type assertions"});
        }
    }

    auto type_of = [&](const rdf::Iri& s) -> const rdf::Iri* {
        auto it = types.find(s);
        return it != types.end() && it->second.size() == 1 ? &it->second[0] : nullptr;
    };

    for (const rdf::Triple& t : g.triples()) {
        if (!is_instance_iri(t.subject)) continue;
        if (t.predicate == type) {
            if (!rdf::is_iri(t.object) || !schema.is_class(rdf::as_iri(t.object)))
                out.push_back({"unknown-class", t.subject.value, "type object not a class"});
            continue;
        }
        if (const ObjectPropertySpec* spec = schema.object_property(t.predicate)) {
            if (!rdf::is_iri(t.object)) {
                out.push_back({"literal-object", t.subject.value,
                               t.predicate.local_name() + " expects an IRI object"});
                continue;
            }
            const rdf::Iri* st = type_of(t.subject);
            const rdf::Iri* ot = type_of(rdf::as_iri(t.object));
            if (st && !schema.is_subclass_of(*st, spec->domain))
                out.push_back({"domain-mismatch", t.subject.value,
                               t.predicate.local_name() + " domain " +
                                   spec->domain.local_name() + " vs " + st->local_name()});
            if (ot && !schema.is_subclass_of(*ot, spec->range))
                out.push_back({"range-mismatch", rdf::as_iri(t.object).value,
                               t.predicate.local_name() + " range " +
                                   spec->range.local_name() + " vs " + ot->local_name()});
        } else if (const DataPropertySpec* dspec = schema.datatype_property(t.predicate)) {
            if (rdf::is_iri(t.object)) {
                out.push_back({"iri-object", t.subject.value,
                               t.predicate.local_name() + " expects a literal"});
                continue;
            }
            const rdf::Literal& lit = rdf::as_literal(t.object);
            if (lit.datatype != dspec->datatype)
                out.push_back({"datatype-mismatch", t.subject.value,
                               t.predicate.local_name() + " literal datatype differs"});
            else if (!lit.valid())
                out.push_back({"invalid-lexical", t.subject.value,
                               t.predicate.local_name() + " lexical form invalid"});
            const rdf::Iri* st = type_of(t.subject);
            if (st && !schema.is_subclass_of(*st, dspec->domain))
                out.push_back({"domain-mismatch", t.subject.value,
                               t.predicate.local_name() + " domain " +
                                   dspec->domain.local_name() + " vs " + st->local_name()});
        } else if (!detail::is_rdf_vocabulary(t.predicate)) {
            out.push_back(
                {"undeclared-property", t.subject.value, t.predicate.value});
        }
    }

    // hasNext forms a DAG (loop back-edges are never encoded)
    {
        const rdf::Iri has_next = rdf::ckg_iri("hasNext");
        std::map<rdf::Iri, std::vector<rdf::Iri>> next;
        for (const rdf::Triple& t : g.triples())
            if (t.predicate == has_next && rdf::is_iri(t.object))
                next[t.subject].push_back(rdf::as_iri(t.object));
        std::map<rdf::Iri, int> state; // 0 unvisited, 1 in progress, 2 done
        std::vector<Violation>* sink = &out;
        auto dfs = [&](auto&& self, const rdf::Iri& n) -> bool {
            int& st = state[n];
            if (st == 1) return false;
            if (st == 2) return true;
            st = 1;
            for (const rdf::Iri& m : next[n])
                if (!self(self, m)) {
                    sink->push_back({"hasNext-cycle", n.value, "execution order cycles"});
                    st = 2;
                    return true; // report once per entry point
                }
            st = 2;
            return true;
        };
        for (const auto& [n, succs] : next) dfs(dfs, n);
    }

    // indexIs per body is 0..n-1 without gaps
    {
        const rdf::Iri has_statement = rdf::ckg_iri("hasStatement");
        const rdf::Iri index_is = rdf::ckg_iri("indexIs");
        rdf::GraphIndex index(g);
        std::map<rdf::Iri, std::set<long long>> per_body;
        for (const rdf::Triple& t : g.triples()) {
            if (t.predicate != has_statement || !rdf::is_iri(t.object)) continue;
            for (const rdf::Term& o : index.objects(rdf::as_iri(t.object), index_is)) {
                if (!rdf::is_iri(o))
                    per_body[t.subject].insert(std::stoll(rdf::as_literal(o).lexical));
            }
        }
        for (const auto& [body, indices] : per_body) {
            bool ok = !indices.empty() && *indices.begin() == 0 &&
                      *indices.rbegin() == static_cast<long long>(indices.size()) - 1;
            if (!ok)
                out.push_back({"index-gap", body.value, "statement indices not 0..n-1"});
        }
    }

    return out;
}

} // namespace ckg::kg
