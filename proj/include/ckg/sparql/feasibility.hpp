#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ckg/kg/ontology.hpp"
#include "ckg/kg/summary.hpp"
#include "ckg/sparql/ast.hpp"

// Pre-execution sanity check: can the query's vocabulary and constants map
// onto the schema and the summarized instances? Infeasible findings mean the
// query can only return empty over conformant data; unknown-term findings
// flag constants absent from the summary. Vocabulary problems inside a NOT
// EXISTS group are reported at unknown-term severity because absence there
// does not force an empty result.

namespace ckg::sparql {

enum class Feasibility { Feasible, Infeasible, UnknownTerm };

inline const char* to_string(Feasibility f) {
    switch (f) {
    case Feasibility::Feasible: return "feasible";
    case Feasibility::Infeasible: return "infeasible";
    case Feasibility::UnknownTerm: return "unknown-term";
    }
    return "?";
}

struct FeasibilityDiagnostic {
    std::size_t pattern_index = 0;
    std::string message;
};

struct FeasibilityReport {
    Feasibility status = Feasibility::Feasible;
    std::vector<FeasibilityDiagnostic> diagnostics;
};

namespace detail {

class FeasibilityChecker {
public:
    FeasibilityChecker(const kg::OntologySchema& schema, const kg::KgSummary& summary)
        : schema_(schema), summary_(summary) {
        for (const auto& [cls, rows] : summary_.tables) {
            for (const kg::SummaryRow& r : rows) {
                instance_class_[r.iri] = rdf::ckg_iri(cls);
                if (!r.name.empty()) known_names_.insert(r.name);
                if (!r.visibility.empty()) known_visibilities_.insert(r.visibility);
            }
        }
    }

    FeasibilityReport check(const QueryAst& q) {
        for (std::size_t i = 0; i < q.bgp.size(); ++i)
            check_pattern(q.bgp[i], i, false);
        next_index_ = q.bgp.size();
        for (const FilterExpr& f : q.filters) check_filter(f);
        finish_type_conflicts();

        FeasibilityReport out;
        out.diagnostics = std::move(diagnostics_);
        out.status = status_;
        return out;
    }

private:
    void diagnose(Feasibility severity, std::size_t index, std::string msg) {
        if (severity == Feasibility::Infeasible) {
            status_ = Feasibility::Infeasible;
        } else if (severity == Feasibility::UnknownTerm &&
                   status_ == Feasibility::Feasible) {
            status_ = Feasibility::UnknownTerm;
        }
        diagnostics_.push_back({index, std::move(msg)});
    }

    void check_filter(const FilterExpr& e) {
        // positive EXISTS behaves like the outer pattern group; NOT EXISTS
        // vocabulary problems are advisory only
        if (e.kind == FilterExpr::Kind::Exists || e.kind == FilterExpr::Kind::NotExists) {
            bool advisory = e.kind == FilterExpr::Kind::NotExists;
            for (std::size_t i = 0; i < e.exists_bgp.size(); ++i)
                check_pattern(e.exists_bgp[i], next_index_ + i, advisory);
            next_index_ += e.exists_bgp.size();
        }
        for (const FilterExpr& c : e.children) check_filter(c);
    }

    void check_pattern(const TriplePattern& p, std::size_t index, bool advisory) {
        const Feasibility vocab_severity =
            advisory ? Feasibility::UnknownTerm : Feasibility::Infeasible;

        if (is_iri(p.predicate)) {
            const rdf::Iri& pred = as_iri(p.predicate);
            bool is_type = pred == rdf::rdf_type();
            const kg::ObjectPropertySpec* ospec = schema_.object_property(pred);
            const kg::DataPropertySpec* dspec = schema_.datatype_property(pred);
            if (!is_type && !ospec && !dspec && pred.in_namespace(rdf::kCkgNs)) {
                diagnose(vocab_severity, index,
                         "undeclared property " + pred.local_name());
                return;
            }
            if (is_type) {
                if (is_iri(p.object)) {
                    const rdf::Iri& cls = as_iri(p.object);
                    if (!schema_.is_class(cls)) {
                        diagnose(vocab_severity, index,
                                 "undeclared class " + cls.local_name());
                    } else if (!advisory) {
                        constrain(p.subject, cls, index);
                    }
                }
            } else if (ospec && !advisory) {
                constrain(p.subject, ospec->domain, index);
                constrain(p.object, ospec->range, index);
            } else if (dspec) {
                if (!advisory) constrain(p.subject, dspec->domain, index);
                if (is_literal(p.object)) check_known_value(dspec->iri, p.object, index);
            }
        }
        for (const PatternTerm* t : {&p.subject, &p.object}) {
            if (is_iri(*t) && kg::is_instance_iri(as_iri(*t)) &&
                !instance_class_.count(as_iri(*t).value))
                diagnose(Feasibility::UnknownTerm, index,
                         "instance " + as_iri(*t).value + " not in summary");
        }
    }

    void check_known_value(const rdf::Iri& prop, const PatternTerm& obj,
                           std::size_t index) {
        const rdf::Literal& lit = as_literal(obj);
        if (prop == rdf::ckg_iri("nameIs") && !known_names_.count(lit.lexical))
            diagnose(Feasibility::UnknownTerm, index,
                     "name \"" + lit.lexical + "\" not in summary");
        if (prop == rdf::ckg_iri("visibilityIs") && !known_visibilities_.count(lit.lexical))
            diagnose(Feasibility::UnknownTerm, index,
                     "visibility \"" + lit.lexical + "\" not in summary");
    }

    /// Records a class constraint for a variable or checks it for a constant.
    void constrain(const PatternTerm& t, const rdf::Iri& cls, std::size_t index) {
        if (is_var(t)) {
            var_constraints_[as_var(t).name].push_back({cls, index});
            return;
        }
        if (is_iri(t)) {
            auto it = instance_class_.find(as_iri(t).value);
            if (it == instance_class_.end()) return; // handled as unknown-term
            if (!compatible(it->second, cls))
                diagnose(Feasibility::Infeasible, index,
                         "instance " + as_iri(t).value + " has class " +
                             it->second.local_name() + ", incompatible with " +
                             cls.local_name());
        }
    }

    bool compatible(const rdf::Iri& a, const rdf::Iri& b) const {
        return schema_.is_subclass_of(a, b) || schema_.is_subclass_of(b, a);
    }

    void finish_type_conflicts() {
        for (const auto& [var, constraints] : var_constraints_) {
            for (std::size_t i = 0; i < constraints.size(); ++i) {
                for (std::size_t j = i + 1; j < constraints.size(); ++j) {
                    if (!compatible(constraints[i].cls, constraints[j].cls)) {
                        diagnose(Feasibility::Infeasible, constraints[j].index,
                                 "variable ?" + var + " typed both " +
                                     constraints[i].cls.local_name() + " and " +
                                     constraints[j].cls.local_name());
                        return; // one conflict per variable is enough signal
                    }
                }
            }
        }
    }

    struct Constraint {
        rdf::Iri cls;
        std::size_t index;
    };

    const kg::OntologySchema& schema_;
    const kg::KgSummary& summary_;
    std::map<std::string, rdf::Iri> instance_class_;
    std::set<std::string> known_names_;
    std::set<std::string> known_visibilities_;
    std::map<std::string, std::vector<Constraint>> var_constraints_;
    std::vector<FeasibilityDiagnostic> diagnostics_;
    Feasibility status_ = Feasibility::Feasible;
    std::size_t next_index_ = 0;
};

} // namespace detail

inline FeasibilityReport validate_feasibility(const QueryAst& q,
                                              const kg::OntologySchema& schema,
                                              const kg::KgSummary& summary) {
    detail::FeasibilityChecker checker(schema, summary);
    return checker.check(q);
}

} // namespace ckg::sparql
