#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckg/rdf/model.hpp"

// Fixed two-layer ontology: class hierarchy rooted at ckg:Element plus the
// object and datatype properties the instance builder emits. The schema is a
// compile-time constant; its triple encoding uses rdfs vocabulary.

namespace ckg::kg {

struct ObjectPropertySpec {
    rdf::Iri iri;
    rdf::Iri domain;
    rdf::Iri range;
};

struct DataPropertySpec {
    rdf::Iri iri;
    rdf::Iri domain;
    rdf::LiteralType datatype = rdf::LiteralType::String;
};

class OntologySchema {
public:
    OntologySchema() {
        auto cls = [&](const char* name, const char* super) {
            classes_[rdf::ckg_iri(name)] =
                super ? std::optional<rdf::Iri>(rdf::ckg_iri(super)) : std::nullopt;
        };
        cls("Element", nullptr);
        cls("Contract", "Element");
        cls("Interface", "Contract");
        cls("Library", "Contract");
        cls("Callable", "Element");
        cls("Function", "Callable");
        cls("Modifier", "Callable");
        cls("Builtin", "Callable");
        cls("ExternalCallable", "Callable");
        cls("Variable", "Element");
        cls("StateVar", "Variable");
        cls("LocalVar", "Variable");
        cls("EnvVar", "Variable");
        cls("Statement", "Element");

        auto obj = [&](const char* name, const char* dom, const char* rng) {
            object_properties_.push_back(
                {rdf::ckg_iri(name), rdf::ckg_iri(dom), rdf::ckg_iri(rng)});
        };
        obj("hasFunction", "Contract", "Function");
        obj("hasStateVar", "Contract", "StateVar");
        obj("hasModifier", "Contract", "Modifier");
        obj("hasStatement", "Callable", "Statement");
        obj("hasNext", "Statement", "Statement");
        obj("entryPointIs", "Function", "Statement");
        obj("invokes", "Statement", "Callable");
        obj("inheritsFrom", "Contract", "Contract");
        obj("readsVar", "Statement", "Variable");
        obj("writesVar", "Statement", "Variable");
        obj("appliesModifier", "Function", "Callable");
        obj("branchTrue", "Statement", "Statement");
        obj("branchFalse", "Statement", "Statement");

        auto data = [&](const char* name, const char* dom, rdf::LiteralType t) {
            datatype_properties_.push_back({rdf::ckg_iri(name), rdf::ckg_iri(dom), t});
        };
        data("nameIs", "Element", rdf::LiteralType::String);
        data("visibilityIs", "Element", rdf::LiteralType::String);
        data("indexIs", "Statement", rdf::LiteralType::Integer);
        data("kindIs", "Statement", rdf::LiteralType::String);
        data("spanIs", "Element", rdf::LiteralType::String);
        data("mutabilityIs", "Function", rdf::LiteralType::String);
        data("typeIs", "Variable", rdf::LiteralType::String);
    }

    const std::map<rdf::Iri, std::optional<rdf::Iri>>& classes() const { return classes_; }
    const std::vector<ObjectPropertySpec>& object_properties() const {
        return object_properties_;
    }
    const std::vector<DataPropertySpec>& datatype_properties() const {
        return datatype_properties_;
    }

    bool is_class(const rdf::Iri& iri) const { return classes_.count(iri) > 0; }

    /// Reflexive-transitive subclass test.
    bool is_subclass_of(const rdf::Iri& sub, const rdf::Iri& super) const {
        std::optional<rdf::Iri> cur = sub;
        while (cur) {
            if (*cur == super) return true;
            auto it = classes_.find(*cur);
            if (it == classes_.end()) return false;
            cur = it->second;
        }
        return false;
    }

    const ObjectPropertySpec* object_property(const rdf::Iri& iri) const {
        for (const auto& p : object_properties_)
            if (p.iri == iri) return &p;
        return nullptr;
    }

    const DataPropertySpec* datatype_property(const rdf::Iri& iri) const {
        for (const auto& p : datatype_properties_)
            if (p.iri == iri) return &p;
        return nullptr;
    }

    /// Triple encoding of the schema using rdfs vocabulary.
    rdf::Graph to_graph() const {
        std::vector<rdf::Triple> ts;
        const rdf::Iri rdfs_class{std::string(rdf::kRdfsNs) + "Class"};
        const rdf::Iri rdf_property{std::string(rdf::kRdfNs) + "Property"};
        const rdf::Iri sub_class_of{std::string(rdf::kRdfsNs) + "subClassOf"};
        const rdf::Iri domain{std::string(rdf::kRdfsNs) + "domain"};
        const rdf::Iri range{std::string(rdf::kRdfsNs) + "range"};
        for (const auto& [cls, super] : classes_) {
            ts.push_back({cls, rdf::rdf_type(), rdfs_class});
            if (super) ts.push_back({cls, sub_class_of, *super});
        }
        for (const auto& p : object_properties_) {
            ts.push_back({p.iri, rdf::rdf_type(), rdf_property});
            ts.push_back({p.iri, domain, p.domain});
            ts.push_back({p.iri, range, p.range});
        }
        for (const auto& p : datatype_properties_) {
            ts.push_back({p.iri, rdf::rdf_type(), rdf_property});
            ts.push_back({p.iri, domain, p.domain});
            ts.push_back({p.iri, range, rdf::Iri{std::string(rdf::xsd_iri(p.datatype))}});
        }
        return rdf::Graph(std::move(ts));
    }

private:
    std::map<rdf::Iri, std::optional<rdf::Iri>> classes_;
    std::vector<ObjectPropertySpec> object_properties_;
    std::vector<DataPropertySpec> datatype_properties_;
};

inline const OntologySchema& ontology() {
    static const OntologySchema schema;
    return schema;
}

/// The schema together with its triple encoding.
inline std::pair<const OntologySchema&, rdf::Graph> ontology_schema() {
    return {ontology(), ontology().to_graph()};
}

/// True when `t` is part of the ontology encoding rather than instance data.
inline bool is_ontology_triple(const rdf::Triple& t) {
    static const rdf::Graph enc = ontology().to_graph();
    return enc.contains(t);
}

} // namespace ckg::kg
