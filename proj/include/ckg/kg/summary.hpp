#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ckg/kg/ontology.hpp"
#include "ckg/rdf/model.hpp"

// Tabular view of the instance layer: one table per class listing each
// instance with its name/visibility literals, plus exact cardinalities.
// The rendered form is what the prompt builder embeds.

namespace ckg::kg {

struct SummaryRow {
    std::string iri;
    std::string name;       // nameIs value, may be empty
    std::string visibility; // visibilityIs value, may be empty
    auto operator<=>(const SummaryRow&) const = default;
};

struct KgSummary {
    std::map<std::string, std::vector<SummaryRow>> tables; // class local name -> rows
    std::map<std::string, std::size_t> class_counts;
    std::map<std::string, std::size_t> property_counts;

    std::size_t instance_total() const {
        std::size_t n = 0;
        for (const auto& [cls, count] : class_counts) n += count;
        return n;
    }
};

inline bool is_instance_iri(const rdf::Iri& iri) {
    return iri.value.rfind("urn:ckg:", 0) == 0;
}

inline KgSummary summarize_graph(const rdf::Graph& g) {
    KgSummary out;
    rdf::GraphIndex index(g);
    const rdf::Iri type = rdf::rdf_type();
    const rdf::Iri name_is = rdf::ckg_iri("nameIs");
    const rdf::Iri visibility_is = rdf::ckg_iri("visibilityIs");

    for (const rdf::Triple& t : g.triples()) {
        if (t.predicate != type || !is_instance_iri(t.subject)) continue;
        if (!rdf::is_iri(t.object)) continue;
        const rdf::Iri& cls = rdf::as_iri(t.object);
        if (!cls.in_namespace(rdf::kCkgNs)) continue;
        SummaryRow row;
        row.iri = t.subject.value;
        row.name = index.literal_of(t.subject, name_is).value_or("");
        row.visibility = index.literal_of(t.subject, visibility_is).value_or("");
        out.tables[cls.local_name()].push_back(std::move(row));
    }
    for (auto& [cls, rows] : out.tables) {
        std::sort(rows.begin(), rows.end());
        out.class_counts[cls] = rows.size();
    }

    const OntologySchema& schema = ontology();
    auto count_predicate = [&](const rdf::Iri& p) {
        std::size_t n = 0;
        for (const rdf::Triple& t : g.triples())
            if (t.predicate == p) ++n;
        return n;
    };
    for (const auto& p : schema.object_properties()) {
        std::size_t n = count_predicate(p.iri);
        if (n) out.property_counts[p.iri.local_name()] = n;
    }
    for (const auto& p : schema.datatype_properties()) {
        std::size_t n = count_predicate(p.iri);
        if (n) out.property_counts[p.iri.local_name()] = n;
    }
    return out;
}

/// Markdown rendering with one pipe table per class, classes sorted by name.
inline std::string render_summary(const KgSummary& s) {
    std::string out;
    for (const auto& [cls, rows] : s.tables) {
        out += "### " + cls + " (" + std::to_string(rows.size()) + ")\n";
        out += "| instance | name | visibility |\n";
        out += "|---|---|---|\n";
        for (const SummaryRow& r : rows) {
            out += "| " + r.iri + " | " + r.name + " | " + r.visibility + " |\n";
        }
        out += "\n";
    }
    out += "### Property counts\n";
    out += "| property | triples |\n";
    out += "|---|---|\n";
    for (const auto& [prop, n] : s.property_counts)
        out += "| " + prop + " | " + std::to_string(n) + " |\n";
    return out;
}

} // namespace ckg::kg
