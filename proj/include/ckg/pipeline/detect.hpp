#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ckg/errors.hpp"
#include "ckg/kg/instance.hpp"
#include "ckg/kg/ontology.hpp"
#include "ckg/kg/summary.hpp"
#include "ckg/llm/gateway.hpp"
#include "ckg/prompt/builder.hpp"
#include "ckg/prompt/cwe.hpp"
#include "ckg/prompt/templates.hpp"
#include "ckg/prune.hpp"
#include "ckg/sol/ir.hpp"
#include "ckg/sparql/engine.hpp"
#include "ckg/sparql/feasibility.hpp"
#include "ckg/sparql/parser.hpp"

// End-to-end detection: source to IR to knowledge graph, prune, two-round
// dialogue, query execution, findings. detect() is total; every failure mode
// folds into an inconclusive report so batch runs never abort.

namespace ckg::pipeline {

enum class Verdict { Vulnerable, Clean, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Vulnerable: return "vulnerable";
    case Verdict::Clean: return "clean";
    default: return "inconclusive";
    }
}

struct DetectionFinding {
    std::string entity; // instance IRI
    std::string file;
    SourceSpan span;
    std::string confidence = "low";
};

struct StageTimings {
    double build = 0.0;
    double prune = 0.0;
    double prompt = 0.0;
    double llm = 0.0;
    double query = 0.0;
    double total = 0.0;
};

struct DetectionReport {
    std::string contract_id;
    std::string cwe;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<DetectionFinding> findings;
    std::string query_text;
    sparql::FeasibilityReport feasibility;
    llm::DialogueTranscript transcript;
    StageTimings timings;
    std::string template_version = prompt::kTemplateVersion;
    std::vector<std::string> diagnostics;
};

// Span lookup for an instance IRI recorded during graph construction.
inline SourceSpan map_iri_to_source(const kg::InstanceBuild& build,
                                    const rdf::Iri& entity) {
    auto it = build.spans.find(entity.value);
    if (it == build.spans.end()) throw UnknownEntity(entity.value);
    return it->second;
}

namespace detail {

inline int confidence_rank(const std::string& c) {
    if (c == "high") return 2;
    if (c == "medium") return 1;
    return 0;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}

    double lap() {
        auto now = std::chrono::steady_clock::now();
        double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace detail

// One finding per result row whose first selected column binds an IRI with a
// recorded span; duplicates keep the highest confidence.
inline std::vector<DetectionFinding>
assemble_findings(const sparql::ResultSet& rows, const kg::InstanceBuild& build,
                  const std::string& confidence,
                  std::vector<std::string>& diagnostics) {
    std::vector<DetectionFinding> findings;
    std::map<std::string, std::size_t> seen;
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
        if (rows.rows[r].empty()) continue;
        const rdf::Term& cell = rows.rows[r][0];
        if (!std::holds_alternative<rdf::Iri>(cell)) {
            diagnostics.push_back("result row " + std::to_string(r) +
                                  " binds a literal in the first column; skipped");
            continue;
        }
        const rdf::Iri& entity = std::get<rdf::Iri>(cell);
        SourceSpan span;
        try {
            span = map_iri_to_source(build, entity);
        } catch (const UnknownEntity&) {
            diagnostics.push_back("result row " + std::to_string(r) +
                                  " binds " + entity.value +
                                  " which has no source span; skipped");
            continue;
        }
        auto it = seen.find(entity.value);
        if (it != seen.end()) {
            DetectionFinding& existing = findings[it->second];
            if (detail::confidence_rank(confidence) >
                detail::confidence_rank(existing.confidence))
                existing.confidence = confidence;
            continue;
        }
        seen[entity.value] = findings.size();
        findings.push_back({entity.value, build.source_id, span, confidence});
    }
    return findings;
}

inline DetectionReport detect(const std::string& source,
                              const std::string& source_id,
                              const std::string& cwe_id,
                              const PruneConfig& prune_cfg,
                              const llm::EndpointConfig& endpoint_cfg) {
    using clock = std::chrono::steady_clock;
    auto run_start = clock::now();
    DetectionReport report;
    report.contract_id = source_id;
    report.cwe = cwe_id;

    auto finish = [&](Verdict v) -> DetectionReport& {
        report.verdict = v;
        report.timings.total =
            std::chrono::duration<double>(clock::now() - run_start).count();
        return report;
    };
    auto inconclusive = [&](const std::string& why) -> DetectionReport {
        report.diagnostics.push_back(why);
        return finish(Verdict::Inconclusive);
    };

    detail::Stopwatch watch;

    // source to knowledge graph
    sol::ContractIR ir;
    kg::InstanceBuild build;
    try {
        ir = sol::lower_source(source, source_id);
        build = kg::build_instance(ir);
    } catch (const Error& e) {
        return inconclusive(std::string("build failed: ") + e.what());
    }
    for (const Warning& w : ir.warnings)
        report.diagnostics.push_back("warning: " + w.message);
    report.timings.build = watch.lap();

    const prompt::CwePattern* pattern = nullptr;
    try {
        pattern = &prompt::cwe_pattern(cwe_id);
    } catch (const UnknownCwe& e) {
        return inconclusive(std::string("unknown cwe: ") + e.what());
    }

    // prune for the prompt; the query itself runs on the full graph
    rdf::Graph pruned;
    try {
        pruned = prune_access_control(build.graph, prune_cfg);
    } catch (const Error& e) {
        return inconclusive(std::string("prune failed: ") + e.what());
    }
    kg::KgSummary prompt_summary = kg::summarize_graph(pruned);
    report.timings.prune = watch.lap();

    const kg::OntologySchema& schema = kg::ontology();

    // two rounds of dialogue; prompt timing covers template work only
    std::string reply1;
    std::string reply2;
    try {
        prompt::PromptRound round1 =
            prompt::build_round_one(*pattern, schema, prompt_summary);
        report.timings.prompt += watch.lap();

        std::vector<llm::ChatMessage> messages = {
            {llm::Role::System, llm::kSystemPrompt},
            {llm::Role::User, round1.render()},
        };
        auto t0 = clock::now();
        reply1 = llm::complete(messages, endpoint_cfg);
        report.timings.llm +=
            std::chrono::duration<double>(clock::now() - t0).count();
        report.transcript.rounds.push_back(
            {messages, reply1,
             std::chrono::duration<double>(clock::now() - t0).count()});
        watch.lap();

        prompt::PromptRound round2 =
            prompt::build_round_two(reply1, *pattern, schema);
        report.timings.prompt += watch.lap();

        messages.push_back({llm::Role::Assistant, reply1});
        messages.push_back({llm::Role::User, round2.render()});
        auto t1 = clock::now();
        reply2 = llm::complete(messages, endpoint_cfg);
        report.timings.llm +=
            std::chrono::duration<double>(clock::now() - t1).count();
        report.transcript.rounds.push_back(
            {messages, reply2,
             std::chrono::duration<double>(clock::now() - t1).count()});
        watch.lap();
    } catch (const Error& e) {
        return inconclusive(std::string("dialogue failed: ") + e.what());
    }

    try {
        report.transcript.extracted_query = llm::extract_sparql(reply2);
    } catch (const ExtractionFailure& e) {
        return inconclusive(std::string("extraction failed: ") + e.what());
    }
    report.query_text = *report.transcript.extracted_query;

    // parse, feasibility-check, execute against the full graph
    sparql::ResultSet rows;
    std::string confidence = prompt::parse_reasoning(reply1).confidence;
    try {
        sparql::QueryAst ast = sparql::parse_query(report.query_text);
        report.feasibility = sparql::validate_feasibility(
            ast, schema, kg::summarize_graph(build.graph));
        for (const sparql::FeasibilityDiagnostic& d : report.feasibility.diagnostics)
            report.diagnostics.push_back(
                "feasibility: pattern " + std::to_string(d.pattern_index) + ": " +
                d.message);
        if (report.feasibility.status == sparql::Feasibility::Infeasible) {
            report.timings.query = watch.lap();
            return inconclusive("query is infeasible against the schema");
        }
        rows = sparql::execute(ast, build.graph);
    } catch (const Error& e) {
        report.timings.query = watch.lap();
        return inconclusive(std::string("query failed: ") + e.what());
    }
    report.findings = assemble_findings(rows, build, confidence, report.diagnostics);
    report.timings.query = watch.lap();

    return finish(report.findings.empty() ? Verdict::Clean : Verdict::Vulnerable);
}

// Report JSON with a stable field order so byte-level comparison works.
inline nlohmann::ordered_json to_json(const DetectionReport& r) {
    nlohmann::ordered_json out;
    out["contract_id"] = r.contract_id;
    out["cwe"] = r.cwe;
    out["verdict"] = to_string(r.verdict);
    out["findings"] = nlohmann::ordered_json::array();
    for (const DetectionFinding& f : r.findings) {
        nlohmann::ordered_json jf;
        jf["entity"] = f.entity;
        jf["file"] = f.file;
        jf["line"] = f.span.line;
        jf["start"] = f.span.begin;
        jf["end"] = f.span.end;
        jf["confidence"] = f.confidence;
        out["findings"].push_back(std::move(jf));
    }
    out["query"] = r.query_text;
    out["timings"] = {{"build", r.timings.build}, {"prune", r.timings.prune},
                      {"prompt", r.timings.prompt}, {"llm", r.timings.llm},
                      {"query", r.timings.query}, {"total", r.timings.total}};
    out["template_version"] = r.template_version;
    out["diagnostics"] = r.diagnostics;
    return out;
}

} // namespace ckg::pipeline
