#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ckg/errors.hpp"
#include "ckg/pipeline/detect.hpp"
#include "ckg/prompt/cwe.hpp"
#include "ckg/sparql/engine.hpp"
#include "ckg/sparql/feasibility.hpp"
#include "ckg/sparql/parser.hpp"

// Dataset loading, confusion counting, metric and timing arithmetic, the
// three-dimension query rubric, and preference-pair emission. Scoring is
// contract level throughout: the dataset labels name weaknesses per contract,
// not per entity.

namespace ckg::eval {

struct ManifestEntry {
    std::string path;
    std::string contract_id;
    std::set<std::string> labels;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::string split = "eval";
};

inline DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read manifest: " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error("manifest is not valid JSON: " + path);
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
        throw Error("manifest must be an object with an entries array: " + path);

    DatasetManifest manifest;
    manifest.split = doc.value("split", "eval");
    if (manifest.split != "train" && manifest.split != "eval")
        throw Error("manifest split must be train or eval: " + manifest.split);

    std::set<std::string> valid_cwes;
    for (const prompt::CwePattern& p : prompt::cwe_patterns())
        valid_cwes.insert(p.id);

    std::set<std::string> seen_ids;
    std::size_t index = 0;
    for (const auto& raw : doc["entries"]) {
        if (!raw.is_object() || !raw.contains("path") || !raw["path"].is_string() ||
            !raw.contains("contract_id") || !raw["contract_id"].is_string() ||
            !raw.contains("labels") || !raw["labels"].is_array())
            throw ManifestError("entry must have path, contract_id and labels",
                                index);
        ManifestEntry entry;
        entry.path = raw["path"].get<std::string>();
        entry.contract_id = raw["contract_id"].get<std::string>();
        for (const auto& label : raw["labels"]) {
            if (!label.is_string() || !valid_cwes.count(label.get<std::string>()))
                throw ManifestError("label outside the supported CWE set", index);
            entry.labels.insert(label.get<std::string>());
        }
        if (!seen_ids.insert(entry.contract_id).second)
            throw ManifestError("duplicate contract_id " + entry.contract_id,
                                index);
        if (!std::filesystem::exists(entry.path))
            throw ManifestError("contract path does not exist: " + entry.path,
                                index);
        manifest.entries.push_back(std::move(entry));
        ++index;
    }
    return manifest;
}

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;       // kept out of precision/recall
    std::size_t ignored = 0;  // inconclusive on unlabeled contracts
};

enum class ScoreOutcome {
    TruePositive,
    FalsePositive,
    FalseNegative,
    TrueNegative,
    Ignored
};

// Contract-level scoring. An inconclusive run on a labeled contract is a
// miss; on an unlabeled one it carries no signal and is only recorded.
inline ScoreOutcome score_report(const pipeline::DetectionReport& report,
                                 const std::set<std::string>& labels,
                                 const std::string& eval_cwe) {
    if (report.cwe != eval_cwe) throw CweMismatch(report.cwe, eval_cwe);
    bool labeled = labels.count(eval_cwe) > 0;
    switch (report.verdict) {
    case pipeline::Verdict::Vulnerable:
        return labeled ? ScoreOutcome::TruePositive : ScoreOutcome::FalsePositive;
    case pipeline::Verdict::Clean:
        return labeled ? ScoreOutcome::FalseNegative : ScoreOutcome::TrueNegative;
    default:
        return labeled ? ScoreOutcome::FalseNegative : ScoreOutcome::Ignored;
    }
}

inline void add_outcome(ConfusionCounts& counts, ScoreOutcome outcome) {
    switch (outcome) {
    case ScoreOutcome::TruePositive: ++counts.tp; break;
    case ScoreOutcome::FalsePositive: ++counts.fp; break;
    case ScoreOutcome::FalseNegative: ++counts.fn; break;
    case ScoreOutcome::TrueNegative: ++counts.tn; break;
    case ScoreOutcome::Ignored: ++counts.ignored; break;
    }
}

struct Metrics {
    double precision = 0.0; // percentages, 1 decimal
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;
};

inline double round1(double x) { return std::round(x * 10.0) / 10.0; }

// Percentages are rounded only at the end; f1 is computed from the unrounded
// precision and recall.
inline Metrics aggregate_metrics(const ConfusionCounts& c) {
    Metrics m;
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0) {
        m.degenerate = true;
        return m;
    }
    double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (p + r == 0.0) {
        m.degenerate = true;
        return m;
    }
    m.precision = round1(100.0 * p);
    m.recall = round1(100.0 * r);
    m.f1 = round1(100.0 * 2.0 * p * r / (p + r));
    return m;
}

struct TimingSummary {
    double total_seconds = 0.0;
    std::size_t contract_count = 0;
    double adt_seconds = 0.0; // 1 decimal
    bool degenerate = false;
};

inline TimingSummary timing_from_totals(double total_seconds, std::size_t count) {
    TimingSummary t;
    t.total_seconds = total_seconds;
    t.contract_count = count;
    if (count == 0) {
        t.degenerate = true;
        return t;
    }
    t.adt_seconds = round1(total_seconds / static_cast<double>(count));
    return t;
}

inline TimingSummary timing_summary(const std::vector<pipeline::DetectionReport>& reports) {
    double total = 0.0;
    for (const pipeline::DetectionReport& r : reports) total += r.timings.total;
    return timing_from_totals(total, reports.size());
}

// --- rubric ------------------------------------------------------------------

struct RubricScore {
    double formal_validity = 0.0;
    double semantic_consistency = 0.0;
    double detection_accuracy = 0.0;
    double overall = 0.0;
    std::string rationale;
};

struct ExecOutcome {
    bool executed = false; // execute() returned without throwing
    bool nonempty = false; // at least one result row
    bool relevant = false; // first-column entities typed among the target classes
};

// Deterministic rule core. formal_validity: parses +0.5, executes +0.3,
// non-empty relevant result +0.2. semantic_consistency starts at 1 and loses
// 0.5 for an infeasible query, 0.25 for vocabulary diagnostics, 0.25 for
// filters over variables the patterns never bind. detection_accuracy is
// contract-level agreement. overall is the unweighted mean.
inline RubricScore rubric_score(const std::string& query_text,
                                const ExecOutcome& outcome,
                                const sparql::FeasibilityReport& feasibility,
                                bool labeled,
                                const std::vector<std::string>& finding_entities) {
    RubricScore score;
    std::vector<std::string> notes;

    bool parsed = false;
    std::optional<sparql::QueryAst> ast;
    try {
        ast = sparql::parse_query(query_text);
        parsed = true;
    } catch (const Error& e) {
        notes.push_back(std::string("parse failed: ") + e.what());
    }

    if (parsed) score.formal_validity += 0.5;
    if (outcome.executed) score.formal_validity += 0.3;
    if (outcome.executed && outcome.nonempty && outcome.relevant)
        score.formal_validity += 0.2;

    if (parsed) {
        double consistency = 1.0;
        if (feasibility.status == sparql::Feasibility::Infeasible) {
            consistency -= 0.5;
            notes.push_back("query infeasible against the schema");
        }
        bool vocab_issue = false;
        for (const auto& d : feasibility.diagnostics)
            if (d.message.find("undeclared") != std::string::npos) vocab_issue = true;
        if (vocab_issue) {
            consistency -= 0.25;
            notes.push_back("vocabulary outside the ontology");
        }
        std::set<std::string> bound;
        for (const sparql::Variable& v : ast->bgp_variables()) bound.insert(v.name);
        // EXISTS groups bind their own variables, so only the comparison,
        // regex and bound operands outside them can dangle
        bool dangling = false;
        auto walk = [&](const sparql::FilterExpr& f, auto&& self) -> void {
            if (f.kind == sparql::FilterExpr::Kind::Exists ||
                f.kind == sparql::FilterExpr::Kind::NotExists)
                return;
            for (const sparql::PatternTerm& t : f.operands)
                if (sparql::is_var(t) && !bound.count(sparql::as_var(t).name))
                    dangling = true;
            for (const sparql::FilterExpr& child : f.children) self(child, self);
        };
        for (const auto& f : ast->filters) walk(f, walk);
        if (dangling) {
            consistency -= 0.25;
            notes.push_back("filter references a variable no pattern binds");
        }
        score.semantic_consistency = consistency < 0.0 ? 0.0 : consistency;
    }

    bool predicted = !finding_entities.empty();
    score.detection_accuracy = predicted == labeled ? 1.0 : 0.0;
    notes.push_back(predicted == labeled ? "verdict agrees with label"
                                         : "verdict disagrees with label");

    score.overall = (score.formal_validity + score.semantic_consistency +
                     score.detection_accuracy) /
                    3.0;
    std::string rationale;
    for (const std::string& n : notes) {
        if (!rationale.empty()) rationale += "; ";
        rationale += n;
    }
    score.rationale = rationale;
    return score;
}

// Convenience used by pair generation: execute a query against a graph and
// derive the rubric inputs, including class relevance of the first column.
inline ExecOutcome run_query_outcome(const std::string& query_text,
                                     const rdf::Graph& graph,
                                     const prompt::CwePattern& pattern) {
    ExecOutcome out;
    try {
        sparql::QueryAst ast = sparql::parse_query(query_text);
        sparql::ResultSet rows = sparql::execute(ast, graph);
        out.executed = true;
        out.nonempty = !rows.rows.empty();
        if (out.nonempty) {
            rdf::GraphIndex index(graph);
            std::set<std::string> target(pattern.target_classes.begin(),
                                         pattern.target_classes.end());
            for (const auto& row : rows.rows) {
                if (row.empty() || !std::holds_alternative<rdf::Iri>(row[0]))
                    continue;
                for (const rdf::Term& cls :
                     index.objects(std::get<rdf::Iri>(row[0]),
                                   rdf::rdf_type())) {
                    if (std::holds_alternative<rdf::Iri>(cls) &&
                        target.count(std::get<rdf::Iri>(cls).local_name()))
                        out.relevant = true;
                }
            }
        }
    } catch (const Error&) {
        // unparseable or failing queries keep all outcome flags false
    }
    return out;
}

// --- preference pairs --------------------------------------------------------

struct CandidateRun {
    std::string query;      // extracted query text, may be empty on failure
    std::string completion; // full round-2 reply, the DPO training target
    RubricScore score;
};

struct PreferencePair {
    std::string prompt;
    CandidateRun chosen;
    CandidateRun rejected;
};

struct PairOutcome {
    std::optional<PreferencePair> pair;
    std::string diagnostic; // set when the pair is discarded
};

// Strictly higher overall score wins; exact ties carry no training signal
// and are discarded.
inline PairOutcome make_preference_pair(const std::string& prompt_text,
                                        const CandidateRun& a,
                                        const CandidateRun& b) {
    PairOutcome out;
    if (a.score.overall == b.score.overall) {
        std::ostringstream msg;
        msg << "tie at overall score " << a.score.overall << "; pair discarded";
        out.diagnostic = msg.str();
        return out;
    }
    const CandidateRun& chosen = a.score.overall > b.score.overall ? a : b;
    const CandidateRun& rejected = a.score.overall > b.score.overall ? b : a;
    out.pair = PreferencePair{prompt_text, chosen, rejected};
    return out;
}

// Scores one detection run for pairing. The completion is the raw round-2
// reply; a run whose dialogue never reached round 2 scores with an empty
// query and completion.
inline CandidateRun candidate_from_report(const pipeline::DetectionReport& report,
                                          const rdf::Graph& graph,
                                          const prompt::CwePattern& pattern,
                                          bool labeled) {
    CandidateRun run;
    run.query = report.query_text;
    if (report.transcript.rounds.size() == 2)
        run.completion = report.transcript.rounds[1].reply;
    std::vector<std::string> entities;
    for (const pipeline::DetectionFinding& f : report.findings)
        entities.push_back(f.entity);
    run.score = rubric_score(run.query, run_query_outcome(run.query, graph, pattern),
                             report.feasibility, labeled, entities);
    return run;
}

inline nlohmann::ordered_json pair_to_json(const PreferencePair& pair) {
    nlohmann::ordered_json out;
    out["prompt"] = pair.prompt;
    out["chosen"] = pair.chosen.completion;
    out["rejected"] = pair.rejected.completion;
    return out;
}

inline void write_pairs_jsonl(const std::vector<PreferencePair>& pairs,
                              std::ostream& out) {
    for (const PreferencePair& pair : pairs) out << pair_to_json(pair).dump() << "\n";
}

// --- batch evaluation --------------------------------------------------------

struct EvaluationRun {
    ConfusionCounts counts;
    Metrics metrics;
    TimingSummary timing;
    std::vector<pipeline::DetectionReport> reports;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline EvaluationRun evaluate_manifest(const DatasetManifest& manifest,
                                       const std::string& cwe_id,
                                       const PruneConfig& prune_cfg,
                                       const llm::EndpointConfig& endpoint_cfg) {
    EvaluationRun run;
    for (const ManifestEntry& entry : manifest.entries) {
        pipeline::DetectionReport report = pipeline::detect(
            read_file(entry.path), entry.contract_id, cwe_id, prune_cfg,
            endpoint_cfg);
        add_outcome(run.counts, score_report(report, entry.labels, cwe_id));
        run.reports.push_back(std::move(report));
    }
    run.metrics = aggregate_metrics(run.counts);
    run.timing = timing_summary(run.reports);
    return run;
}

struct PairGeneration {
    std::vector<PreferencePair> pairs;
    std::vector<std::string> diagnostics; // discarded ties, one per entry
};

// Runs every manifest entry once against each endpoint and pairs the two
// runs. With two identical deterministic endpoints every pair ties, so the
// second endpoint is expected to differ (sampled replies, or a second
// fixture directory holding perturbed round-2 replies).
inline PairGeneration generate_pairs(const DatasetManifest& manifest,
                                     const std::string& cwe_id,
                                     const PruneConfig& prune_cfg,
                                     const llm::EndpointConfig& first,
                                     const llm::EndpointConfig& second) {
    const prompt::CwePattern& pattern = prompt::cwe_pattern(cwe_id);
    PairGeneration out;
    for (const ManifestEntry& entry : manifest.entries) {
        std::string source = read_file(entry.path);
        rdf::Graph graph;
        try {
            graph = kg::build_instance(sol::lower_source(source, entry.contract_id))
                        .graph;
        } catch (const Error&) {
            // unbuildable sources still pair; both runs score as never-executed
        }
        pipeline::DetectionReport a =
            pipeline::detect(source, entry.contract_id, cwe_id, prune_cfg, first);
        pipeline::DetectionReport b =
            pipeline::detect(source, entry.contract_id, cwe_id, prune_cfg, second);
        bool labeled = entry.labels.count(cwe_id) > 0;
        CandidateRun run_a = candidate_from_report(a, graph, pattern, labeled);
        CandidateRun run_b = candidate_from_report(b, graph, pattern, labeled);

        // both runs share the round-2 prompt; recover it from whichever
        // transcript got further
        const auto& rounds = a.transcript.rounds.size() >= b.transcript.rounds.size()
                                 ? a.transcript.rounds
                                 : b.transcript.rounds;
        std::string prompt_ref;
        if (!rounds.empty() && !rounds.back().prompt.empty())
            prompt_ref = rounds.back().prompt.back().content;

        PairOutcome outcome = make_preference_pair(prompt_ref, run_a, run_b);
        if (outcome.pair)
            out.pairs.push_back(std::move(*outcome.pair));
        else
            out.diagnostics.push_back(entry.contract_id + ": " + outcome.diagnostic);
    }
    return out;
}

} // namespace ckg::eval
