#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ckg/eval/harness.hpp"
#include "support/planted.hpp"

using namespace ckg;
using namespace ckg::eval;

namespace {

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

const kg::InstanceBuild& vuln_build() {
    static kg::InstanceBuild b =
        kg::build_instance(sol::lower_source(planted::kVulnerable, "vuln.sol"));
    return b;
}

const kg::KgSummary& vuln_summary() {
    static kg::KgSummary s = kg::summarize_graph(vuln_build().graph);
    return s;
}

const prompt::CwePattern& pattern862() { return prompt::cwe_pattern("CWE-862"); }

// The final query planted for the Door contract, as extract_sparql returns it.
const char* kGoodQuery =
    "PREFIX ckg: <http://ckg.dev/ontology#> "
    "SELECT DISTINCT ?fn WHERE { "
    "?fn a ckg:Function . "
    "?fn ckg:visibilityIs ?vis . "
    "?fn ckg:hasStatement ?st . "
    "?st ckg:writesVar ?var . "
    "?var ckg:nameIs \"owner\" . "
    "FILTER(?vis = \"public\" || ?vis = \"external\") "
    "FILTER NOT EXISTS { ?fn ckg:appliesModifier ?m } }";

sparql::FeasibilityReport feas(const std::string& query) {
    return sparql::validate_feasibility(sparql::parse_query(query), kg::ontology(),
                                        vuln_summary());
}

// Scores a query the way the pair generator does: execute against the Door
// graph, validate against its summary, then apply the rubric.
RubricScore score_query(const std::string& query, bool labeled,
                        const std::vector<std::string>& entities) {
    sparql::FeasibilityReport report;
    try {
        report = feas(query);
    } catch (const Error&) {
        // unparseable queries never reach the checker in the pipeline
    }
    return rubric_score(query, run_query_outcome(query, vuln_build().graph, pattern862()),
                        report, labeled, entities);
}

struct TempDir {
    std::filesystem::path dir;

    explicit TempDir(const std::string& name)
        : dir(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }

    std::string file(const std::string& name, const std::string& content) const {
        std::filesystem::path p = dir / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p.string();
    }
};

nlohmann::json manifest_entry(const std::string& path, const std::string& id,
                              const std::vector<std::string>& labels) {
    nlohmann::json e;
    e["path"] = path;
    e["contract_id"] = id;
    e["labels"] = labels;
    return e;
}

nlohmann::json manifest_doc(const std::vector<nlohmann::json>& entries,
                            const char* split = nullptr) {
    nlohmann::json doc;
    doc["entries"] = entries;
    if (split) doc["split"] = split;
    return doc;
}

template <class Fn>
std::string thrown_text(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return "<no throw>";
}

} // namespace

TEST_CASE("published precision, recall and f1 rows reproduce in under a millisecond") {
    struct Row {
        std::size_t tp, fp, fn;
        double precision, recall, f1;
    };
    const Row rows[] = {
        {276, 223, 180, 55.3, 60.5, 57.8},
        {348, 128, 105, 73.1, 76.8, 74.9},
        {314, 197, 134, 61.4, 70.1, 65.5},
    };
    for (const Row& row : rows) {
        ConfusionCounts c;
        c.tp = row.tp;
        c.fp = row.fp;
        c.fn = row.fn;
        auto t0 = std::chrono::steady_clock::now();
        Metrics m = aggregate_metrics(c);
        auto t1 = std::chrono::steady_clock::now();
        CHECK(m.precision == row.precision);
        CHECK(m.recall == row.recall);
        CHECK(m.f1 == row.f1);
        CHECK_FALSE(m.degenerate);
        CHECK(std::chrono::duration<double, std::milli>(t1 - t0).count() < 1.0);
    }
}

TEST_CASE("average detection time rows reproduce from totals") {
    struct Row {
        double total;
        std::size_t count;
        double adt;
    };
    const Row rows[] = {
        {6248.0, 553, 11.3},
        {7442.0, 553, 13.5},
        {8754.0, 553, 15.8},
    };
    for (const Row& row : rows) {
        TimingSummary t = timing_from_totals(row.total, row.count);
        CHECK(t.adt_seconds == row.adt);
        CHECK(t.total_seconds == row.total);
        CHECK(t.contract_count == row.count);
        CHECK_FALSE(t.degenerate);
    }
}

TEST_CASE("one-sided or empty confusion counts degenerate instead of dividing by zero") {
    ConfusionCounts no_positives; // tp+fp == 0
    no_positives.fn = 5;
    CHECK(aggregate_metrics(no_positives).degenerate);

    ConfusionCounts no_labeled; // tp+fn == 0
    no_labeled.fp = 5;
    CHECK(aggregate_metrics(no_labeled).degenerate);

    ConfusionCounts all_wrong; // p and r both exactly zero
    all_wrong.fp = 3;
    all_wrong.fn = 4;
    Metrics m = aggregate_metrics(all_wrong);
    CHECK(m.degenerate);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);

    CHECK(aggregate_metrics(ConfusionCounts{}).degenerate);

    TimingSummary t = timing_from_totals(12.0, 0);
    CHECK(t.degenerate);
    CHECK(t.adt_seconds == 0.0);
}

TEST_CASE("rounding happens once at the end, half away from zero") {
    CHECK(round1(11.25) == 11.3);
    CHECK(round1(11.249) == 11.2);
    CHECK(round1(0.05) == 0.1);
    CHECK(round1(-0.05) == -0.1);
    CHECK(round1(2.0) == 2.0);

    // f1 from rounded percentages would give 15.3 here; the unrounded
    // precision and recall give 2/13 = 15.38..., which rounds to 15.4
    ConfusionCounts c;
    c.tp = 1;
    c.fn = 11;
    Metrics m = aggregate_metrics(c);
    CHECK(m.precision == 100.0);
    CHECK(m.recall == 8.3);
    CHECK(m.f1 == 15.4);
}

TEST_CASE("score_report maps verdict and label onto the confusion cell") {
    std::set<std::string> labeled = {"CWE-862"};
    std::set<std::string> unlabeled;

    pipeline::DetectionReport rep;
    rep.cwe = "CWE-862";

    rep.verdict = pipeline::Verdict::Vulnerable;
    CHECK(score_report(rep, labeled, "CWE-862") == ScoreOutcome::TruePositive);
    CHECK(score_report(rep, unlabeled, "CWE-862") == ScoreOutcome::FalsePositive);

    rep.verdict = pipeline::Verdict::Clean;
    CHECK(score_report(rep, labeled, "CWE-862") == ScoreOutcome::FalseNegative);
    CHECK(score_report(rep, unlabeled, "CWE-862") == ScoreOutcome::TrueNegative);

    rep.verdict = pipeline::Verdict::Inconclusive;
    CHECK(score_report(rep, labeled, "CWE-862") == ScoreOutcome::FalseNegative);
    CHECK(score_report(rep, unlabeled, "CWE-862") == ScoreOutcome::Ignored);

    // a label for a different weakness does not make the contract positive
    std::set<std::string> other_label = {"CWE-269"};
    rep.verdict = pipeline::Verdict::Vulnerable;
    CHECK(score_report(rep, other_label, "CWE-862") == ScoreOutcome::FalsePositive);
}

TEST_CASE("score_report rejects a report for a different weakness") {
    pipeline::DetectionReport rep;
    rep.cwe = "CWE-284";
    try {
        score_report(rep, {}, "CWE-862");
        FAIL("expected CweMismatch");
    } catch (const CweMismatch& e) {
        CHECK(contains(e.what(), "report targets CWE-284"));
        CHECK(contains(e.what(), "evaluation is for CWE-862"));
    }
}

TEST_CASE("add_outcome routes each outcome to its counter") {
    ConfusionCounts c;
    add_outcome(c, ScoreOutcome::TruePositive);
    add_outcome(c, ScoreOutcome::FalsePositive);
    add_outcome(c, ScoreOutcome::FalseNegative);
    add_outcome(c, ScoreOutcome::TrueNegative);
    add_outcome(c, ScoreOutcome::Ignored);
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.tn == 1);
    CHECK(c.ignored == 1);
}

TEST_CASE("a well-formed manifest loads entries, labels and split") {
    TempDir tmp("ckg_eval_manifest_ok");
    std::string a = tmp.file("a.sol", "contract A {}");
    std::string b = tmp.file("b.sol", "contract B {}");

    std::string path = tmp.file(
        "manifest.json",
        manifest_doc({manifest_entry(a, "a.sol", {"CWE-862", "CWE-269"}),
                      manifest_entry(b, "b.sol", {})},
                     "train")
            .dump());
    DatasetManifest m = load_manifest(path);
    CHECK(m.split == "train");
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].contract_id == "a.sol");
    CHECK(m.entries[0].labels == std::set<std::string>{"CWE-269", "CWE-862"});
    CHECK(m.entries[1].labels.empty());

    // split defaults to eval when absent
    std::string defaulted = tmp.file(
        "defaulted.json", manifest_doc({manifest_entry(a, "a2", {})}).dump());
    CHECK(load_manifest(defaulted).split == "eval");
}

TEST_CASE("manifest structural errors are reported before any entry") {
    TempDir tmp("ckg_eval_manifest_bad");

    CHECK(contains(thrown_text([&] { load_manifest((tmp.dir / "gone.json").string()); }),
                   "cannot read manifest"));
    CHECK(contains(thrown_text([&] { load_manifest(tmp.file("syntax.json", "{nope")); }),
                   "not valid JSON"));
    CHECK(contains(thrown_text([&] { load_manifest(tmp.file("array.json", "[]")); }),
                   "must be an object with an entries array"));
    CHECK(contains(
        thrown_text([&] { load_manifest(tmp.file("empty.json", "{\"split\":\"eval\"}")); }),
        "must be an object with an entries array"));

    std::string bad_split = tmp.file(
        "split.json", manifest_doc({}, "test").dump());
    CHECK(contains(thrown_text([&] { load_manifest(bad_split); }),
                   "split must be train or eval"));
}

TEST_CASE("manifest entry errors carry the failing entry index") {
    TempDir tmp("ckg_eval_manifest_entries");
    std::string a = tmp.file("a.sol", "contract A {}");
    nlohmann::json ok = manifest_entry(a, "a.sol", {"CWE-862"});

    auto expect_entry_error = [&](const nlohmann::json& doc, const std::string& needle,
                                  std::size_t index) {
        std::string path = tmp.file("case.json", doc.dump());
        try {
            load_manifest(path);
            FAIL_CHECK("expected ManifestError for ", needle);
        } catch (const ManifestError& e) {
            CHECK(contains(e.what(), needle));
            CHECK(e.entry_index == index);
        }
    };

    nlohmann::json missing_labels;
    missing_labels["path"] = a;
    missing_labels["contract_id"] = "b.sol";
    expect_entry_error(manifest_doc({ok, missing_labels}),
                       "must have path, contract_id and labels", 1);

    expect_entry_error(manifest_doc({manifest_entry(a, "b.sol", {"CWE-79"})}),
                       "label outside the supported CWE set", 0);

    nlohmann::json numeric_label = manifest_entry(a, "b.sol", {});
    numeric_label["labels"].push_back(42);
    expect_entry_error(manifest_doc({ok, numeric_label}),
                       "label outside the supported CWE set", 1);

    expect_entry_error(
        manifest_doc({ok, manifest_entry(a, "a.sol", {})}),
        "duplicate contract_id a.sol", 1);

    expect_entry_error(
        manifest_doc({ok, manifest_entry((tmp.dir / "ghost.sol").string(), "g", {})}),
        "contract path does not exist", 1);
}

TEST_CASE("a feasible hit with relevant results earns a perfect rubric score") {
    RubricScore s = score_query(kGoodQuery, true,
                                {"urn:ckg:vuln.sol:Door.setOwner(address)"});
    CHECK(s.formal_validity == 1.0);
    CHECK(s.semantic_consistency == 1.0);
    CHECK(s.detection_accuracy == 1.0);
    CHECK(s.overall == 1.0);
    CHECK(s.rationale == "verdict agrees with label");
}

TEST_CASE("an unparseable query scores zero across the rubric") {
    RubricScore s = score_query("SELECT WHERE {", true, {});
    CHECK(s.formal_validity == 0.0);
    CHECK(s.semantic_consistency == 0.0);
    CHECK(s.detection_accuracy == 0.0);
    CHECK(s.overall == 0.0);
    CHECK(contains(s.rationale, "parse failed: "));
    CHECK(contains(s.rationale, "; verdict disagrees with label"));
}

TEST_CASE("consistency deductions are itemized and floor at zero") {
    // type conflict: infeasible without any undeclared-vocabulary diagnostic
    RubricScore conflict = score_query(
        "SELECT ?s WHERE { ?c ckg:hasFunction ?s . ?c2 ckg:hasStatement ?s }", false, {});
    CHECK(conflict.semantic_consistency == 0.5);
    CHECK(conflict.formal_validity == 0.8); // parses and runs, result is empty
    CHECK(conflict.rationale ==
          "query infeasible against the schema; verdict agrees with label");

    // advisory vocabulary issue only: the property hides inside NOT EXISTS
    RubricScore vocab = score_query(
        "SELECT ?f WHERE { ?f a ckg:Function . FILTER NOT EXISTS { ?f ckg:frobs ?x } }",
        true, {"urn:ckg:vuln.sol:Door.setOwner(address)"});
    CHECK(vocab.semantic_consistency == 0.75);
    CHECK(vocab.formal_validity == 1.0);
    CHECK(contains(vocab.rationale, "vocabulary outside the ontology"));
    CHECK_FALSE(contains(vocab.rationale, "infeasible"));

    // both deductions at once
    RubricScore both = score_query("SELECT ?f WHERE { ?f ckg:frobs ?x }", false, {});
    CHECK(both.semantic_consistency == 0.25);
    CHECK(contains(both.rationale, "query infeasible against the schema"));
    CHECK(contains(both.rationale, "vocabulary outside the ontology"));

    // a dangling variable inside a connective is still found
    RubricScore dangling = score_query(
        "SELECT ?fn WHERE { ?fn a ckg:Function . ?fn ckg:visibilityIs ?vis . "
        "FILTER(?vis = \"public\" || ?ghost = 3) }",
        true, {"urn:ckg:vuln.sol:Door.setOwner(address)"});
    CHECK(dangling.semantic_consistency == 0.75);
    CHECK(contains(dangling.rationale, "filter references a variable no pattern binds"));
    CHECK(dangling.formal_validity == 1.0); // the true branch shields the error

    // all three deductions together exhaust the budget exactly
    RubricScore floor = score_query(
        "SELECT ?f WHERE { ?f ckg:frobs ?x . FILTER(?ghost = 1) }", false, {});
    CHECK(floor.semantic_consistency == 0.0);
    CHECK(contains(floor.rationale, "infeasible"));
    CHECK(contains(floor.rationale, "vocabulary"));
    CHECK(contains(floor.rationale, "no pattern binds"));
}

TEST_CASE("exists groups bind their own variables for the dangling check") {
    RubricScore s = score_query(
        "SELECT ?f WHERE { ?f a ckg:Function . "
        "FILTER EXISTS { ?f ckg:appliesModifier ?m } }",
        false, {});
    CHECK(s.semantic_consistency == 1.0);
    CHECK_FALSE(contains(s.rationale, "no pattern binds"));
}

TEST_CASE("detection accuracy is contract-level agreement") {
    // empty findings on an unlabeled contract agree
    RubricScore clean = score_query(kGoodQuery, false, {});
    CHECK(clean.detection_accuracy == 1.0);

    // findings on an unlabeled contract disagree
    RubricScore noisy = score_query(kGoodQuery, false, {"urn:ckg:x"});
    CHECK(noisy.detection_accuracy == 0.0);
    CHECK(contains(noisy.rationale, "verdict disagrees with label"));

    // empty findings on a labeled contract disagree
    RubricScore miss = score_query(kGoodQuery, true, {});
    CHECK(miss.detection_accuracy == 0.0);
}

TEST_CASE("run_query_outcome reports execution, emptiness and class relevance") {
    const rdf::Graph& g = vuln_build().graph;
    const prompt::CwePattern& p = pattern862();

    ExecOutcome good = run_query_outcome(kGoodQuery, g, p);
    CHECK(good.executed);
    CHECK(good.nonempty);
    CHECK(good.relevant);

    ExecOutcome vars = run_query_outcome(
        "SELECT ?v WHERE { ?v a ckg:StateVar }", g, p);
    CHECK(vars.relevant); // StateVar is also a target class

    ExecOutcome off_target = run_query_outcome(
        "SELECT ?st WHERE { ?s ckg:hasStatement ?st }", g, p);
    CHECK(off_target.executed);
    CHECK(off_target.nonempty);
    CHECK_FALSE(off_target.relevant);

    ExecOutcome literal_col = run_query_outcome(
        "SELECT ?n ?v WHERE { ?v a ckg:StateVar . ?v ckg:nameIs ?n }", g, p);
    CHECK(literal_col.nonempty);
    CHECK_FALSE(literal_col.relevant); // only the first column counts

    ExecOutcome empty = run_query_outcome(
        "SELECT ?m WHERE { ?m a ckg:Modifier }", g, p);
    CHECK(empty.executed);
    CHECK_FALSE(empty.nonempty);
    CHECK_FALSE(empty.relevant);

    ExecOutcome unparseable = run_query_outcome("SELECT", g, p);
    CHECK_FALSE(unparseable.executed);

    ExecOutcome throwing = run_query_outcome(
        "SELECT ?f WHERE { ?f a ckg:Function . FILTER(?f < 3) }", g, p);
    CHECK_FALSE(throwing.executed);
    CHECK_FALSE(throwing.nonempty);
}

TEST_CASE("preference pairs keep the strictly better candidate") {
    CandidateRun strong;
    strong.query = "q-strong";
    strong.completion = "c-strong";
    strong.score.overall = 0.9;
    CandidateRun weak;
    weak.query = "q-weak";
    weak.completion = "c-weak";
    weak.score.overall = 0.4;

    for (const auto& [a, b] : {std::pair{strong, weak}, std::pair{weak, strong}}) {
        PairOutcome out = make_preference_pair("the prompt", a, b);
        REQUIRE(out.pair.has_value());
        CHECK(out.diagnostic.empty());
        CHECK(out.pair->prompt == "the prompt");
        CHECK(out.pair->chosen.completion == "c-strong");
        CHECK(out.pair->rejected.completion == "c-weak");
        CHECK(out.pair->chosen.score.overall > out.pair->rejected.score.overall);
    }
}

TEST_CASE("an exact tie is discarded with a diagnostic") {
    CandidateRun a, b;
    a.score.overall = 0.5;
    b.score.overall = 0.5;
    PairOutcome out = make_preference_pair("p", a, b);
    CHECK_FALSE(out.pair.has_value());
    CHECK(out.diagnostic == "tie at overall score 0.5; pair discarded");
}

TEST_CASE("pairs serialize to prompt, chosen, rejected json lines") {
    CandidateRun chosen;
    chosen.completion = "winning reply";
    chosen.score.overall = 1.0;
    CandidateRun rejected;
    rejected.completion = "losing reply";
    rejected.score.overall = 0.2;
    PreferencePair pair{"ask me", chosen, rejected};

    nlohmann::ordered_json j = pair_to_json(pair);
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    CHECK(keys == std::vector<std::string>{"prompt", "chosen", "rejected"});
    CHECK(j["prompt"] == "ask me");
    CHECK(j["chosen"] == "winning reply");
    CHECK(j["rejected"] == "losing reply");

    std::ostringstream out;
    write_pairs_jsonl({pair, pair}, out);
    std::istringstream lines(out.str());
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
        nlohmann::json parsed = nlohmann::json::parse(line);
        CHECK(parsed["chosen"] == "winning reply");
        ++count;
    }
    CHECK(count == 2);
    CHECK(out.str().back() == '\n');
}

TEST_CASE("a planted manifest evaluates end to end") {
    planted::DetectHarness h("ckg_eval_e2e");
    h.plant(planted::kVulnerable, "vuln.sol", "CWE-862", planted::kReply1,
            planted::kReply2);
    h.plant(planted::kGuarded, "guarded.sol", "CWE-862", planted::kReply1,
            planted::kReply2);

    TempDir data("ckg_eval_e2e_data");
    std::string vuln = data.file("vuln.sol", planted::kVulnerable);
    std::string guarded = data.file("guarded.sol", planted::kGuarded);
    std::string broken_labeled = data.file("broken1.sol", "contract {");
    std::string broken_unlabeled = data.file("broken2.sol", "contract {");

    std::string path = data.file(
        "manifest.json",
        manifest_doc({manifest_entry(vuln, "vuln.sol", {"CWE-862"}),
                      manifest_entry(guarded, "guarded.sol", {}),
                      manifest_entry(broken_labeled, "broken1.sol", {"CWE-862"}),
                      manifest_entry(broken_unlabeled, "broken2.sol", {})})
            .dump());

    EvaluationRun run = evaluate_manifest(load_manifest(path), "CWE-862",
                                          h.prune_cfg, h.endpoint);
    CHECK(run.counts.tp == 1);
    CHECK(run.counts.tn == 1);
    CHECK(run.counts.fn == 1); // inconclusive on a labeled contract is a miss
    CHECK(run.counts.ignored == 1);
    CHECK(run.counts.fp == 0);

    CHECK(run.metrics.precision == 100.0);
    CHECK(run.metrics.recall == 50.0);
    CHECK(run.metrics.f1 == 66.7);
    CHECK_FALSE(run.metrics.degenerate);

    CHECK(run.timing.contract_count == 4);
    CHECK(run.timing.total_seconds >= 0.0);
    REQUIRE(run.reports.size() == 4);
    CHECK(run.reports[0].verdict == pipeline::Verdict::Vulnerable);
    CHECK(run.reports[1].verdict == pipeline::Verdict::Clean);
    CHECK(run.reports[2].verdict == pipeline::Verdict::Inconclusive);
}

TEST_CASE("generate_pairs runs each entry against both endpoints and pairs them") {
    planted::DetectHarness first("ckg_eval_gen_a");
    first.plant(planted::kVulnerable, "vuln.sol", "CWE-862", planted::kReply1,
                planted::kReply2);
    planted::DetectHarness second("ckg_eval_gen_b");
    second.plant(planted::kVulnerable, "vuln.sol", "CWE-862", planted::kReply1,
                 "```sparql\nSELECT ?x WHERE { ?x ?p }\n```\n");

    TempDir data("ckg_eval_gen_data");
    std::string vuln = data.file("vuln.sol", planted::kVulnerable);
    DatasetManifest manifest = load_manifest(data.file(
        "manifest.json",
        manifest_doc({manifest_entry(vuln, "vuln.sol", {"CWE-862"})}).dump()));

    PairGeneration gen = generate_pairs(manifest, "CWE-862", first.prune_cfg,
                                        first.endpoint, second.endpoint);
    REQUIRE(gen.pairs.size() == 1);
    CHECK(gen.diagnostics.empty());
    CHECK(gen.pairs[0].chosen.completion == planted::kReply2);
    CHECK(gen.pairs[0].chosen.score.overall == 1.0);
    CHECK(gen.pairs[0].rejected.score.overall == 0.0);
    // the prompt reference is the round-2 user turn both runs answered
    CHECK(contains(gen.pairs[0].prompt, "## Instructions"));
    CHECK(contains(gen.pairs[0].prompt, planted::kReply1));

    // the same endpoint twice ties everywhere and emits only diagnostics
    PairGeneration tied = generate_pairs(manifest, "CWE-862", first.prune_cfg,
                                         first.endpoint, first.endpoint);
    CHECK(tied.pairs.empty());
    REQUIRE(tied.diagnostics.size() == 1);
    CHECK(contains(tied.diagnostics[0], "vuln.sol: tie at overall score"));
}

TEST_CASE("fifty perturbed second rounds all produce strictly ordered pairs") {
    const prompt::CwePattern& pattern = pattern862();
    std::string prompt_text =
        prompt::build_round_two(planted::kReply1, pattern, kg::ontology()).render();

    auto to_candidate = [&](const pipeline::DetectionReport& r) {
        return candidate_from_report(r, vuln_build().graph, pattern, /*labeled=*/true);
    };

    planted::DetectHarness good("ckg_eval_pairs_good");
    good.plant(planted::kVulnerable, "vuln.sol", "CWE-862", planted::kReply1,
               planted::kReply2);
    CandidateRun good_run =
        to_candidate(good.run(planted::kVulnerable, "vuln.sol", "CWE-862"));
    CHECK(good_run.score.overall == 1.0);

    auto perturbed_reply = [](int i) {
        std::string n = std::to_string(i);
        switch (i % 3) {
        case 0: // vocabulary outside the ontology, infeasible
            return "```sparql\nSELECT ?f WHERE { ?f ckg:frobs" + n + " ?x }\n```\n";
        case 1: // syntactically broken final query
            return "```sparql\nSELECT ?x" + n + " WHERE { ?x" + n + " ?p }\n```\n";
        default: // filter over a variable no pattern binds, fails at run time
            return "```sparql\nSELECT ?fn WHERE { ?fn a ckg:Function . FILTER(?g" +
                   n + " = 1) }\n```\n";
        }
    };

    std::vector<PreferencePair> pairs;
    std::set<double> rejected_scores;
    for (int i = 0; i < 50; ++i) {
        planted::DetectHarness bad("ckg_eval_pairs_" + std::to_string(i));
        std::string reply = perturbed_reply(i);
        bad.plant(planted::kVulnerable, "vuln.sol", "CWE-862", planted::kReply1, reply);
        CandidateRun bad_run =
            to_candidate(bad.run(planted::kVulnerable, "vuln.sol", "CWE-862"));

        PairOutcome out = i % 2 == 0
                              ? make_preference_pair(prompt_text, good_run, bad_run)
                              : make_preference_pair(prompt_text, bad_run, good_run);
        REQUIRE(out.pair.has_value());
        CHECK(out.pair->chosen.score.overall > out.pair->rejected.score.overall);
        CHECK(out.pair->chosen.completion == planted::kReply2);
        CHECK(out.pair->rejected.completion == reply);
        rejected_scores.insert(out.pair->rejected.score.overall);
        pairs.push_back(*out.pair);
    }
    CHECK(pairs.size() == 50);
    CHECK(rejected_scores.size() == 3); // each perturbation family scores differently

    std::ostringstream jsonl;
    write_pairs_jsonl(pairs, jsonl);
    std::size_t lines = 0;
    std::istringstream in(jsonl.str());
    for (std::string line; std::getline(in, line);) {
        CHECK(nlohmann::json::parse(line)["chosen"] == planted::kReply2);
        ++lines;
    }
    CHECK(lines == 50);
}
