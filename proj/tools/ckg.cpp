// Command line front end over the toolchain: knowledge graph construction,
// access-control pruning, queries, prompt rendering, detection and
// evaluation. Every subcommand is a thin shell over one library entry point;
// all interesting behavior lives in the headers and their tests.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ckg/ckg.hpp"

namespace {

using namespace ckg;

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// "-" or an empty path writes to stdout.
void spill(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << text;
}

// Guard and authority name lists replace the built-in defaults only when the
// matching flag was given; an omitted flag keeps the defaults.
struct PruneOptions {
    std::vector<std::string> guards;
    std::vector<std::string> guard_builtins;
    std::vector<std::string> authority_vars;
    bool prefix_match = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--guards", guards,
                       "guard modifier names, replaces the defaults")
            ->delimiter(',');
        cmd.add_option("--guard-builtins", guard_builtins,
                       "guard builtin names, replaces the defaults")
            ->delimiter(',');
        cmd.add_option("--authority-vars", authority_vars,
                       "authority state variable names, replaces the defaults")
            ->delimiter(',');
        cmd.add_flag("--prefix-match", prefix_match,
                     "match configured names as prefixes");
    }

    PruneConfig config() const {
        PruneConfig cfg;
        if (!guards.empty())
            cfg.guard_modifier_names = {guards.begin(), guards.end()};
        if (!guard_builtins.empty())
            cfg.guard_builtin_names = {guard_builtins.begin(), guard_builtins.end()};
        if (!authority_vars.empty())
            cfg.authority_var_names = {authority_vars.begin(), authority_vars.end()};
        cfg.prefix_match = prefix_match;
        return cfg;
    }
};

struct EndpointOptions {
    std::string backend = "mock";
    std::string fixtures;
    std::string base_url;
    std::string model = "mock-model";
    std::string api_key_env = "CKG_LLM_API_KEY";
    double temperature = 0.0;
    int retries = 3;
    double timeout = 60.0;
    double rps = 0.0;
    int max_in_flight = 4;

    void attach(CLI::App& cmd) {
        cmd.add_option("--backend", backend, "llm backend")
            ->check(CLI::IsMember({"mock", "http"}))
            ->capture_default_str();
        cmd.add_option("--fixtures", fixtures, "mock reply fixture directory");
        cmd.add_option("--base-url", base_url, "chat-completions base url");
        cmd.add_option("--model", model, "model name")->capture_default_str();
        cmd.add_option("--api-key-env", api_key_env,
                       "environment variable holding the api key")
            ->capture_default_str();
        cmd.add_option("--temperature", temperature, "sampling temperature")
            ->capture_default_str();
        cmd.add_option("--retries", retries, "retry cap for transient failures")
            ->capture_default_str();
        cmd.add_option("--timeout", timeout, "request timeout in seconds")
            ->capture_default_str();
        cmd.add_option("--rps", rps, "request rate cap, 0 disables")
            ->capture_default_str();
        cmd.add_option("--max-in-flight", max_in_flight, "concurrent request cap")
            ->capture_default_str();
    }

    llm::EndpointConfig config() const {
        llm::EndpointConfig cfg;
        cfg.backend = backend == "http" ? llm::Backend::Http : llm::Backend::Mock;
        cfg.fixture_dir = fixtures;
        cfg.base_url = base_url;
        cfg.model_name = model;
        cfg.api_key_ref = api_key_env;
        cfg.temperature = temperature;
        cfg.max_retries = retries;
        cfg.timeout_seconds = timeout;
        cfg.requests_per_second = rps;
        cfg.max_in_flight = max_in_flight;
        return cfg;
    }
};

std::string default_id(const std::string& path) {
    return std::filesystem::path(path).filename().string();
}

rdf::Graph load_graph(const std::string& path) {
    return rdf::parse_ntriples(slurp(path));
}

// Sorted *.sol files of a directory, or the single path itself.
std::vector<std::string> source_paths(const std::string& source) {
    if (!std::filesystem::is_directory(source)) return {source};
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(source))
        if (entry.is_regular_file() && entry.path().extension() == ".sol")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw Error("no .sol files under " + source);
    return paths;
}

void run_build(const std::string& source, const std::string& source_id,
               const std::string& out) {
    std::string id = source_id.empty() ? default_id(source) : source_id;
    kg::InstanceBuild build = kg::build_instance(sol::lower_source(slurp(source), id));
    spill(out, rdf::serialize_ntriples(build.graph));
}

void run_summary(const std::string& kg_path) {
    std::cout << kg::render_summary(kg::summarize_graph(load_graph(kg_path)));
}

void run_prune(const std::string& in, const std::string& out,
               const PruneOptions& prune) {
    rdf::Graph pruned = prune_access_control(load_graph(in), prune.config());
    spill(out, rdf::serialize_ntriples(pruned));
}

void run_query(const std::string& kg_path, const std::string& query_src,
               const std::string& format) {
    sparql::QueryAst ast = sparql::parse_query(slurp(query_src));
    sparql::ResultSet rows = sparql::execute(ast, load_graph(kg_path));
    if (format == "json") {
        for (const auto& row : rows.rows) {
            nlohmann::ordered_json record;
            for (std::size_t i = 0; i < rows.columns.size(); ++i)
                record[rows.columns[i]] = rdf::serialize_term(row[i]);
            std::cout << record.dump() << "\n";
        }
    } else {
        for (std::size_t i = 0; i < rows.columns.size(); ++i)
            std::cout << (i ? "\t" : "") << "?" << rows.columns[i];
        std::cout << "\n";
        for (const auto& row : rows.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                std::cout << (i ? "\t" : "") << rdf::serialize_term(row[i]);
            std::cout << "\n";
        }
    }
    if (rows.truncated) std::cerr << "note: result truncated by LIMIT\n";
}

void run_prompt(const std::string& cwe, const std::string& kg_path, int round,
                const std::string& reply_src) {
    const prompt::CwePattern& pattern = prompt::cwe_pattern(cwe);
    if (round == 1) {
        kg::KgSummary summary = kg::summarize_graph(load_graph(kg_path));
        std::cout << prompt::build_round_one(pattern, kg::ontology(), summary).render();
        return;
    }
    if (reply_src.empty())
        throw Error("round 2 needs --reply with the round-1 reply text");
    std::cout << prompt::build_round_two(slurp(reply_src), pattern, kg::ontology())
                     .render();
}

void run_detect(const std::string& source, const std::string& source_id,
                const std::string& cwe, const std::string& out,
                const PruneOptions& prune, const EndpointOptions& endpoint) {
    PruneConfig prune_cfg = prune.config();
    llm::EndpointConfig endpoint_cfg = endpoint.config();
    if (!std::filesystem::is_directory(source)) {
        std::string id = source_id.empty() ? default_id(source) : source_id;
        pipeline::DetectionReport report =
            pipeline::detect(slurp(source), id, cwe, prune_cfg, endpoint_cfg);
        spill(out, pipeline::to_json(report).dump(2) + "\n");
        return;
    }
    nlohmann::ordered_json reports = nlohmann::ordered_json::array();
    for (const std::string& path : source_paths(source)) {
        pipeline::DetectionReport report = pipeline::detect(
            slurp(path), default_id(path), cwe, prune_cfg, endpoint_cfg);
        reports.push_back(pipeline::to_json(report));
    }
    spill(out, reports.dump(2) + "\n");
}

const char* outcome_name(eval::ScoreOutcome o) {
    switch (o) {
    case eval::ScoreOutcome::TruePositive: return "TP";
    case eval::ScoreOutcome::FalsePositive: return "FP";
    case eval::ScoreOutcome::FalseNegative: return "FN";
    case eval::ScoreOutcome::TrueNegative: return "TN";
    default: return "ignored";
    }
}

void run_eval(const std::string& manifest_path, const std::string& cwe,
              const PruneOptions& prune, const EndpointOptions& endpoint) {
    eval::DatasetManifest manifest = eval::load_manifest(manifest_path);
    eval::EvaluationRun run = eval::evaluate_manifest(manifest, cwe, prune.config(),
                                                      endpoint.config());

    std::cout << std::left << std::setw(32) << "contract" << std::setw(14)
              << "verdict" << "outcome\n";
    for (std::size_t i = 0; i < run.reports.size(); ++i) {
        const pipeline::DetectionReport& report = run.reports[i];
        eval::ScoreOutcome o =
            eval::score_report(report, manifest.entries[i].labels, cwe);
        std::cout << std::left << std::setw(32) << report.contract_id
                  << std::setw(14) << pipeline::to_string(report.verdict)
                  << outcome_name(o) << "\n";
    }

    const eval::ConfusionCounts& c = run.counts;
    std::cout << "\ntp " << c.tp << "  fp " << c.fp << "  fn " << c.fn << "  tn "
              << c.tn << "  ignored " << c.ignored << "\n";
    if (run.metrics.degenerate) {
        std::cout << "metrics   degenerate (no positive predictions or no "
                     "labeled positives)\n";
    } else {
        std::cout << std::fixed << std::setprecision(1);
        std::cout << "precision " << run.metrics.precision << "\n";
        std::cout << "recall    " << run.metrics.recall << "\n";
        std::cout << "f1        " << run.metrics.f1 << "\n";
    }
    std::cout << "contracts " << run.timing.contract_count << "\n";
    std::cout << std::fixed << std::setprecision(3) << "total_s   "
              << run.timing.total_seconds << "\n";
    if (run.timing.degenerate)
        std::cout << "adt_s     n/a\n";
    else
        std::cout << std::fixed << std::setprecision(1) << "adt_s     "
                  << run.timing.adt_seconds << "\n";
}

void run_gen_pairs(const std::string& manifest_path, const std::string& cwe,
                   const std::string& out, const std::string& fixtures_b,
                   const PruneOptions& prune, const EndpointOptions& endpoint) {
    eval::DatasetManifest manifest = eval::load_manifest(manifest_path);
    llm::EndpointConfig first = endpoint.config();
    llm::EndpointConfig second = first;
    if (!fixtures_b.empty()) second.fixture_dir = fixtures_b;

    eval::PairGeneration gen =
        eval::generate_pairs(manifest, cwe, prune.config(), first, second);
    std::ostringstream lines;
    eval::write_pairs_jsonl(gen.pairs, lines);
    spill(out, lines.str());
    for (const std::string& d : gen.diagnostics) std::cerr << "discarded: " << d << "\n";
    std::cerr << gen.pairs.size() << " pairs written, " << gen.diagnostics.size()
              << " discarded\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"contract knowledge graph toolchain"};
    app.require_subcommand(1);

    std::string source, source_id, kg_path, in_path, out_path, query_src;
    std::string cwe, reply_src, manifest_path, fixtures_b, format = "tsv";
    int round = 1;
    PruneOptions prune;
    EndpointOptions endpoint;

    CLI::App* build = app.add_subcommand("build", "lower a contract to its knowledge graph");
    build->add_option("--source", source, "Solidity source file")->required();
    build->add_option("--source-id", source_id, "contract id, defaults to the file name");
    build->add_option("--out", out_path, "output N-Triples path, - for stdout");
    build->callback([&] { run_build(source, source_id, out_path); });

    CLI::App* summary = app.add_subcommand("summary", "print the entry-point summary of a graph");
    summary->add_option("--kg", kg_path, "N-Triples knowledge graph")->required();
    summary->callback([&] { run_summary(kg_path); });

    CLI::App* prune_cmd = app.add_subcommand("prune", "keep the access-control subgraph");
    prune_cmd->add_option("--in", in_path, "input N-Triples path")->required();
    prune_cmd->add_option("--out", out_path, "output N-Triples path, - for stdout");
    prune.attach(*prune_cmd);
    prune_cmd->callback([&] { run_prune(in_path, out_path, prune); });

    CLI::App* query = app.add_subcommand("query", "run a query against a graph");
    query->add_option("--kg", kg_path, "N-Triples knowledge graph")->required();
    query->add_option("--query", query_src, "query file, - for stdin")->required();
    query->add_option("--format", format, "row format")
        ->check(CLI::IsMember({"tsv", "json"}))
        ->capture_default_str();
    query->callback([&] { run_query(kg_path, query_src, format); });

    CLI::App* prompt_cmd = app.add_subcommand("prompt", "render a detection prompt");
    prompt_cmd->add_option("--cwe", cwe, "weakness id, e.g. CWE-862")->required();
    prompt_cmd->add_option("--kg", kg_path, "N-Triples knowledge graph, ideally pruned")
        ->required();
    prompt_cmd->add_option("--round", round, "dialogue round")
        ->check(CLI::Range(1, 2))
        ->capture_default_str();
    prompt_cmd->add_option("--reply", reply_src, "round-1 reply file, - for stdin");
    prompt_cmd->callback([&] { run_prompt(cwe, kg_path, round, reply_src); });

    CLI::App* detect = app.add_subcommand("detect", "run the full detection loop");
    detect->add_option("--source", source, "Solidity file or directory of .sol files")
        ->required();
    detect->add_option("--source-id", source_id, "contract id for a single file");
    detect->add_option("--cwe", cwe, "weakness id")->required();
    detect->add_option("--out", out_path, "report path, - for stdout");
    prune.attach(*detect);
    endpoint.attach(*detect);
    detect->callback(
        [&] { run_detect(source, source_id, cwe, out_path, prune, endpoint); });

    CLI::App* eval_cmd = app.add_subcommand("eval", "score a labeled manifest");
    eval_cmd->add_option("--manifest", manifest_path, "dataset manifest")->required();
    eval_cmd->add_option("--cwe", cwe, "weakness id")->required();
    prune.attach(*eval_cmd);
    endpoint.attach(*eval_cmd);
    eval_cmd->callback([&] { run_eval(manifest_path, cwe, prune, endpoint); });

    CLI::App* pairs = app.add_subcommand("gen-pairs", "emit preference pairs as JSONL");
    pairs->add_option("--manifest", manifest_path, "dataset manifest")->required();
    pairs->add_option("--cwe", cwe, "weakness id")->required();
    pairs->add_option("--out", out_path, "JSONL path, - for stdout");
    pairs->add_option("--fixtures-b", fixtures_b,
                      "fixture directory for the second run of each contract");
    prune.attach(*pairs);
    endpoint.attach(*pairs);
    pairs->callback([&] {
        run_gen_pairs(manifest_path, cwe, out_path, fixtures_b, prune, endpoint);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
