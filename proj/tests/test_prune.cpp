#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ckg/kg/conformance.hpp"
#include "ckg/kg/instance.hpp"
#include "ckg/prune.hpp"
#include "ckg/rdf/ntriples.hpp"
#include "ckg/sol/ir.hpp"
#include "support/generators.hpp"

using namespace ckg;

namespace {

namespace fs = std::filesystem;

std::vector<fs::path> fixture_paths() {
    std::vector<fs::path> out;
    for (const auto& entry :
         fs::directory_iterator(fs::path(CKG_REPO_DIR) / "tests/fixtures/contracts"))
        if (entry.path().extension() == ".sol") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

rdf::Graph instance_graph(const std::string& src, const std::string& sid) {
    return kg::build_instance(sol::lower_source(src, sid)).graph;
}

// Triples present in `a` but not in `b`, serialized for readable diffs.
std::string diff(const rdf::Graph& a, const rdf::Graph& b) {
    std::string out;
    for (const rdf::Triple& t : a.triples())
        if (!b.contains(t))
            out += rdf::serialize_triple(t) + "\n";
    return out;
}

bool subset(const rdf::Graph& inner, const rdf::Graph& outer) {
    for (const rdf::Triple& t : inner.triples())
        if (!outer.contains(t)) return false;
    return true;
}

} // namespace

TEST_CASE("fixture corpus prunes identically to the reference evaluation") {
    std::vector<fs::path> fixtures = fixture_paths();
    REQUIRE(fixtures.size() >= 20);
    PruneConfig cfg;
    for (const fs::path& p : fixtures) {
        CAPTURE(p.filename().string());
        rdf::Graph g = instance_graph(slurp(p), p.filename().string());

        rdf::Graph pruned = prune_access_control(g, cfg);
        rdf::Graph expected = testsupport::oracle_prune(g, cfg);
        std::string missing = diff(expected, pruned);
        std::string extra = diff(pruned, expected);
        CHECK_MESSAGE(missing.empty(), "missing from pruned:\n", missing);
        CHECK_MESSAGE(extra.empty(), "extra in pruned:\n", extra);
    }
}

TEST_CASE("fixture corpus conforms to the schema and round-trips") {
    for (const fs::path& p : fixture_paths()) {
        CAPTURE(p.filename().string());
        rdf::Graph g = instance_graph(slurp(p), p.filename().string());
        auto violations = kg::check_conformance(g);
        std::string report;
        for (const auto& v : violations)
            report += v.code + " " + v.subject + " " + v.detail + "\n";
        CHECK_MESSAGE(violations.empty(), report);

        rdf::Graph back = rdf::parse_ntriples(rdf::serialize_ntriples(g));
        CHECK(back.triples() == g.triples());
    }
}

TEST_CASE("pruning keeps the guard evidence for a guarded entry point") {
    rdf::Graph g = instance_graph("contract Owned {\n"
                                  "  address public owner;\n"
                                  "  modifier onlyOwner() { require(msg.sender == owner); _; }\n"
                                  "  function set(address n) public onlyOwner { owner = n; }\n"
                                  "  function idle() internal pure returns (uint256) { return 1; }\n"
                                  "}\n",
                                  "t.sol");
    rdf::Graph pruned = prune_access_control(g);

    const std::string f = "urn:ckg:t.sol:Owned.set(address)";
    CHECK(pruned.contains({rdf::Iri(f), rdf::ckg_iri("appliesModifier"),
                           rdf::Iri("urn:ckg:t.sol:Owned.onlyOwner")}));
    CHECK(pruned.contains({rdf::Iri(f), rdf::ckg_iri("visibilityIs"),
                           rdf::Literal::str("public")}));
    // the authority variable write inside set() keeps the owner node, which in
    // turn keeps the modifier's read of it
    CHECK(pruned.contains({rdf::Iri("urn:ckg:t.sol:Owned.onlyOwner#s0"),
                           rdf::ckg_iri("readsVar"), rdf::Iri("urn:ckg:t.sol:Owned.owner")}));
    // modifier body detail beyond the kept nodes stays out: the guard evidence
    // is the modifier itself, not its builtin plumbing
    CHECK_FALSE(pruned.contains({rdf::Iri("urn:ckg:t.sol:Owned.onlyOwner#s0"),
                                 rdf::ckg_iri("invokes"),
                                 rdf::Iri("urn:ckg:builtin:require")}));
    // the internal helper touches no guard and drops out
    bool idle_present = false;
    for (const rdf::Triple& t : pruned.triples())
        if (t.subject.value.find("idle") != std::string::npos) idle_present = true;
    CHECK_FALSE(idle_present);
    // ontology triples always survive
    CHECK(subset(kg::ontology().to_graph(), pruned));
}

TEST_CASE("a contract without guards prunes to the ontology") {
    rdf::Graph g = instance_graph("contract Plain {\n"
                                  "  uint256 public counter;\n"
                                  "  function bump() public { counter = counter + 1; }\n"
                                  "}\n",
                                  "t.sol");
    rdf::Graph pruned = prune_access_control(g);
    rdf::Graph schema = kg::ontology().to_graph();
    CHECK(pruned.triples() == schema.triples());
}

TEST_CASE("authority variable reads qualify an otherwise unguarded function") {
    // bump() reads owner without any modifier or builtin: the variable name
    // alone marks it relevant.
    rdf::Graph g = instance_graph("contract Odd {\n"
                                  "  address public owner;\n"
                                  "  uint256 public n;\n"
                                  "  function tally() public { n = n + 1; }\n"
                                  "}\n",
                                  "t.sol");
    PruneConfig cfg;
    rdf::Graph pruned = prune_access_control(g, cfg);
    CHECK(pruned.triples() == testsupport::oracle_prune(g, cfg).triples());
}

TEST_CASE("is_entry_function follows visibility and type") {
    rdf::Graph g = instance_graph("contract C {\n"
                                  "  function pub() public {}\n"
                                  "  function ext() external {}\n"
                                  "  function inner() internal {}\n"
                                  "  function priv() private {}\n"
                                  "}\n",
                                  "t.sol");
    CHECK(is_entry_function(g, rdf::Iri("urn:ckg:t.sol:C.pub()")));
    CHECK(is_entry_function(g, rdf::Iri("urn:ckg:t.sol:C.ext()")));
    CHECK_FALSE(is_entry_function(g, rdf::Iri("urn:ckg:t.sol:C.inner()")));
    CHECK_FALSE(is_entry_function(g, rdf::Iri("urn:ckg:t.sol:C.priv()")));
    CHECK_THROWS_AS(is_entry_function(g, rdf::Iri("urn:ckg:t.sol:C")), NotAFunction);
}

TEST_CASE("has_access_check sees modifiers, builtins and env reads") {
    rdf::Graph g = instance_graph(
        "contract C {\n"
        "  address owner;\n"
        "  modifier onlyOwner() { require(msg.sender == owner); _; }\n"
        "  function guarded() public onlyOwner {}\n"
        "  function checked() public { require(msg.sender == owner); owner = msg.sender; }\n"
        "  function open(uint256 v) public { v; }\n"
        "}\n",
        "t.sol");
    PruneConfig cfg;
    CHECK(has_access_check(g, rdf::Iri("urn:ckg:t.sol:C.guarded()"), cfg));
    CHECK(has_access_check(g, rdf::Iri("urn:ckg:t.sol:C.checked()"), cfg));
    CHECK_FALSE(has_access_check(g, rdf::Iri("urn:ckg:t.sol:C.open(uint256)"), cfg));
    CHECK_THROWS_AS(has_access_check(g, rdf::Iri("urn:ckg:t.sol:C.owner"), cfg),
                    NotAFunction);
}

TEST_CASE("empty configuration sets are rejected") {
    rdf::Graph g = instance_graph("contract C {}", "t.sol");
    PruneConfig cfg;
    cfg.guard_modifier_names.clear();
    CHECK_THROWS_AS(prune_access_control(g, cfg), Error);
    cfg = PruneConfig{};
    cfg.guard_builtin_names.clear();
    CHECK_THROWS_AS(prune_access_control(g, cfg), Error);
    cfg = PruneConfig{};
    cfg.authority_var_names.clear();
    CHECK_THROWS_AS(prune_access_control(g, cfg), Error);
}

TEST_CASE("prefix matching widens the guard name net") {
    PruneConfig cfg;
    CHECK(cfg.matches(cfg.guard_modifier_names, "onlyOwner"));
    CHECK_FALSE(cfg.matches(cfg.guard_modifier_names, "onlyOwnerOrAdmin"));
    cfg.prefix_match = true;
    CHECK(cfg.matches(cfg.guard_modifier_names, "onlyOwnerOrAdmin"));
    CHECK_FALSE(cfg.matches(cfg.guard_modifier_names, "admin"));
}

TEST_CASE("bulk generated graphs satisfy subset, idempotence and monotonicity") {
    auto start = std::chrono::steady_clock::now();
    testsupport::Rng rng(0x5eedu);
    PruneConfig cfg;

    for (int i = 0; i < 1000; ++i) {
        rdf::Graph h = testsupport::random_access_graph(rng);
        rdf::Graph kept_h = prune_access_control(h, cfg);

        // pruning may keep ontology triples the input lacked; compare against
        // the input merged with the schema
        std::set<rdf::Triple> merged = h.triples();
        rdf::Graph schema = kg::ontology().to_graph();
        for (const rdf::Triple& t : schema.triples()) merged.insert(t);
        CHECK(subset(kept_h, rdf::Graph(std::move(merged))));

        rdf::Graph twice = prune_access_control(kept_h, cfg);
        if (twice.triples() != kept_h.triples()) {
            FAIL_CHECK("pruning not idempotent at case ", i, "\nfirst:\n",
                       rdf::serialize_ntriples(kept_h), "\nsecond:\n",
                       rdf::serialize_ntriples(twice));
            break;
        }

        // a random subgraph never keeps triples the supergraph drops
        std::set<rdf::Triple> sub;
        for (const rdf::Triple& t : h.triples())
            if (rng() % 4 != 0) sub.insert(t);
        rdf::Graph g(std::move(sub));
        rdf::Graph kept_g = prune_access_control(g, cfg);
        for (const rdf::Triple& t : kept_g.triples()) {
            bool from_ontology = kg::is_ontology_triple(t);
            if (!from_ontology && !kept_h.contains(t)) {
                FAIL_CHECK("monotonicity violated at case ", i, ": ",
                           rdf::serialize_triple(t));
                break;
            }
        }

        // the reference evaluation agrees triple for triple
        rdf::Graph oracle = testsupport::oracle_prune(h, cfg);
        if (oracle.triples() != kept_h.triples()) {
            FAIL_CHECK("oracle mismatch at case ", i, "\nmissing:\n",
                       diff(oracle, kept_h), "extra:\n", diff(kept_h, oracle));
            break;
        }
    }

    auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::steady_clock::now() - start);
    CHECK(elapsed.count() < 30);
}
