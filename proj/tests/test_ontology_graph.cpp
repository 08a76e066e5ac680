#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "ckg/kg/conformance.hpp"
#include "ckg/kg/instance.hpp"
#include "ckg/kg/ontology.hpp"
#include "ckg/rdf/ntriples.hpp"
#include "ckg/sol/ir.hpp"

using namespace ckg;
using namespace ckg::kg;

namespace {

InstanceBuild instance_of(const std::string& src) {
    return build_instance(sol::lower_source(src, "test.sol"));
}

bool has(const rdf::Graph& g, const std::string& s, const std::string& p,
         const std::string& o_iri) {
    return g.contains({rdf::Iri(s), rdf::Iri(p), rdf::Iri(o_iri)});
}

bool has_str(const rdf::Graph& g, const std::string& s, const std::string& p,
             const std::string& lexical) {
    return g.contains({rdf::Iri(s), rdf::Iri(p), rdf::Literal::str(lexical)});
}

const std::string kCkg = "http://ckg.dev/ontology#";
const std::string kType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

rdf::Graph mk(std::vector<rdf::Triple> ts) { return rdf::Graph(std::move(ts)); }

std::vector<std::string> violation_codes(const rdf::Graph& g) {
    std::vector<std::string> codes;
    for (const Violation& v : check_conformance(g)) codes.push_back(v.code);
    std::sort(codes.begin(), codes.end());
    return codes;
}

} // namespace

TEST_CASE("schema inventory is fixed") {
    const OntologySchema& s = ontology();
    CHECK(s.classes().size() == 14);
    CHECK(s.object_properties().size() == 13);
    CHECK(s.datatype_properties().size() == 7);

    for (const char* name :
         {"Element", "Contract", "Interface", "Library", "Callable", "Function",
          "Modifier", "Builtin", "ExternalCallable", "Variable", "StateVar",
          "LocalVar", "EnvVar", "Statement"})
        CHECK(s.is_class(rdf::ckg_iri(name)));
}

TEST_CASE("subclass test is reflexive and transitive") {
    const OntologySchema& s = ontology();
    auto sub = [&](const char* a, const char* b) {
        return s.is_subclass_of(rdf::ckg_iri(a), rdf::ckg_iri(b));
    };
    CHECK(sub("Function", "Function"));
    CHECK(sub("Function", "Callable"));
    CHECK(sub("Function", "Element"));
    CHECK(sub("Interface", "Contract"));
    CHECK(sub("EnvVar", "Variable"));
    CHECK_FALSE(sub("Function", "Variable"));
    CHECK_FALSE(sub("Callable", "Function"));
    CHECK_FALSE(sub("Contract", "Interface"));
}

TEST_CASE("property specs carry domain and range") {
    const OntologySchema& s = ontology();
    const ObjectPropertySpec* invokes = s.object_property(rdf::ckg_iri("invokes"));
    REQUIRE(invokes != nullptr);
    CHECK(invokes->domain == rdf::ckg_iri("Statement"));
    CHECK(invokes->range == rdf::ckg_iri("Callable"));

    // modifiers and builtins both guard, so the application range is Callable
    const ObjectPropertySpec* applies = s.object_property(rdf::ckg_iri("appliesModifier"));
    REQUIRE(applies != nullptr);
    CHECK(applies->range == rdf::ckg_iri("Callable"));

    const DataPropertySpec* index_is = s.datatype_property(rdf::ckg_iri("indexIs"));
    REQUIRE(index_is != nullptr);
    CHECK(index_is->datatype == rdf::LiteralType::Integer);
    CHECK(s.object_property(rdf::ckg_iri("nameIs")) == nullptr);
    CHECK(s.datatype_property(rdf::ckg_iri("hasFunction")) == nullptr);
}

TEST_CASE("schema encoding uses rdfs vocabulary and round-trips") {
    rdf::Graph g = ontology().to_graph();
    CHECK(has(g, kCkg + "Function", "http://www.w3.org/2000/01/rdf-schema#subClassOf",
              kCkg + "Callable"));
    CHECK(has(g, kCkg + "Function", kType, "http://www.w3.org/2000/01/rdf-schema#Class"));
    CHECK(has(g, kCkg + "invokes", "http://www.w3.org/2000/01/rdf-schema#domain",
              kCkg + "Statement"));
    CHECK(has(g, kCkg + "indexIs", "http://www.w3.org/2000/01/rdf-schema#range",
              "http://www.w3.org/2001/XMLSchema#integer"));

    std::string nt = rdf::serialize_ntriples(g);
    rdf::Graph back = rdf::parse_ntriples(nt);
    CHECK(back.triples() == g.triples());

    for (const rdf::Triple& t : g.triples()) CHECK(is_ontology_triple(t));
    CHECK_FALSE(is_ontology_triple(
        {rdf::Iri("urn:ckg:x:C"), rdf::rdf_type(), rdf::ckg_iri("Contract")}));
}

TEST_CASE("instance layer types every node and links per the ontology") {
    InstanceBuild b = instance_of(
        "contract Vault {\n"
        "  address owner;\n"
        "  uint256 total;\n"
        "  modifier onlyOwner() { require(msg.sender == owner); _; }\n"
        "  function deposit(uint256 amount) public {\n"
        "    total = total + amount;\n"
        "  }\n"
        "  function drain() public onlyOwner {\n"
        "    total = 0;\n"
        "  }\n"
        "}\n");
    const rdf::Graph& g = b.graph;
    const std::string c = "urn:ckg:test.sol:Vault";

    CHECK(has(g, c, kType, kCkg + "Contract"));
    CHECK(has_str(g, c, kCkg + "nameIs", "Vault"));
    CHECK(has(g, c, kCkg + "hasStateVar", c + ".owner"));
    CHECK(has(g, c + ".owner", kType, kCkg + "StateVar"));
    CHECK(has_str(g, c + ".owner", kCkg + "visibilityIs", "internal"));
    CHECK(has_str(g, c + ".owner", kCkg + "typeIs", "address"));

    CHECK(has(g, c, kCkg + "hasModifier", c + ".onlyOwner"));
    CHECK(has(g, c + ".onlyOwner", kType, kCkg + "Modifier"));

    const std::string dep = c + ".deposit(uint256)";
    CHECK(has(g, c, kCkg + "hasFunction", dep));
    CHECK(has(g, dep, kType, kCkg + "Function"));
    CHECK(has_str(g, dep, kCkg + "visibilityIs", "public"));
    CHECK(has_str(g, dep, kCkg + "mutabilityIs", "nonpayable"));
    CHECK(has(g, dep, kCkg + "entryPointIs", dep + "#s0"));
    CHECK(has(g, dep, kCkg + "hasStatement", dep + "#s0"));
    CHECK(has(g, dep + "#s0", kType, kCkg + "Statement"));
    CHECK(has_str(g, dep + "#s0", kCkg + "kindIs", "assignment"));
    CHECK(g.contains({rdf::Iri(dep + "#s0"), rdf::ckg_iri("indexIs"),
                      rdf::Literal::integer(0)}));
    CHECK(has(g, dep + "#s0", kCkg + "readsVar", c + ".total"));
    CHECK(has(g, dep + "#s0", kCkg + "writesVar", c + ".total"));
    // parameters resolve to locals scoped under the callable
    CHECK(has(g, dep + "#s0", kCkg + "readsVar", dep + "#lamount"));
    CHECK(has(g, dep + "#lamount", kType, kCkg + "LocalVar"));

    const std::string drain = c + ".drain()";
    CHECK(has(g, drain, kCkg + "appliesModifier", c + ".onlyOwner"));

    // the modifier body reads the environment and invokes the builtin
    const std::string guard = c + ".onlyOwner#s0";
    CHECK(has(g, guard, kCkg + "readsVar", "urn:ckg:env:msg.sender"));
    CHECK(has(g, "urn:ckg:env:msg.sender", kType, kCkg + "EnvVar"));
    CHECK(has(g, guard, kCkg + "invokes", "urn:ckg:builtin:require"));
    CHECK(has(g, "urn:ckg:builtin:require", kType, kCkg + "Builtin"));

    CHECK(check_conformance(g).empty());

    // spans recorded for every emitted subject node
    CHECK(b.spans.count(c) == 1);
    CHECK(b.spans.count(dep) == 1);
    CHECK(b.spans.count(dep + "#s0") == 1);
}

TEST_CASE("interfaces and libraries type as their own classes") {
    InstanceBuild b = instance_of("interface IT { function f() external; }\n"
                                  "library Math {}\n");
    CHECK(has(b.graph, "urn:ckg:test.sol:IT", kType, kCkg + "Interface"));
    CHECK(has(b.graph, "urn:ckg:test.sol:Math", kType, kCkg + "Library"));
    CHECK(check_conformance(b.graph).empty());
}

TEST_CASE("inheritsFrom lists every linearized base") {
    InstanceBuild b = instance_of("contract A {}\n"
                                  "contract B is A {}\n"
                                  "contract C is B {}\n");
    CHECK(has(b.graph, "urn:ckg:test.sol:C", kCkg + "inheritsFrom", "urn:ckg:test.sol:B"));
    CHECK(has(b.graph, "urn:ckg:test.sol:C", kCkg + "inheritsFrom", "urn:ckg:test.sol:A"));
    CHECK(has(b.graph, "urn:ckg:test.sol:B", kCkg + "inheritsFrom", "urn:ckg:test.sol:A"));
    CHECK_FALSE(
        has(b.graph, "urn:ckg:test.sol:A", kCkg + "inheritsFrom", "urn:ckg:test.sol:B"));
}

TEST_CASE("branches encode as branchTrue and branchFalse") {
    InstanceBuild b = instance_of("contract C {\n"
                                  "  uint256 x;\n"
                                  "  function f(uint256 a) public {\n"
                                  "    if (a > 0) { x = 1; } else { x = 2; }\n"
                                  "    x = 3;\n"
                                  "  }\n"
                                  "}\n");
    const std::string f = "urn:ckg:test.sol:C.f(uint256)";
    CHECK(has(b.graph, f + "#s0", kCkg + "branchTrue", f + "#s1"));
    CHECK(has(b.graph, f + "#s0", kCkg + "branchFalse", f + "#s2"));
    // both arms fall through to the statement after the join
    CHECK(has(b.graph, f + "#s1", kCkg + "hasNext", f + "#s3"));
    CHECK(has(b.graph, f + "#s2", kCkg + "hasNext", f + "#s3"));
    CHECK(check_conformance(b.graph).empty());
}

TEST_CASE("loops keep the execution chain acyclic") {
    InstanceBuild b = instance_of("contract C {\n"
                                  "  uint256 x;\n"
                                  "  function f(uint256 a) public {\n"
                                  "    while (a > 0) { a = a - 1; }\n"
                                  "    x = 1;\n"
                                  "  }\n"
                                  "}\n");
    const std::string f = "urn:ckg:test.sol:C.f(uint256)";
    CHECK(has(b.graph, f + "#s0", kCkg + "branchTrue", f + "#s1"));
    CHECK(has(b.graph, f + "#s0", kCkg + "branchFalse", f + "#s2"));
    // no hasNext may close the loop
    CHECK_FALSE(has(b.graph, f + "#s1", kCkg + "hasNext", f + "#s0"));
    CHECK(check_conformance(b.graph).empty());
}

TEST_CASE("emit statements produce no invokes edges") {
    InstanceBuild b = instance_of("contract C {\n"
                                  "  event Ping(uint256 v);\n"
                                  "  function f() public { emit Ping(1); }\n"
                                  "}\n");
    const rdf::Iri s("urn:ckg:test.sol:C.f()#s0");
    rdf::GraphIndex index(b.graph);
    CHECK(index.objects(s, rdf::ckg_iri("invokes")).empty());
    CHECK(has_str(b.graph, s.value, kCkg + "kindIs", "emit"));
}

TEST_CASE("unresolved calls land on external callables") {
    InstanceBuild b = instance_of("contract C {\n"
                                  "  function f(address t) public { IToken(t).burn(); }\n"
                                  "}\n");
    CHECK(has(b.graph, "urn:ckg:test.sol:C.f(address)#s0", kCkg + "invokes",
              "urn:ckg:extern:burn"));
    CHECK(has(b.graph, "urn:ckg:extern:burn", kType, kCkg + "ExternalCallable"));
}

TEST_CASE("iri encoding escapes bytes ntriples rejects") {
    CHECK(iri::encode("a b") == "a%20b");
    CHECK(iri::encode("x<y>") == "x%3Cy%3E");
    CHECK(iri::encode("p|q") == "p%7Cq");
    CHECK(iri::encode("100%") == "100%25");
    CHECK(iri::encode("plain.name") == "plain.name");
    // percent-encoded IRIs must survive serialization
    InstanceBuild b = instance_of("contract C { function f() public {} }\n");
    std::string nt = rdf::serialize_ntriples(b.graph);
    rdf::Graph back = rdf::parse_ntriples(nt);
    CHECK(back.triples() == b.graph.triples());
}

TEST_CASE("conformance flags untyped and multiply typed subjects") {
    rdf::Graph g = mk({{rdf::Iri("urn:ckg:x:C"), rdf::ckg_iri("nameIs"), rdf::Literal::str("C")}});
    auto codes = violation_codes(g);
    CHECK(std::count(codes.begin(), codes.end(), "missing-type") == 1);

    rdf::Graph g2 = mk({{rdf::Iri("urn:ckg:x:C"), rdf::rdf_type(), rdf::ckg_iri("Contract")},
                   {rdf::Iri("urn:ckg:x:C"), rdf::rdf_type(), rdf::ckg_iri("Function")},
                   {rdf::Iri("urn:ckg:x:C"), rdf::ckg_iri("nameIs"), rdf::Literal::str("C")}});
    auto codes2 = violation_codes(g2);
    CHECK(std::count(codes2.begin(), codes2.end(), "multiple-types") == 1);
}

TEST_CASE("conformance flags domain and range conflicts") {
    rdf::Iri c("urn:ckg:x:C"), v("urn:ckg:x:C.v");
    rdf::Graph g = mk({{c, rdf::rdf_type(), rdf::ckg_iri("Contract")},
                  {v, rdf::rdf_type(), rdf::ckg_iri("StateVar")},
                  // hasFunction range is Function, object is a StateVar
                  {c, rdf::ckg_iri("hasFunction"), v}});
    auto codes = violation_codes(g);
    CHECK(std::count(codes.begin(), codes.end(), "range-mismatch") == 1);

    rdf::Graph g2 = mk({{c, rdf::rdf_type(), rdf::ckg_iri("Contract")},
                   {v, rdf::rdf_type(), rdf::ckg_iri("StateVar")},
                   // readsVar domain is Statement, subject is a Contract
                   {c, rdf::ckg_iri("readsVar"), v}});
    auto codes2 = violation_codes(g2);
    CHECK(std::count(codes2.begin(), codes2.end(), "domain-mismatch") == 1);
}

TEST_CASE("conformance flags literal and datatype misuse") {
    rdf::Iri c("urn:ckg:x:C");
    rdf::Graph g = mk({{c, rdf::rdf_type(), rdf::ckg_iri("Contract")},
                  {c, rdf::ckg_iri("hasFunction"), rdf::Literal::str("f")}});
    auto codes = violation_codes(g);
    CHECK(std::count(codes.begin(), codes.end(), "literal-object") == 1);

    rdf::Graph g2 = mk({{c, rdf::rdf_type(), rdf::ckg_iri("Contract")},
                   {c, rdf::ckg_iri("nameIs"), rdf::Iri("urn:ckg:x:D")}});
    auto codes2 = violation_codes(g2);
    CHECK(std::count(codes2.begin(), codes2.end(), "iri-object") == 1);

    rdf::Iri s("urn:ckg:x:C.f()#s0");
    rdf::Graph g3 = mk({{s, rdf::rdf_type(), rdf::ckg_iri("Statement")},
                   {s, rdf::ckg_iri("indexIs"), rdf::Literal::str("zero")}});
    auto codes3 = violation_codes(g3);
    CHECK(std::count(codes3.begin(), codes3.end(), "datatype-mismatch") == 1);
}

TEST_CASE("conformance flags undeclared properties and broken chains") {
    rdf::Iri c("urn:ckg:x:C");
    rdf::Graph g = mk({{c, rdf::rdf_type(), rdf::ckg_iri("Contract")},
                  {c, rdf::ckg_iri("ownsPet"), rdf::Iri("urn:ckg:x:D")}});
    auto codes = violation_codes(g);
    CHECK(std::count(codes.begin(), codes.end(), "undeclared-property") == 1);

    rdf::Iri s0("urn:ckg:x:C.f()#s0"), s1("urn:ckg:x:C.f()#s1");
    rdf::Graph g2 = mk({{s0, rdf::rdf_type(), rdf::ckg_iri("Statement")},
                   {s1, rdf::rdf_type(), rdf::ckg_iri("Statement")},
                   {s0, rdf::ckg_iri("hasNext"), s1},
                   {s1, rdf::ckg_iri("hasNext"), s0}});
    auto codes2 = violation_codes(g2);
    CHECK(std::count(codes2.begin(), codes2.end(), "hasNext-cycle") >= 1);

    rdf::Iri f("urn:ckg:x:C.f()");
    rdf::Graph g3 = mk({{f, rdf::rdf_type(), rdf::ckg_iri("Function")},
                   {s0, rdf::rdf_type(), rdf::ckg_iri("Statement")},
                   {f, rdf::ckg_iri("hasStatement"), s0},
                   {s0, rdf::ckg_iri("indexIs"), rdf::Literal::integer(2)}});
    auto codes3 = violation_codes(g3);
    CHECK(std::count(codes3.begin(), codes3.end(), "index-gap") == 1);
}

TEST_CASE("instance graph serialization is byte deterministic") {
    std::string src = "contract A { uint256 n; }\n"
                      "contract B is A {\n"
                      "  function set(uint256 v) public { n = v; }\n"
                      "}\n";
    std::string first = rdf::serialize_ntriples(instance_of(src).graph);
    std::string second = rdf::serialize_ntriples(instance_of(src).graph);
    CHECK(first == second);
    CHECK(!first.empty());
    CHECK(first.back() == '\n');
}
