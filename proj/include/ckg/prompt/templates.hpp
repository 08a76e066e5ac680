#pragma once

// Prompt template text. The strings below are byte-identical copies of
// assets/prompts/round1.txt and round2.txt; a test enforces the pairing.
// Bump kTemplateVersion whenever either template changes.

namespace ckg::prompt {

inline constexpr const char* kTemplateVersion = "v1";

inline constexpr const char* kRound1Template = R"CKGTPL(## Task
You are auditing a Solidity smart contract for a single weakness class:
{{CWE_ID}} ({{CWE_TITLE}}). Decide which knowledge-graph entities could
exhibit this weakness and produce one SPARQL query that retrieves them.

Weakness pattern:
{{CWE_PATTERN}}

## Input
The contract is modeled as an RDF knowledge graph. Ontology vocabulary
(namespace ckg: <http://ckg.dev/ontology#>):

{{SCHEMA}}

Access-control relevant entities that survived pruning:

{{SUMMARY}}

## Instructions
Work through the following steps in order and write your reasoning under
each heading.

### Intent Parsing
Restate the detection goal in one sentence: which entity class is sought
and which graph condition characterizes the weakness.

### Slot Justification
For every concrete name, class, or property you intend to use in the
query, quote the phrase from the weakness pattern or the entity summary
that justifies it. Do not introduce identifiers that appear in neither.

### KG Feasibility Check
Check each planned pattern against the vocabulary and summary above.
State for each whether it is feasible, and drop or replace patterns that
reference classes, properties, or instances the graph cannot contain.

### Query Plan Construction
List the triple patterns you will join, in order, with the variables
they bind and the filters applied to them.

### SPARQL Generation
Write the final query. Use only: SELECT with optional DISTINCT, a basic
graph pattern, FILTER with comparisons, && || !, regex, bound, EXISTS
and NOT EXISTS, and LIMIT. No OPTIONAL, UNION, property paths,
subqueries, aggregates, ORDER BY, or blank nodes.

### Confidence and Ambiguity Handling
State your confidence as exactly one of high, medium, or low. If the
summary supports more than one plausible reading, name the alternatives
and say why you chose yours.

### Output Formatting
End the reply with the query in a single fenced code block labeled
sparql. Emit exactly one such block and nothing after it.

## Output
Reasoning under the seven headings above, then one fenced code block
labeled sparql containing the final query. The first selected variable
must bind the suspect entities.

## Example
For a pattern about unguarded writes to an owner variable, a well-formed
final block looks like:

```sparql
PREFIX ckg: <http://ckg.dev/ontology#>
SELECT DISTINCT ?fn WHERE {
  ?fn a ckg:Function .
  ?fn ckg:visibilityIs ?vis .
  ?fn ckg:hasStatement ?st .
  ?st ckg:writesVar ?var .
  ?var ckg:nameIs "owner" .
  FILTER(?vis = "public" || ?vis = "external")
  FILTER NOT EXISTS { ?fn ckg:appliesModifier ?m }
}
```

Your query must be adapted to the actual summary above, not copied from
this example.
)CKGTPL";

inline constexpr const char* kRound2Template = R"CKGTPL(## Task
You previously analyzed a contract knowledge graph for {{CWE_ID}}
({{CWE_TITLE}}) and produced the reasoning below. Re-examine that work,
repair any pattern the vocabulary cannot satisfy, and emit the final
executable query.

## Input
Ontology vocabulary (namespace ckg: <http://ckg.dev/ontology#>):

{{SCHEMA}}

Your previous reply, verbatim:

{{ROUND1_REPLY}}

## Instructions
Work through the following steps in order and write your reasoning under
each heading.

### Intent Parsing
Confirm or correct the one-sentence detection goal from the previous
reply.

### Slot Justification
Re-check every identifier in the previous query against the vocabulary
and the evidence quoted earlier. Remove or replace any identifier that
has no justification.

### KG Feasibility Check
For each triple pattern in the previous query, state whether the
vocabulary above can satisfy it. Rewrite infeasible patterns; if a
pattern merely references an instance the graph may lack, keep it and
say so.

### Query Plan Construction
List the revised join order with the variables each pattern binds.

### SPARQL Generation
Write the final query under the same restrictions: SELECT with optional
DISTINCT, a basic graph pattern, FILTER with comparisons, && || !,
regex, bound, EXISTS and NOT EXISTS, and LIMIT. No OPTIONAL, UNION,
property paths, subqueries, aggregates, ORDER BY, or blank nodes.

### Confidence and Ambiguity Handling
State your confidence as exactly one of high, medium, or low, and note
whether re-examination raised or lowered it.

### Output Formatting
End the reply with the query in a single fenced code block labeled
sparql. Emit exactly one such block and nothing after it.

## Output
Reasoning under the seven headings above, then exactly one fenced code
block labeled sparql containing the final corrected query, restricted
to the subset named under SPARQL Generation.

## Example
A minimal well-formed ending:

The revised query keeps only vocabulary-backed patterns.

```sparql
PREFIX ckg: <http://ckg.dev/ontology#>
SELECT ?fn WHERE {
  ?fn a ckg:Function .
  FILTER NOT EXISTS { ?fn ckg:appliesModifier ?m }
}
```
)CKGTPL";

} // namespace ckg::prompt
