#pragma once

// Umbrella header pulling in the full toolchain: Solidity frontend, knowledge
// graph construction, pruning, query engine, prompting, gateway, detection
// pipeline and evaluation harness.

#include "ckg/errors.hpp"
#include "ckg/source.hpp"

#include "ckg/rdf/model.hpp"
#include "ckg/rdf/ntriples.hpp"

#include "ckg/sol/ast.hpp"
#include "ckg/sol/lexer.hpp"
#include "ckg/sol/parser.hpp"
#include "ckg/sol/inheritance.hpp"
#include "ckg/sol/cfg.hpp"
#include "ckg/sol/ssa.hpp"
#include "ckg/sol/ir.hpp"

#include "ckg/kg/ontology.hpp"
#include "ckg/kg/instance.hpp"
#include "ckg/kg/summary.hpp"
#include "ckg/kg/conformance.hpp"

#include "ckg/prune.hpp"

#include "ckg/sparql/ast.hpp"
#include "ckg/sparql/parser.hpp"
#include "ckg/sparql/engine.hpp"
#include "ckg/sparql/feasibility.hpp"

#include "ckg/prompt/cwe.hpp"
#include "ckg/prompt/templates.hpp"
#include "ckg/prompt/builder.hpp"

#include "ckg/llm/gateway.hpp"

#include "ckg/pipeline/detect.hpp"

#include "ckg/eval/harness.hpp"
