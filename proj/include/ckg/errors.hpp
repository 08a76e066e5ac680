#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ckg {

/// Root of every error thrown by the toolchain.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- frontend ---------------------------------------------------------------

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                ": " + msg),
          line(line), column(column) {}
    std::size_t line;
    std::size_t column;
};

class LinearizationError : public Error {
public:
    explicit LinearizationError(const std::string& contract)
        : Error("no valid C3 linearization for contract '" + contract + "'"),
          contract(contract) {}
    std::string contract;
};

class UnresolvedBase : public Error {
public:
    UnresolvedBase(const std::string& contract, const std::string& base)
        : Error("contract '" + contract + "' inherits from unknown base '" + base + "'"),
          contract(contract), base(base) {}
    std::string contract;
    std::string base;
};

// --- graph layer -------------------------------------------------------------

class NtriplesSyntaxError : public Error {
public:
    NtriplesSyntaxError(const std::string& msg, std::size_t line)
        : Error("N-Triples syntax error on line " + std::to_string(line) + ": " + msg),
          line(line) {}
    std::size_t line;
};

class NotAFunction : public Error {
public:
    explicit NotAFunction(const std::string& iri)
        : Error("IRI is not a Function instance: " + iri), iri(iri) {}
    std::string iri;
};

// --- query engine ------------------------------------------------------------

class QuerySyntaxError : public Error {
public:
    QuerySyntaxError(const std::string& msg, std::size_t position)
        : Error("query syntax error at offset " + std::to_string(position) + ": " + msg),
          position(position) {}
    std::size_t position;
};

class UnsupportedFeature : public Error {
public:
    explicit UnsupportedFeature(const std::string& feature)
        : Error("unsupported query feature: " + feature), feature(feature) {}
    std::string feature;
};

class EvaluationError : public Error {
public:
    explicit EvaluationError(const std::string& msg) : Error("evaluation error: " + msg) {}
};

// --- prompts -----------------------------------------------------------------

class UnknownCwe : public Error {
public:
    explicit UnknownCwe(const std::string& id)
        : Error("unknown or unsupported CWE id: " + id), id(id) {}
    std::string id;
};

class SummaryTooLarge : public Error {
public:
    SummaryTooLarge(std::size_t tokens, std::size_t budget)
        : Error("rendered prompt of ~" + std::to_string(tokens) +
                " tokens exceeds budget of " + std::to_string(budget)),
          tokens(tokens), budget(budget) {}
    std::size_t tokens;
    std::size_t budget;
};

// --- gateway -----------------------------------------------------------------

class EndpointError : public Error {
public:
    EndpointError(int status, const std::string& body_excerpt)
        : Error("endpoint error (status " + std::to_string(status) + "): " + body_excerpt),
          status(status), body_excerpt(body_excerpt) {}
    int status;
    std::string body_excerpt;
};

class MissingFixture : public Error {
public:
    explicit MissingFixture(const std::string& path)
        : Error("mock fixture not found: " + path), path(path) {}
    std::string path;
};

class ExtractionFailure : public Error {
public:
    explicit ExtractionFailure(const std::string& why)
        : Error("could not extract a query from the reply: " + why) {}
};

// --- pipeline / harness -------------------------------------------------------

class UnknownEntity : public Error {
public:
    explicit UnknownEntity(const std::string& iri)
        : Error("IRI does not name an entity in the IR: " + iri), iri(iri) {}
    std::string iri;
};

class ManifestError : public Error {
public:
    ManifestError(const std::string& msg, std::size_t entry_index)
        : Error("manifest entry " + std::to_string(entry_index) + ": " + msg),
          entry_index(entry_index) {}
    std::size_t entry_index;
};

class CweMismatch : public Error {
public:
    CweMismatch(const std::string& report_cwe, const std::string& eval_cwe)
        : Error("report targets " + report_cwe + " but evaluation is for " + eval_cwe) {}
};

} // namespace ckg
