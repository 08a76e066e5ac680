#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/kg/ontology.hpp"
#include "ckg/kg/summary.hpp"
#include "ckg/prompt/cwe.hpp"
#include "ckg/prompt/templates.hpp"

// Two-round prompt construction. A rendered prompt is always the five named
// sections in order; templates are split into sections before placeholder
// substitution so text injected into one section can never shift the
// boundaries of another.

namespace ckg::prompt {

inline constexpr std::size_t kDefaultTokenBudget = 8000;

inline const std::array<std::string, 5>& section_names() {
    static const std::array<std::string, 5> names = {
        "Task", "Input", "Instructions", "Output", "Example"};
    return names;
}

inline const std::array<std::string, 7>& instruction_headings() {
    static const std::array<std::string, 7> names = {
        "Intent Parsing",
        "Slot Justification",
        "KG Feasibility Check",
        "Query Plan Construction",
        "SPARQL Generation",
        "Confidence and Ambiguity Handling",
        "Output Formatting"};
    return names;
}

struct PromptRound {
    int round = 1;
    std::string task;
    std::string input;
    std::string instructions;
    std::string output;
    std::string example;

    const std::string& section(std::size_t i) const {
        const std::string* parts[5] = {&task, &input, &instructions, &output,
                                       &example};
        return *parts[i];
    }

    std::string& section(std::size_t i) {
        std::string* parts[5] = {&task, &input, &instructions, &output,
                                 &example};
        return *parts[i];
    }

    std::string render() const {
        std::string out;
        for (std::size_t i = 0; i < 5; ++i) {
            out += "## " + section_names()[i] + "\n";
            out += section(i);
        }
        return out;
    }
};

struct ReasoningOutput {
    std::string intent;
    std::vector<std::pair<std::string, std::string>> slots;
    std::string feasibility;
    std::vector<std::string> query_plan;
    std::string confidence = "low";
    std::vector<std::string> alternatives;
};

// Whitespace token count scaled by 1.3 approximates the model tokenizer
// closely enough for a budget gate.
inline std::size_t estimate_tokens(const std::string& text) {
    std::size_t words = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return static_cast<std::size_t>(static_cast<double>(words) * 1.3);
}

inline std::string render_schema(const kg::OntologySchema& schema) {
    std::ostringstream out;
    out << "Classes:\n";
    for (const auto& [cls, super] : schema.classes()) {
        out << "  ckg:" << cls.local_name();
        if (super) out << " (subclass of ckg:" << super->local_name() << ")";
        out << "\n";
    }
    out << "Object properties (domain -> range):\n";
    for (const auto& p : schema.object_properties()) {
        out << "  ckg:" << p.iri.local_name() << ": ckg:"
            << p.domain.local_name() << " -> ckg:" << p.range.local_name()
            << "\n";
    }
    out << "Datatype properties (domain, value type):\n";
    for (const auto& p : schema.datatype_properties()) {
        const char* ty = p.datatype == rdf::LiteralType::Integer ? "integer"
                         : p.datatype == rdf::LiteralType::Boolean
                             ? "boolean"
                             : "string";
        out << "  ckg:" << p.iri.local_name() << ": ckg:"
            << p.domain.local_name() << ", " << ty << "\n";
    }
    return out.str();
}

namespace detail {

// Splits a template into the five section bodies. Bodies keep every byte
// after their "## Name" line up to the next section header, so rendering a
// round with untouched bodies reproduces the template exactly.
inline std::array<std::string, 5> split_template(const std::string& tpl) {
    std::array<std::size_t, 5> starts{};
    std::array<std::size_t, 5> body_starts{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        std::string header = "## " + section_names()[i] + "\n";
        std::size_t at = tpl.find(header, pos);
        if (at == std::string::npos)
            throw Error("prompt template is missing section " +
                        section_names()[i]);
        starts[i] = at;
        body_starts[i] = at + header.size();
        pos = body_starts[i];
    }
    std::array<std::string, 5> bodies;
    for (std::size_t i = 0; i < 5; ++i) {
        std::size_t end = i + 1 < 5 ? starts[i + 1] : tpl.size();
        bodies[i] = tpl.substr(body_starts[i], end - body_starts[i]);
    }
    return bodies;
}

// One left-to-right pass; substituted values are never rescanned, so a
// value containing "{{SCHEMA}}" stays verbatim instead of being expanded.
inline std::string substitute(const std::string& body,
                              const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(body.size());
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t open = body.find("{{", pos);
        if (open == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        std::size_t close = body.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        auto it = vars.find(body.substr(open + 2, close - open - 2));
        if (it == vars.end()) {
            out.append(body, pos, open + 2 - pos);
            pos = open + 2;
        } else {
            out.append(body, pos, open - pos);
            out += it->second;
            pos = close + 2;
        }
    }
    return out;
}

inline PromptRound fill_template(const char* tpl, int round,
                                 const std::map<std::string, std::string>& vars) {
    auto bodies = split_template(tpl);
    PromptRound out;
    out.round = round;
    for (std::size_t i = 0; i < 5; ++i) out.section(i) = substitute(bodies[i], vars);
    return out;
}

} // namespace detail

inline PromptRound build_round_one(const CwePattern& pattern,
                                   const kg::OntologySchema& schema,
                                   const kg::KgSummary& summary,
                                   std::size_t token_budget = kDefaultTokenBudget) {
    std::string summary_text;
    if (summary.instance_total() == 0)
        summary_text = "(no access-control entry points found)\n";
    else
        summary_text = kg::render_summary(summary);
    PromptRound round = detail::fill_template(
        kRound1Template, 1,
        {{"CWE_ID", pattern.id},
         {"CWE_TITLE", pattern.title},
         {"CWE_PATTERN", pattern.nl_pattern},
         {"SCHEMA", render_schema(schema)},
         {"SUMMARY", summary_text}});
    std::size_t tokens = estimate_tokens(round.render());
    if (tokens > token_budget) throw SummaryTooLarge(tokens, token_budget);
    return round;
}

inline PromptRound build_round_two(const std::string& round1_reply,
                                   const CwePattern& pattern,
                                   const kg::OntologySchema& schema) {
    return detail::fill_template(kRound2Template, 2,
                                 {{"CWE_ID", pattern.id},
                                  {"CWE_TITLE", pattern.title},
                                  {"SCHEMA", render_schema(schema)},
                                  {"ROUND1_REPLY", round1_reply}});
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Section heading match: a line whose text, after markdown prefixes and
// numbering, starts with the known heading name.
inline std::optional<std::size_t> heading_of(const std::string& line) {
    std::string t = trim(line);
    while (!t.empty() && (t.front() == '#' || t.front() == '*')) t.erase(0, 1);
    t = trim(t);
    while (!t.empty() &&
           (std::isdigit(static_cast<unsigned char>(t.front())) ||
            t.front() == '.' || t.front() == ')'))
        t.erase(0, 1);
    t = trim(t);
    std::string lt = lower(t);
    for (std::size_t i = 0; i < instruction_headings().size(); ++i) {
        std::string name = lower(instruction_headings()[i]);
        if (lt.rfind(name, 0) == 0) return i;
    }
    return std::nullopt;
}

inline std::vector<std::string> nonempty_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

} // namespace detail

// Best-effort extraction of the structured reasoning from a round-1 reply.
// Never throws: absent sections fall back to flagged defaults so rubric
// scoring, not parsing, decides reply quality.
inline ReasoningOutput parse_reasoning(const std::string& reply) {
    std::array<std::string, 7> sections;
    std::istringstream in(reply);
    std::string line;
    std::optional<std::size_t> current;
    while (std::getline(in, line)) {
        if (auto h = detail::heading_of(line)) {
            current = *h;
            continue;
        }
        if (current) sections[*current] += line + "\n";
    }

    ReasoningOutput out;
    out.intent = detail::trim(sections[0]);

    // Slot lines pair a quoted trigger phrase with the schema field it
    // justifies; accept "phrase -> field" and "phrase: field" shapes.
    for (const std::string& l : detail::nonempty_lines(sections[1])) {
        std::string body = l;
        while (!body.empty() && (body.front() == '-' || body.front() == '*'))
            body.erase(0, 1);
        body = detail::trim(body);
        std::size_t arrow = body.find("->");
        std::size_t sep_len = 2;
        if (arrow == std::string::npos) {
            arrow = body.find(':');
            sep_len = 1;
        }
        if (arrow == std::string::npos || arrow == 0) continue;
        out.slots.emplace_back(detail::trim(body.substr(0, arrow)),
                               detail::trim(body.substr(arrow + sep_len)));
    }

    out.feasibility = detail::trim(sections[2]);
    if (out.feasibility.empty()) out.feasibility = "absent";

    for (const std::string& l : detail::nonempty_lines(sections[3])) {
        std::string body = l;
        while (!body.empty() && (body.front() == '-' || body.front() == '*'))
            body.erase(0, 1);
        out.query_plan.push_back(detail::trim(body));
    }

    // Confidence: first standalone high/medium/low word in the section.
    {
        std::string text = detail::lower(sections[5]);
        std::string found;
        std::size_t best = std::string::npos;
        for (const char* level : {"high", "medium", "low"}) {
            std::size_t pos = 0;
            while ((pos = text.find(level, pos)) != std::string::npos) {
                std::size_t end = pos + std::string(level).size();
                bool left_ok = pos == 0 ||
                               !std::isalpha(static_cast<unsigned char>(text[pos - 1]));
                bool right_ok = end >= text.size() ||
                                !std::isalpha(static_cast<unsigned char>(text[end]));
                if (left_ok && right_ok) break;
                pos = end;
            }
            if (pos != std::string::npos && pos < best) {
                best = pos;
                found = level;
            }
        }
        out.confidence = found.empty() ? "low" : found;
    }

    for (const std::string& l : detail::nonempty_lines(sections[5])) {
        std::string body = l;
        if (body.front() == '-' || body.front() == '*') {
            while (!body.empty() && (body.front() == '-' || body.front() == '*'))
                body.erase(0, 1);
            out.alternatives.push_back(detail::trim(body));
        }
    }
    return out;
}

} // namespace ckg::prompt
