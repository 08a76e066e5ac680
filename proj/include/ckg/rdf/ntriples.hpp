#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/rdf/model.hpp"

// N-Triples reader/writer. Output is one triple per line, lines sorted
// lexicographically, so equal graphs serialize byte-identically.

namespace ckg::rdf {

namespace detail {

inline void escape_into(std::string& out, const std::string& s) {
    char buf[8];
    for (unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (c < 0x20) {
                std::snprintf(buf, sizeof buf, "\\u%04X", c);
                out += buf;
            } else {
                out += static_cast<char>(c);
            }
        }
    }
}

inline void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

} // namespace detail

inline std::string serialize_term(const Term& t) {
    if (is_iri(t)) return "<" + as_iri(t).value + ">";
    const Literal& lit = as_literal(t);
    std::string out = "\"";
    detail::escape_into(out, lit.lexical);
    out += "\"";
    if (lit.datatype != LiteralType::String) {
        out += "^^<";
        out += xsd_iri(lit.datatype);
        out += ">";
    }
    return out;
}

inline std::string serialize_triple(const Triple& t) {
    return "<" + t.subject.value + "> <" + t.predicate.value + "> " +
           serialize_term(t.object) + " .";
}

inline std::string serialize_ntriples(const Graph& g) {
    std::vector<std::string> lines;
    lines.reserve(g.size());
    for (const Triple& t : g.triples()) lines.push_back(serialize_triple(t));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

namespace detail {

class NtLineParser {
public:
    NtLineParser(const std::string& line, std::size_t lineno) : s_(line), lineno_(lineno) {}

    Triple parse() {
        skip_ws();
        Iri subj = parse_iri();
        skip_ws();
        Iri pred = parse_iri();
        skip_ws();
        Term obj = parse_object();
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != '.')
            fail("expected terminating '.'");
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] != '#')
            fail("trailing characters after '.'");
        return Triple(std::move(subj), std::move(pred), std::move(obj));
    }

private:
    [[noreturn]] void fail(const std::string& msg) {
        throw NtriplesSyntaxError(msg, lineno_);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    Iri parse_iri() {
        if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected '<'");
        ++pos_;
        std::string v;
        while (pos_ < s_.size() && s_[pos_] != '>') {
            char c = s_[pos_++];
            if (c == ' ' || c == '<' || c == '"')
                fail("illegal character in IRI");
            v += c;
        }
        if (pos_ >= s_.size()) fail("unterminated IRI");
        ++pos_; // '>'
        if (v.empty()) fail("empty IRI");
        return Iri(std::move(v));
    }

    Term parse_object() {
        if (pos_ >= s_.size()) fail("missing object term");
        if (s_[pos_] == '<') return parse_iri();
        if (s_[pos_] == '"') return parse_literal();
        if (s_.compare(pos_, 2, "_:") == 0) fail("blank nodes are not supported");
        fail("expected IRI or literal object");
    }

    Literal parse_literal() {
        ++pos_; // opening quote
        std::string lex;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c != '\\') {
                lex += c;
                continue;
            }
            if (pos_ >= s_.size()) fail("dangling escape");
            char e = s_[pos_++];
            switch (e) {
            case 't': lex += '\t'; break;
            case 'n': lex += '\n'; break;
            case 'r': lex += '\r'; break;
            case '"': lex += '"'; break;
            case '\\': lex += '\\'; break;
            case 'u': lex_unicode(lex, 4); break;
            case 'U': lex_unicode(lex, 8); break;
            default: fail(std::string("unknown escape \\") + e);
            }
        }
        if (pos_ >= s_.size()) fail("unterminated string literal");
        ++pos_; // closing quote

        LiteralType type = LiteralType::String;
        if (s_.compare(pos_, 2, "^^") == 0) {
            pos_ += 2;
            Iri dt = parse_iri();
            if (dt.value == xsd_iri(LiteralType::Integer)) {
                type = LiteralType::Integer;
            } else if (dt.value == xsd_iri(LiteralType::Boolean)) {
                type = LiteralType::Boolean;
            } else if (dt.value == xsd_iri(LiteralType::String)) {
                type = LiteralType::String;
            } else {
                fail("unsupported datatype <" + dt.value + ">");
            }
        } else if (pos_ < s_.size() && s_[pos_] == '@') {
            fail("language-tagged literals are not supported");
        }
        Literal lit(std::move(lex), type);
        if (!lit.valid()) fail("lexical form does not match datatype");
        return lit;
    }

    void lex_unicode(std::string& lex, int digits) {
        if (pos_ + digits > s_.size()) fail("truncated unicode escape");
        unsigned long cp = 0;
        for (int i = 0; i < digits; ++i) {
            char c = s_[pos_++];
            cp <<= 4;
            if (c >= '0' && c <= '9') cp |= static_cast<unsigned long>(c - '0');
            else if (c >= 'a' && c <= 'f') cp |= static_cast<unsigned long>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') cp |= static_cast<unsigned long>(c - 'A' + 10);
            else fail("bad hex digit in unicode escape");
        }
        detail::append_utf8(lex, cp);
    }

    const std::string& s_;
    std::size_t lineno_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Duplicate lines collapse to a single triple (set semantics).
inline Graph parse_ntriples(const std::string& text) {
    std::set<Triple> triples;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string line = text.substr(start, nl == std::string::npos ? nl : nl - start);
        start = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t i = 0;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i == line.size() || line[i] == '#') continue; // blank or comment line
        triples.insert(detail::NtLineParser(line, lineno).parse());
    }
    return Graph(std::move(triples));
}

} // namespace ckg::rdf
