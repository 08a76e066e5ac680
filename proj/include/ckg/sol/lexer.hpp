#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/source.hpp"

namespace ckg::sol {

struct Token {
    enum class Kind { Identifier, Number, String, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    SourceSpan span{};

    bool is(std::string_view t) const { return text == t; }
    bool is_ident() const { return kind == Kind::Identifier; }
};

/// Tokenizes a Solidity source string; comments are skipped, positions kept.
class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            if (pos_ >= src_.size()) break;
            out.push_back(next_token());
        }
        Token end;
        end.kind = Token::Kind::End;
        end.span = here(pos_);
        out.push_back(end);
        return out;
    }

private:
    static constexpr std::array<std::string_view, 23> kMultiPunct = {
        ">>=", "<<=", "**=", "=>", "==", "!=", "<=", ">=", "&&", "||", "->",
        "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "++", "--"};

    SourceSpan here(std::size_t begin) const {
        SourceSpan s;
        s.begin = begin;
        s.end = begin;
        s.line = line_;
        s.column = begin - line_start_ + 1;
        return s;
    }

    void advance_line(std::size_t at) {
        ++line_;
        line_start_ = at + 1;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                advance_line(pos_);
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                std::size_t start_line = line_;
                pos_ += 2;
                while (pos_ + 1 < src_.size() &&
                       !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) {
                    if (src_[pos_] == '\n') advance_line(pos_);
                    ++pos_;
                }
                if (pos_ + 1 >= src_.size())
                    throw ParseError("unterminated block comment", start_line, 1);
                pos_ += 2;
            } else {
                break;
            }
        }
    }

    Token next_token() {
        std::size_t begin = pos_;
        char c = src_[pos_];
        Token t;
        t.span = here(begin);

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                    src_[pos_] == '_' || src_[pos_] == '$'))
                ++pos_;
            t.kind = Token::Kind::Identifier;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            if (c == '0' && pos_ + 1 < src_.size() &&
                (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
                pos_ += 2;
                while (pos_ < src_.size() &&
                       (std::isxdigit(static_cast<unsigned char>(src_[pos_])) ||
                        src_[pos_] == '_'))
                    ++pos_;
            } else {
                while (pos_ < src_.size() &&
                       (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                        src_[pos_] == '_' || src_[pos_] == '.' || src_[pos_] == 'e' ||
                        src_[pos_] == 'E'))
                    ++pos_;
                // unit suffixes (ether, days, ...) lex as a following identifier
            }
            t.kind = Token::Kind::Number;
        } else if (c == '"' || c == '\'') {
            char quote = c;
            ++pos_;
            while (pos_ < src_.size() && src_[pos_] != quote) {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
                if (src_[pos_] == '\n')
                    throw ParseError("unterminated string literal", t.span.line, t.span.column);
                ++pos_;
            }
            if (pos_ >= src_.size())
                throw ParseError("unterminated string literal", t.span.line, t.span.column);
            ++pos_;
            t.kind = Token::Kind::String;
        } else {
            t.kind = Token::Kind::Punct;
            bool matched = false;
            for (std::string_view op : kMultiPunct) {
                if (src_.compare(pos_, op.size(), op) == 0) {
                    pos_ += op.size();
                    matched = true;
                    break;
                }
            }
            if (!matched) ++pos_;
        }

        t.text = std::string(src_.substr(begin, pos_ - begin));
        t.span.end = pos_;
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t line_start_ = 0;
};

} // namespace ckg::sol
