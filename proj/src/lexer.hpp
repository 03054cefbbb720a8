#pragma once

#include "semidl/error.hpp"

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

namespace semidl::detail {

enum class Tok { end, ident, string, lparen, rparen, comma, dot, turnstile, directive, equals, other };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

/// Tokenizer shared by the program and fact readers. `%` starts a comment.
class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

    Token expect(Tok kind, const char* what) {
        if (tok_.kind != kind) fail(std::string("expected ") + what);
        return next();
    }

    [[noreturn]] void fail(const std::string& what) const {
        std::string got = tok_.kind == Tok::end ? "end of input" : "'" + tok_.text + "'";
        throw ParseError(what + ", got " + got, tok_.line, tok_.column);
    }

    /// Raw annotation text after `=`, up to the terminating `.` (a dot followed
    /// by whitespace, `%` or end of input). Consumes that dot.
    Token raw_literal() {
        // tok_ is the lookahead; rewind to its start so a literal like `2.5` is read whole.
        pos_ = tok_start_;
        line_ = tok_.line;
        col_ = tok_.column;
        Token t{Tok::string, {}, line_, col_};
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') break;
            if (c == '.') {
                char nx = pos_ + 1 < src_.size() ? src_[pos_ + 1] : ' ';
                if (std::isspace(static_cast<unsigned char>(nx)) || nx == '%') break;
            }
            t.text += c;
            bump();
        }
        if (pos_ >= src_.size() || src_[pos_] != '.') {
            throw ParseError("expected '.' after annotation", line_, col_);
        }
        bump();
        while (!t.text.empty() && std::isspace(static_cast<unsigned char>(t.text.back()))) {
            t.text.pop_back();
        }
        advance();
        return t;
    }

private:
    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    void advance() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
            if (pos_ < src_.size() && src_[pos_] == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
                continue;
            }
            break;
        }
        tok_start_ = pos_;
        tok_ = Token{Tok::end, {}, line_, col_};
        if (pos_ >= src_.size()) return;
        char c = src_[pos_];
        auto single = [&](Tok k) {
            tok_.kind = k;
            tok_.text = std::string(1, c);
            bump();
        };
        switch (c) {
        case '(': return single(Tok::lparen);
        case ')': return single(Tok::rparen);
        case ',': return single(Tok::comma);
        case '.': return single(Tok::dot);
        case '=': return single(Tok::equals);
        case ':':
            if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
                tok_.kind = Tok::turnstile;
                tok_.text = ":-";
                bump();
                bump();
                return;
            }
            break;
        case '@': {
            tok_.kind = Tok::directive;
            tok_.text = "@";
            bump();
            while (pos_ < src_.size() && ident_char(src_[pos_])) {
                tok_.text += src_[pos_];
                bump();
            }
            return;
        }
        case '"': {
            tok_.kind = Tok::string;
            bump();
            while (pos_ < src_.size() && src_[pos_] != '"') {
                if (src_[pos_] == '\n') break;
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) bump();
                tok_.text += src_[pos_];
                bump();
            }
            if (pos_ >= src_.size() || src_[pos_] != '"') {
                throw ParseError("unterminated string", tok_.line, tok_.column);
            }
            bump();
            return;
        }
        default:
            if (ident_char(c)) {
                tok_.kind = Tok::ident;
                while (pos_ < src_.size() && ident_char(src_[pos_])) {
                    tok_.text += src_[pos_];
                    bump();
                }
                return;
            }
        }
        single(Tok::other);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    std::size_t tok_start_ = 0;
    Token tok_;
};

} // namespace semidl::detail
