#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "livediag/lang/span.hpp"

namespace livediag::lang {

enum class TokenKind {
    Ident,
    Number,
    String,
    Operator,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Separator,  // newline or ';'
};

const char* toString(TokenKind kind);

struct Token {
    TokenKind kind;
    Span span;
    std::string text;   // identifier name, operator glyphs, or decoded string contents
    double number = 0;  // Number tokens only

    friend bool operator==(const Token&, const Token&) = default;
};

struct LexResult {
    std::vector<Token> tokens;
    Diagnostics errors;  // code "LexError"
};

/// Splits `text` into tokens. `//` comments and whitespace other than
/// newlines are dropped. Lexing continues past errors so that the parser can
/// still report diagnostics for the rest of the document.
LexResult tokenize(std::string_view text);

bool isOperatorChar(char c);

}  // namespace livediag::lang
