#pragma once

#include <string_view>
#include <vector>

#include "livediag/lang/ast.hpp"
#include "livediag/lang/lexer.hpp"

namespace livediag::lang {

struct ParseResult {
    AstNode program;
    Diagnostics errors;  // codes "LexError" and "ParseError"
};

/// Parses a token stream into a Program. Statements that fail to parse are
/// dropped and reported; parsing resumes at the next statement boundary of the
/// innermost enclosing block.
ParseResult parse(const std::vector<Token>& tokens, std::size_t textLength);

/// Convenience: tokenize + parse, merging lexer and parser diagnostics.
ParseResult parse(std::string_view text);

}  // namespace livediag::lang
