#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "livediag/lang/span.hpp"

namespace livediag::lang {

enum class NodeKind {
    NumberLit,
    StringLit,
    BoolLit,
    NullLit,
    Ident,
    Assign,       // children: [target (Ident | FieldAccess), value]
    Call,         // children: [callee, args...]; a named argument is an Assign with an Ident target
    InfixCall,    // children: [lhs, rhs]; text = operator glyphs or identifier
    FunctionLit,  // children: body statements; params when declared with `(a, b) ->`
    ListLit,      // children: items
    FieldAccess,  // children: [object]; text = field name
    Program,      // children: statements
};

const char* toString(NodeKind kind);

/// Prefix operators are encoded as a Call whose callee is an Ident with this
/// prefix, e.g. `-x` becomes Call(Ident "prefix:-", [x]).
inline constexpr std::string_view kPrefixOperatorPrefix = "prefix:";

struct AstNode {
    NodeKind kind = NodeKind::Program;
    Span span;
    std::vector<AstNode> children;

    double number = 0;   // NumberLit
    bool boolean = false;  // BoolLit
    std::string text;    // StringLit value, Ident name, InfixCall operator, FieldAccess field
    Span opSpan;         // InfixCall operator token, FieldAccess name token

    std::vector<std::string> params;  // FunctionLit
    bool explicitParams = false;      // FunctionLit declared `(a, b) -> ...`

    const AstNode& callee() const { return children.front(); }
    std::size_t argCount() const { return children.empty() ? 0 : children.size() - 1; }
    const AstNode& arg(std::size_t i) const { return children[i + 1]; }
};

/// Equality that ignores spans; used for the re-parse round-trip property.
bool structurallyEqual(const AstNode& a, const AstNode& b);

/// Deepest-first chain of nodes whose span contains `offset`, starting with
/// the program itself. Never empty.
std::vector<const AstNode*> nodeAt(const AstNode& program, std::size_t offset);

/// Node whose span is exactly `span`, preferring the outermost such node.
const AstNode* findBySpan(const AstNode& root, Span span);

/// Pre-order traversal.
template <typename Fn>
void visit(const AstNode& node, Fn&& fn) {
    fn(node);
    for (const auto& child : node.children) {
        visit(child, fn);
    }
}

std::string dump(const AstNode& node);

}  // namespace livediag::lang
