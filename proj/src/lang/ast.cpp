#include "livediag/lang/ast.hpp"

#include <sstream>

#include "livediag/lang/number_format.hpp"

namespace livediag::lang {

const char* toString(NodeKind kind) {
    switch (kind) {
    case NodeKind::NumberLit: return "NumberLit";
    case NodeKind::StringLit: return "StringLit";
    case NodeKind::BoolLit: return "BoolLit";
    case NodeKind::NullLit: return "NullLit";
    case NodeKind::Ident: return "Ident";
    case NodeKind::Assign: return "Assign";
    case NodeKind::Call: return "Call";
    case NodeKind::InfixCall: return "InfixCall";
    case NodeKind::FunctionLit: return "FunctionLit";
    case NodeKind::ListLit: return "ListLit";
    case NodeKind::FieldAccess: return "FieldAccess";
    case NodeKind::Program: return "Program";
    }
    return "?";
}

bool structurallyEqual(const AstNode& a, const AstNode& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size() || a.text != b.text ||
        a.params != b.params || a.explicitParams != b.explicitParams) {
        return false;
    }
    if (a.kind == NodeKind::NumberLit && a.number != b.number) {
        return false;
    }
    if (a.kind == NodeKind::BoolLit && a.boolean != b.boolean) {
        return false;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!structurallyEqual(a.children[i], b.children[i])) {
            return false;
        }
    }
    return true;
}

std::vector<const AstNode*> nodeAt(const AstNode& program, std::size_t offset) {
    std::vector<const AstNode*> path{&program};
    const AstNode* current = &program;
    while (true) {
        const AstNode* next = nullptr;
        for (const auto& child : current->children) {
            if (child.span.contains(offset)) {
                next = &child;
                break;
            }
        }
        if (next == nullptr) {
            return path;
        }
        path.push_back(next);
        current = next;
    }
}

const AstNode* findBySpan(const AstNode& root, Span span) {
    if (root.span == span) {
        return &root;
    }
    for (const auto& child : root.children) {
        if (child.span.covers(span)) {
            if (const AstNode* found = findBySpan(child, span)) {
                return found;
            }
        }
    }
    return nullptr;
}

namespace {

void dumpInto(std::ostringstream& out, const AstNode& node) {
    out << toString(node.kind);
    switch (node.kind) {
    case NodeKind::NumberLit: out << ' ' << formatNumber(node.number); break;
    case NodeKind::StringLit: out << " \"" << node.text << '"'; break;
    case NodeKind::BoolLit: out << (node.boolean ? " true" : " false"); break;
    case NodeKind::Ident:
    case NodeKind::InfixCall:
    case NodeKind::FieldAccess: out << ' ' << node.text; break;
    case NodeKind::FunctionLit:
        if (node.explicitParams) {
            out << " (";
            for (std::size_t i = 0; i < node.params.size(); ++i) {
                out << (i ? ", " : "") << node.params[i];
            }
            out << ')';
        }
        break;
    default: break;
    }
    if (!node.children.empty()) {
        out << '[';
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            if (i) {
                out << ", ";
            }
            dumpInto(out, node.children[i]);
        }
        out << ']';
    }
}

}  // namespace

std::string dump(const AstNode& node) {
    std::ostringstream out;
    dumpInto(out, node);
    return out.str();
}

}  // namespace livediag::lang
