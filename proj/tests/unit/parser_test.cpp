#include <gtest/gtest.h>

#include "livediag/lang/parser.hpp"
#include "program_gen.hpp"

using namespace livediag;
using namespace livediag::lang;

namespace {

const AstNode& onlyStatement(const ParseResult& r) {
    EXPECT_TRUE(r.errors.empty()) << (r.errors.empty() ? "" : r.errors[0].message);
    EXPECT_EQ(r.program.children.size(), 1u);
    return r.program.children.at(0);
}

}  // namespace

TEST(Parser, ClassWithNestedTrailingBlocks) {
    auto r = parse(R"(class("Menu") { public { "count : int" } })");
    const AstNode& call = onlyStatement(r);
    ASSERT_EQ(call.kind, NodeKind::Call);
    EXPECT_EQ(call.callee().text, "class");
    ASSERT_EQ(call.argCount(), 2u);
    EXPECT_EQ(call.arg(0).kind, NodeKind::StringLit);
    const AstNode& block = call.arg(1);
    ASSERT_EQ(block.kind, NodeKind::FunctionLit);
    ASSERT_EQ(block.children.size(), 1u);
    const AstNode& pub = block.children[0];
    ASSERT_EQ(pub.kind, NodeKind::Call);
    EXPECT_EQ(pub.callee().text, "public");
    ASSERT_EQ(pub.argCount(), 1u);
    EXPECT_EQ(pub.arg(0).kind, NodeKind::FunctionLit);
    EXPECT_EQ(pub.arg(0).children.at(0).text, "count : int");
}

TEST(Parser, ArrowIsInfixCall) {
    auto r = parse("Menu --> Dish");
    const AstNode& n = onlyStatement(r);
    ASSERT_EQ(n.kind, NodeKind::InfixCall);
    EXPECT_EQ(n.text, "-->");
    EXPECT_EQ(n.children[0].text, "Menu");
    EXPECT_EQ(n.children[1].text, "Dish");
}

TEST(Parser, IdentifierInfix) {
    auto r = parse("A extends B");
    const AstNode& n = onlyStatement(r);
    ASSERT_EQ(n.kind, NodeKind::InfixCall);
    EXPECT_EQ(n.text, "extends");
}

TEST(Parser, RecoversFromIncompleteAssignment) {
    auto r = parse("x = ");
    EXPECT_TRUE(r.program.children.empty());
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].code, "ParseError");
    EXPECT_EQ(r.errors[0].span, (Span{4, 4}));
}

TEST(Parser, EmptyDocument) {
    auto r = parse("");
    EXPECT_TRUE(r.errors.empty());
    EXPECT_TRUE(r.program.children.empty());
}

TEST(Parser, Precedence) {
    auto r = parse("a + b * c == d --> e");
    EXPECT_EQ(dump(onlyStatement(r)),
              "InfixCall -->[InfixCall ==[InfixCall +[Ident a, InfixCall *[Ident b, Ident c]], Ident d], Ident e]");
    auto left = parse("a --> b <-- c");
    EXPECT_EQ(dump(onlyStatement(left)), "InfixCall <--[InfixCall -->[Ident a, Ident b], Ident c]");
}

TEST(Parser, NegativeLiteralIsOneSpan) {
    auto r = parse("apos(-10, 5)");
    const AstNode& call = onlyStatement(r);
    EXPECT_EQ(call.arg(0).kind, NodeKind::NumberLit);
    EXPECT_EQ(call.arg(0).number, -10.0);
    EXPECT_EQ(call.arg(0).span, (Span{5, 8}));
    auto unary = parse("-x");
    EXPECT_EQ(dump(onlyStatement(unary)), "Call[Ident prefix:-, Ident x]");
}

TEST(Parser, LambdaParametersAndMultipleTrailingBlocks) {
    auto r = parse("f = { (a, b) -> a + b }");
    const AstNode& assign = onlyStatement(r);
    const AstNode& fn = assign.children[1];
    EXPECT_TRUE(fn.explicitParams);
    EXPECT_EQ(fn.params, (std::vector<std::string>{"a", "b"}));
    auto cond = parse("if (true) { 1 } { 2 }");
    EXPECT_EQ(dump(onlyStatement(cond)), "Call[Ident if, BoolLit true, FunctionLit[NumberLit 1], FunctionLit[NumberLit 2]]");
}

TEST(Parser, NamedArgumentsAndFieldAccess) {
    auto r = parse("class(\"A\", abstract = true).layout { width = 3 }");
    EXPECT_EQ(dump(onlyStatement(r)),
              "Call[FieldAccess layout[Call[Ident class, StringLit \"A\", Assign[Ident abstract, BoolLit true]]], "
              "FunctionLit[Assign[Ident width, NumberLit 3]]]");
}

TEST(Parser, MultilineArguments) {
    auto r = parse("f(\n  1,\n  2\n)\n[\n 3\n]");
    ASSERT_TRUE(r.errors.empty());
    EXPECT_EQ(r.program.children.size(), 2u);
}

TEST(Parser, RecoveryKeepsFollowingStatements) {
    auto r = parse("a = 1\nb = (2 +\nc = 3\nclass(\"X\") { public { \"a\" }; 4 + ; \"b\" }\nd = 4");
    ASSERT_FALSE(r.errors.empty());
    std::vector<std::string> firsts;
    for (const auto& s : r.program.children) {
        firsts.push_back(dump(s).substr(0, 12));
    }
    // `b = (2 +` swallows the newline inside the parenthesis, the rest survive
    EXPECT_EQ(r.program.children.size(), 3u);
    EXPECT_EQ(r.program.children.back().children[0].text, "d");
    const AstNode& cls = r.program.children[1];
    ASSERT_EQ(cls.kind, NodeKind::Call);
    EXPECT_EQ(cls.arg(1).children.size(), 2u);  // public{...} and "b"
}

TEST(Parser, NodeAt) {
    std::string text = "x = 10\n\nMenu --> Dish";
    auto r = parse(text);
    auto path = nodeAt(r.program, 5);
    EXPECT_EQ(path.back()->kind, NodeKind::NumberLit);
    path = nodeAt(r.program, 7);
    ASSERT_EQ(path.size(), 1u);
    EXPECT_EQ(path.back()->kind, NodeKind::Program);
    std::size_t opOffset = text.find("-->") + 1;
    path = nodeAt(r.program, opOffset);
    EXPECT_EQ(path.back()->kind, NodeKind::InfixCall);
}

// Oracle: linear scan over every node, keeping the deepest container.
namespace {

void deepestContainer(const AstNode& node, std::size_t offset, int depth, int& bestDepth, const AstNode*& best) {
    if (node.kind == NodeKind::Program || node.span.contains(offset)) {
        if (depth > bestDepth) {
            bestDepth = depth;
            best = &node;
        }
    } else {
        return;
    }
    for (const auto& child : node.children) {
        deepestContainer(child, offset, depth + 1, bestDepth, best);
    }
}

}  // namespace

TEST(ParserProperty, NodeAtMatchesLinearScan) {
    testgen::ProgramGenerator gen(7);
    for (int round = 0; round < 50; ++round) {
        std::string text = gen.program(5);
        auto r = parse(text);
        ASSERT_TRUE(r.errors.empty()) << text << "\n" << r.errors[0].message;
        for (std::size_t offset = 0; offset <= text.size(); ++offset) {
            int bestDepth = -1;
            const AstNode* best = nullptr;
            deepestContainer(r.program, offset, 0, bestDepth, best);
            auto path = nodeAt(r.program, offset);
            ASSERT_EQ(path.back(), best) << text << " @" << offset;
        }
    }
}

namespace {

void checkContainment(const AstNode& node, const std::string& text) {
    ASSERT_LE(node.span.start, node.span.end);
    ASSERT_LE(node.span.end, text.size());
    const AstNode* prev = nullptr;
    for (const auto& child : node.children) {
        ASSERT_TRUE(node.span.covers(child.span)) << dump(node);
        if (prev) {
            ASSERT_LE(prev->span.end, child.span.start) << "siblings overlap in " << dump(node);
        }
        prev = &child;
        checkContainment(child, text);
    }
}

void checkReparse(const AstNode& node, const std::string& text) {
    bool syntheticCallee = node.kind == NodeKind::Ident && node.text.rfind(kPrefixOperatorPrefix, 0) == 0;
    if (node.kind != NodeKind::Program && !syntheticCallee) {
        std::string segment = text.substr(node.span.start, node.span.length());
        auto again = parse(segment);
        ASSERT_TRUE(again.errors.empty()) << "segment: " << segment;
        ASSERT_EQ(again.program.children.size(), 1u) << "segment: " << segment;
        ASSERT_TRUE(structurallyEqual(again.program.children[0], node))
            << "segment: " << segment << "\n" << dump(again.program.children[0]) << "\n" << dump(node);
    }
    for (const auto& child : node.children) {
        checkReparse(child, text);
    }
}

}  // namespace

TEST(ParserProperty, SpanContainmentAndSegmentReparse) {
    testgen::ProgramGenerator gen(42);
    for (int round = 0; round < 200; ++round) {
        std::string text = gen.program(4);
        auto r = parse(text);
        ASSERT_TRUE(r.errors.empty()) << text << "\n" << r.errors[0].message;
        checkContainment(r.program, text);
        checkReparse(r.program, text);
    }
}

TEST(ParserProperty, RecoveryPreservesWellFormedSuffix) {
    testgen::ProgramGenerator gen(3);
    const std::vector<std::string> broken = {"x = ", "a --> ", "}", "g(,)", "f(1 2)", "class(\"A\") { 4 + }"};
    for (int round = 0; round < 100; ++round) {
        std::string suffix = gen.program(3);
        auto clean = parse(suffix);
        ASSERT_TRUE(clean.errors.empty());
        std::string text = broken[round % broken.size()] + "\n" + suffix;
        auto r = parse(text);
        EXPECT_FALSE(r.errors.empty()) << text;
        ASSERT_GE(r.program.children.size(), clean.program.children.size()) << text;
        std::size_t offset = r.program.children.size() - clean.program.children.size();
        for (std::size_t i = 0; i < clean.program.children.size(); ++i) {
            EXPECT_TRUE(structurallyEqual(r.program.children[offset + i], clean.program.children[i])) << text;
        }
    }
}

TEST(ParserLimits, DeepInputIsRejectedNotCrashed) {
    for (std::string text : {std::string(100000, '(') + "1", std::string(100000, '-') + "x",
                             std::string(50000, '[') , [] {
                                 std::string s = "x = 1";
                                 for (int i = 0; i < 50000; ++i) s += " + 1";
                                 return s;
                             }(),
                             [] {
                                 std::string s = "a";
                                 for (int i = 0; i < 50000; ++i) s += ".b";
                                 return s;
                             }(),
                             std::string(50000, '{')}) {
        auto result = lang::parse(text);
        EXPECT_TRUE(hasErrors(result.errors));
    }
    auto ok = lang::parse("x = ((((1))))\ny = a.b.c(1)(2) { 3 }");
    EXPECT_TRUE(ok.errors.empty());
}
