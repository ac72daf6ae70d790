#include "livediag/lang/parser.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace livediag::lang {

namespace {

struct ParseFailure {
    Diagnostic diagnostic;
};

bool isComparison(const std::string& op) {
    return op == "==" || op == "!=" || op == "<" || op == ">" || op == "<=" || op == ">=";
}

bool isAdditive(const std::string& op) { return op == "+" || op == "-"; }

bool isMultiplicative(const std::string& op) { return op == "*" || op == "/" || op == "%"; }

class Parser {
public:
    Parser(const std::vector<Token>& tokens, std::size_t textLength)
        : tokens_(tokens), textLength_(textLength) {}

    ParseResult run() {
        AstNode program;
        program.kind = NodeKind::Program;
        program.span = Span{0, textLength_};
        program.children = statementList(/*inBlock=*/false);
        return ParseResult{std::move(program), std::move(errors_)};
    }

private:
    // -- token helpers -------------------------------------------------------

    bool atEnd() const { return pos_ >= tokens_.size(); }

    const Token* peek(std::size_t ahead = 0) const {
        return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
    }

    bool check(TokenKind kind) const { return !atEnd() && tokens_[pos_].kind == kind; }

    bool checkOp(std::string_view op) const {
        return check(TokenKind::Operator) && tokens_[pos_].text == op;
    }

    const Token& advance() { return tokens_[pos_++]; }

    Span here() const {
        if (atEnd()) {
            return Span{textLength_, textLength_};
        }
        return tokens_[pos_].span;
    }

    [[noreturn]] void fail(std::string expected) {
        std::string found = atEnd() ? "end of input" : "'" + tokens_[pos_].text + "'";
        if (!atEnd() && tokens_[pos_].kind == TokenKind::Separator) {
            found = tokens_[pos_].text == "\n" ? "end of line" : "';'";
        }
        throw ParseFailure{Diagnostic{Severity::Error, here(), "ParseError",
                                      "expected " + expected + ", found " + found}};
    }

    const Token& expect(TokenKind kind, const char* expected) {
        if (!check(kind)) {
            fail(expected);
        }
        return advance();
    }

    // Newlines continue an expression only inside parentheses or brackets.
    void continuation() {
        if (groupDepth_ > 0) {
            skipNewlines();
        }
    }

    void skipNewlines() {
        while (check(TokenKind::Separator) && tokens_[pos_].text == "\n") {
            ++pos_;
        }
    }

    // -- statements ----------------------------------------------------------

    std::vector<AstNode> statementList(bool inBlock) {
        std::vector<AstNode> statements;
        while (true) {
            while (check(TokenKind::Separator)) {
                ++pos_;
            }
            if (atEnd() || (inBlock && check(TokenKind::RBrace))) {
                break;
            }
            try {
                if (check(TokenKind::RBrace)) {
                    fail("statement");
                }
                AstNode statement = expression();
                if (!atEnd() && !check(TokenKind::Separator) && !(inBlock && check(TokenKind::RBrace))) {
                    fail(inBlock ? "newline, ';' or '}'" : "newline or ';'");
                }
                statements.push_back(std::move(statement));
            } catch (const ParseFailure& failure) {
                errors_.push_back(failure.diagnostic);
                recover(inBlock);
            }
        }
        return statements;
    }

    // Skips to the next statement boundary at the current nesting depth.
    void recover(bool inBlock) {
        int depth = 0;
        while (!atEnd()) {
            const Token& t = tokens_[pos_];
            switch (t.kind) {
            case TokenKind::LParen:
            case TokenKind::LBracket:
            case TokenKind::LBrace:
                ++depth;
                break;
            case TokenKind::RParen:
            case TokenKind::RBracket:
                if (depth > 0) {
                    --depth;
                }
                break;
            case TokenKind::RBrace:
                if (depth == 0) {
                    if (inBlock) {
                        return;
                    }
                    // stray '}' at top level: drop it
                    ++pos_;
                    return;
                }
                --depth;
                break;
            case TokenKind::Separator:
                if (depth == 0) {
                    return;
                }
                break;
            default:
                break;
            }
            ++pos_;
        }
    }

    // -- expressions ---------------------------------------------------------

    AstNode expression() {
        NestingGuard guard(*this);
        return assignment();
    }

    // Each link of an operator or postfix chain deepens the tree by one.
    struct ChainGuard {
        explicit ChainGuard(Parser& parser) : parser(parser) {}
        void step() {
            ++links;
            if (++parser.nesting_ > kMaxNesting) {
                parser.fail("a shorter expression (nesting limit " + std::to_string(kMaxNesting) + ")");
            }
        }
        ~ChainGuard() { parser.nesting_ -= links; }
        Parser& parser;
        int links = 0;
    };

    struct NestingGuard {
        explicit NestingGuard(Parser& parser) : parser(parser) {
            if (++parser.nesting_ > kMaxNesting) {
                --parser.nesting_;
                parser.fail("shallower nesting (limit " + std::to_string(kMaxNesting) + ")");
            }
        }
        ~NestingGuard() { --parser.nesting_; }
        Parser& parser;
    };

    AstNode assignment() {
        AstNode target = customTier();
        if (checkOp("=")) {
            if (target.kind != NodeKind::Ident && target.kind != NodeKind::FieldAccess) {
                throw ParseFailure{Diagnostic{Severity::Error, target.span, "ParseError",
                                              "expected identifier or field access before '='"}};
            }
            advance();
            continuation();
            NestingGuard guard(*this);
            AstNode value = assignment();
            return makeNode(NodeKind::Assign, Span{target.span.start, value.span.end},
                            std::move(target), std::move(value));
        }
        return target;
    }

    bool atCustomOperator() const {
        if (check(TokenKind::Ident)) {
            // juxtaposed identifier after an operand is an infix call
            const std::string& name = tokens_[pos_].text;
            return name != "true" && name != "false" && name != "null";
        }
        if (!check(TokenKind::Operator)) {
            return false;
        }
        const std::string& op = tokens_[pos_].text;
        return op != "=" && op != "." && !isComparison(op) && !isAdditive(op) && !isMultiplicative(op);
    }

    AstNode customTier() {
        ChainGuard chain(*this);
        AstNode lhs = comparison();
        while (atCustomOperator()) {
            chain.step();
            const Token& op = advance();
            continuation();
            AstNode rhs = comparison();
            lhs = makeInfix(std::move(lhs), op, std::move(rhs));
        }
        return lhs;
    }

    AstNode comparison() {
        ChainGuard chain(*this);
        AstNode lhs = additive();
        while (check(TokenKind::Operator) && isComparison(tokens_[pos_].text)) {
            chain.step();
            const Token& op = advance();
            continuation();
            AstNode rhs = additive();
            lhs = makeInfix(std::move(lhs), op, std::move(rhs));
        }
        return lhs;
    }

    AstNode additive() {
        ChainGuard chain(*this);
        AstNode lhs = multiplicative();
        while (check(TokenKind::Operator) && isAdditive(tokens_[pos_].text)) {
            chain.step();
            const Token& op = advance();
            continuation();
            AstNode rhs = multiplicative();
            lhs = makeInfix(std::move(lhs), op, std::move(rhs));
        }
        return lhs;
    }

    AstNode multiplicative() {
        ChainGuard chain(*this);
        AstNode lhs = unary();
        while (check(TokenKind::Operator) && isMultiplicative(tokens_[pos_].text)) {
            chain.step();
            const Token& op = advance();
            continuation();
            AstNode rhs = unary();
            lhs = makeInfix(std::move(lhs), op, std::move(rhs));
        }
        return lhs;
    }

    AstNode unary() {
        if (checkOp("-") || checkOp("!")) {
            const Token& op = advance();
            // `-12` written without a gap is a single negative literal, which
            // keeps coordinates editable as one span
            if (op.text == "-" && check(TokenKind::Number) && tokens_[pos_].span.start == op.span.end) {
                const Token& number = advance();
                AstNode literal;
                literal.kind = NodeKind::NumberLit;
                literal.span = Span{op.span.start, number.span.end};
                literal.number = -number.number;
                return postfix(std::move(literal));
            }
            NestingGuard guard(*this);
            AstNode operand = unary();
            AstNode callee;
            callee.kind = NodeKind::Ident;
            callee.span = op.span;
            callee.text = std::string(kPrefixOperatorPrefix) + op.text;
            Span span{op.span.start, operand.span.end};
            return makeNode(NodeKind::Call, span, std::move(callee), std::move(operand));
        }
        return postfix(primary());
    }

    AstNode postfix(AstNode node) {
        ChainGuard chain(*this);
        while (true) {
            chain.step();
            if (check(TokenKind::LParen)) {
                advance();
                std::vector<AstNode> args = argumentList(TokenKind::RParen, "')'");
                std::size_t end = advance().span.end;
                AstNode call;
                call.kind = NodeKind::Call;
                call.span = Span{node.span.start, end};
                call.children.push_back(std::move(node));
                for (auto& a : args) {
                    call.children.push_back(std::move(a));
                }
                node = std::move(call);
            } else if (checkOp(".") && peek(1) && peek(1)->kind == TokenKind::Ident) {
                advance();
                const Token& name = advance();
                AstNode access;
                access.kind = NodeKind::FieldAccess;
                access.span = Span{node.span.start, name.span.end};
                access.text = name.text;
                access.opSpan = name.span;
                access.children.push_back(std::move(node));
                node = std::move(access);
            } else if (check(TokenKind::LBrace) && acceptsTrailingBlock(node)) {
                AstNode block = functionLiteral();
                if (node.kind != NodeKind::Call) {
                    AstNode call;
                    call.kind = NodeKind::Call;
                    call.span = node.span;
                    call.children.push_back(std::move(node));
                    node = std::move(call);
                }
                node.span.end = block.span.end;
                node.children.push_back(std::move(block));
            } else {
                return node;
            }
        }
    }

    static bool acceptsTrailingBlock(const AstNode& node) {
        return node.kind == NodeKind::Call || node.kind == NodeKind::Ident || node.kind == NodeKind::FieldAccess;
    }

    std::vector<AstNode> argumentList(TokenKind close, const char* closeName) {
        GroupScope group(groupDepth_, 1);
        std::vector<AstNode> args;
        skipNewlines();
        if (check(close)) {
            return args;
        }
        while (true) {
            skipNewlines();
            args.push_back(expression());
            skipNewlines();
            if (check(TokenKind::Comma)) {
                advance();
                continue;
            }
            if (check(close)) {
                return args;
            }
            fail(std::string("',' or ") + closeName);
        }
    }

    AstNode primary() {
        if (atEnd()) {
            fail("expression");
        }
        const Token& t = tokens_[pos_];
        switch (t.kind) {
        case TokenKind::Number: {
            advance();
            AstNode n;
            n.kind = NodeKind::NumberLit;
            n.span = t.span;
            n.number = t.number;
            return n;
        }
        case TokenKind::String: {
            advance();
            AstNode n;
            n.kind = NodeKind::StringLit;
            n.span = t.span;
            n.text = t.text;
            return n;
        }
        case TokenKind::Ident: {
            advance();
            AstNode n;
            n.span = t.span;
            if (t.text == "true" || t.text == "false") {
                n.kind = NodeKind::BoolLit;
                n.boolean = t.text == "true";
            } else if (t.text == "null") {
                n.kind = NodeKind::NullLit;
            } else {
                n.kind = NodeKind::Ident;
                n.text = t.text;
            }
            return n;
        }
        case TokenKind::LParen: {
            std::size_t start = advance().span.start;
            GroupScope group(groupDepth_, 1);
            skipNewlines();
            AstNode inner = expression();
            skipNewlines();
            std::size_t end = expect(TokenKind::RParen, "')'").span.end;
            // the parentheses belong to the node so that enclosing spans stay re-parsable
            inner.span = Span{start, end};
            return inner;
        }
        case TokenKind::LBracket: {
            std::size_t start = advance().span.start;
            AstNode list;
            list.kind = NodeKind::ListLit;
            list.children = argumentList(TokenKind::RBracket, "']'");
            list.span = Span{start, advance().span.end};
            return list;
        }
        case TokenKind::LBrace:
            return functionLiteral();
        default:
            fail("expression");
        }
    }

    // Detects `(a, b) ->` or `a ->` at the start of a block.
    bool parameterHeader(std::vector<std::string>& params) {
        std::size_t save = pos_;
        skipNewlines();
        std::vector<std::string> names;
        if (check(TokenKind::LParen)) {
            advance();
            while (check(TokenKind::Ident)) {
                names.push_back(advance().text);
                if (check(TokenKind::Comma)) {
                    advance();
                } else {
                    break;
                }
            }
            if (!check(TokenKind::RParen)) {
                pos_ = save;
                return false;
            }
            advance();
        } else if (check(TokenKind::Ident)) {
            names.push_back(advance().text);
        } else {
            pos_ = save;
            return false;
        }
        if (!checkOp("->")) {
            pos_ = save;
            return false;
        }
        advance();
        params = std::move(names);
        return true;
    }

    AstNode functionLiteral() {
        std::size_t start = expect(TokenKind::LBrace, "'{'").span.start;
        AstNode fn;
        fn.kind = NodeKind::FunctionLit;
        fn.explicitParams = parameterHeader(fn.params);
        {
            GroupScope block(groupDepth_, -groupDepth_);
            fn.children = statementList(/*inBlock=*/true);
        }
        std::size_t end = expect(TokenKind::RBrace, "'}'").span.end;
        fn.span = Span{start, end};
        return fn;
    }

    AstNode makeInfix(AstNode lhs, const Token& op, AstNode rhs) {
        AstNode node = makeNode(NodeKind::InfixCall, Span{lhs.span.start, rhs.span.end}, std::move(lhs), std::move(rhs));
        node.text = op.text;
        node.opSpan = op.span;
        return node;
    }

    static AstNode makeNode(NodeKind kind, Span span, AstNode a, AstNode b) {
        AstNode node;
        node.kind = kind;
        node.span = span;
        node.children.reserve(2);
        node.children.push_back(std::move(a));
        node.children.push_back(std::move(b));
        return node;
    }

    struct GroupScope {
        GroupScope(int& depth, int delta) : depth_(depth), delta_(delta) { depth_ += delta_; }
        ~GroupScope() { depth_ -= delta_; }
        int& depth_;
        int delta_;
    };

    const std::vector<Token>& tokens_;
    std::size_t textLength_;
    int groupDepth_ = 0;
    int nesting_ = 0;
    static constexpr int kMaxNesting = 1000;
    std::size_t pos_ = 0;
    Diagnostics errors_;
};

}  // namespace

ParseResult parse(const std::vector<Token>& tokens, std::size_t textLength) {
    return Parser(tokens, textLength).run();
}

ParseResult parse(std::string_view text) {
    LexResult lexed = tokenize(text);
    ParseResult result = parse(lexed.tokens, text.size());
    result.errors.insert(result.errors.begin(), lexed.errors.begin(), lexed.errors.end());
    std::stable_sort(result.errors.begin(), result.errors.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.span.start < b.span.start; });
    return result;
}

}  // namespace livediag::lang
