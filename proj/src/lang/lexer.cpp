#include "livediag/lang/lexer.hpp"

#include <charconv>
#include <string_view>

namespace livediag::lang {

const char* toString(TokenKind kind) {
    switch (kind) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::Operator: return "operator";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBrace: return "'{'";
    case TokenKind::RBrace: return "'}'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::Comma: return "','";
    case TokenKind::Separator: return "separator";
    }
    return "token";
}

bool isOperatorChar(char c) {
    switch (c) {
    case '+': case '-': case '*': case '/': case '%': case '<': case '>': case '=':
    case '!': case '&': case '|': case '#': case '?': case '~': case '.':
        return true;
    default:
        return false;
    }
}

namespace {

bool isIdentStart(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool isDigit(char c) { return c >= '0' && c <= '9'; }

bool isIdentChar(char c) { return isIdentStart(c) || isDigit(c); }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    LexResult run() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
            } else if (c == '\n' || c == ';') {
                push(TokenKind::Separator, pos_, pos_ + 1, std::string(1, c));
                ++pos_;
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (isIdentStart(c)) {
                lexIdent();
            } else if (isDigit(c)) {
                lexNumber();
            } else if (c == '"') {
                lexString();
            } else if (isOperatorChar(c)) {
                lexOperator();
            } else {
                lexPunct(c);
            }
        }
        return std::move(result_);
    }

private:
    char peek(std::size_t ahead) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void push(TokenKind kind, std::size_t start, std::size_t end, std::string text, double number = 0) {
        result_.tokens.push_back(Token{kind, Span{start, end}, std::move(text), number});
    }

    void error(std::size_t start, std::size_t end, std::string message) {
        result_.errors.push_back(Diagnostic{Severity::Error, Span{start, end}, "LexError", std::move(message)});
    }

    void lexIdent() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && isIdentChar(text_[pos_])) {
            ++pos_;
        }
        push(TokenKind::Ident, start, pos_, std::string(text_.substr(start, pos_ - start)));
    }

    void lexNumber() {
        std::size_t start = pos_;
        while (isDigit(peek(0))) {
            ++pos_;
        }
        if (peek(0) == '.' && isDigit(peek(1))) {
            ++pos_;
            while (isDigit(peek(0))) {
                ++pos_;
            }
        }
        if ((peek(0) == 'e' || peek(0) == 'E') &&
            (isDigit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && isDigit(peek(2))))) {
            pos_ += 2;
            while (isDigit(peek(0))) {
                ++pos_;
            }
        }
        std::string_view lexeme = text_.substr(start, pos_ - start);
        double value = 0;
        auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
        if (ec != std::errc() || ptr != lexeme.data() + lexeme.size()) {
            error(start, pos_, "invalid number literal");
        }
        push(TokenKind::Number, start, pos_, std::string(lexeme), value);
    }

    void lexString() {
        std::size_t start = pos_;
        ++pos_;
        std::string value;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '"') {
                ++pos_;
                push(TokenKind::String, start, pos_, std::move(value));
                return;
            }
            if (c == '\n') {
                break;
            }
            if (c == '\\') {
                char next = peek(1);
                switch (next) {
                case '"': value += '"'; break;
                case '\\': value += '\\'; break;
                case 'n': value += '\n'; break;
                default:
                    error(pos_, pos_ + 2, "unknown escape sequence");
                    value += next;
                    break;
                }
                pos_ += 2;
                continue;
            }
            value += c;
            ++pos_;
        }
        error(start, pos_, "unterminated string literal");
        push(TokenKind::String, start, pos_, std::move(value));
    }

    void lexOperator() {
        std::size_t start = pos_;
        // a run of operator characters, stopping before a comment start
        while (pos_ < text_.size() && isOperatorChar(text_[pos_])) {
            if (text_[pos_] == '/' && peek(1) == '/' && pos_ > start) {
                break;
            }
            ++pos_;
        }
        push(TokenKind::Operator, start, pos_, std::string(text_.substr(start, pos_ - start)));
    }

    void lexPunct(char c) {
        TokenKind kind;
        switch (c) {
        case '(': kind = TokenKind::LParen; break;
        case ')': kind = TokenKind::RParen; break;
        case '{': kind = TokenKind::LBrace; break;
        case '}': kind = TokenKind::RBrace; break;
        case '[': kind = TokenKind::LBracket; break;
        case ']': kind = TokenKind::RBracket; break;
        case ',': kind = TokenKind::Comma; break;
        default: {
            std::size_t start = pos_;
            // skip one full UTF-8 sequence so the error covers the character
            ++pos_;
            while (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80) {
                ++pos_;
            }
            error(start, pos_, "illegal character");
            return;
        }
        }
        push(kind, pos_, pos_ + 1, std::string(1, c));
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    LexResult result_;
};

}  // namespace

LexResult tokenize(std::string_view text) {
    return Lexer(text).run();
}

}  // namespace livediag::lang
