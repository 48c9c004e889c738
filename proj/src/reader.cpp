#include <mgrew/reader.hpp>

#include <mgrew/base64.hpp>
#include <mgrew/errors.hpp>

#include <cctype>

namespace mgrew {

namespace {

enum class TokenKind { LParen, RParen, Bare, String, End };

struct Token {
    TokenKind kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_blank();
        const std::size_t line = line_;
        const std::size_t col = column_;
        if (at_end()) return {TokenKind::End, {}, line, col};
        const char c = peek();
        if (c == '(') {
            advance();
            return {TokenKind::LParen, "(", line, col};
        }
        if (c == ')') {
            advance();
            return {TokenKind::RParen, ")", line, col};
        }
        if (c == '"') return read_string(line, col);
        return read_bare(line, col);
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (!at_end()) {
            const char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == ';') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    Token read_string(std::size_t line, std::size_t col) {
        advance();  // opening quote
        std::string value;
        while (true) {
            if (at_end()) throw ParseError(line, col, "unterminated string literal");
            const char c = peek();
            advance();
            if (c == '"') break;
            if (c == '\\') {
                if (at_end()) throw ParseError(line, col, "unterminated string literal");
                const char esc = peek();
                advance();
                if (esc != '"' && esc != '\\') {
                    throw ParseError(line_, column_, "invalid escape sequence");
                }
                value += esc;
            } else {
                value += c;
            }
        }
        if (value.empty()) throw ParseError(line, col, "empty string literal");
        return {TokenKind::String, std::move(value), line, col};
    }

    Token read_bare(std::size_t line, std::size_t col) {
        std::string value;
        while (!at_end()) {
            const char c = peek();
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
                c == '"' || c == ';') {
                break;
            }
            if (c == '\\') throw ParseError(line_, column_, "backslash outside string literal");
            value += c;
            advance();
        }
        return {TokenKind::Bare, std::move(value), line, col};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& options)
        : lexer_(text), options_(options) {
        current_ = lexer_.next();
    }

    bool at_end() const { return current_.kind == TokenKind::End; }

    Expression expression() {
        const Token token = current_;
        switch (token.kind) {
            case TokenKind::End:
                throw ParseError(token.line, token.column, "unexpected end of input");
            case TokenKind::RParen:
                throw ParseError(token.line, token.column, "unexpected ')'");
            case TokenKind::String:
                consume();
                return Expression::symbol(token.text);
            case TokenKind::Bare:
                consume();
                return leaf(token);
            case TokenKind::LParen:
                consume();
                return list(token);
        }
        throw ParseError(token.line, token.column, "unreachable token kind");
    }

    void expect_end() const {
        if (!at_end()) {
            throw ParseError(current_.line, current_.column, "trailing content after expression");
        }
    }

private:
    void consume() { current_ = lexer_.next(); }

    Expression leaf(const Token& token) {
        const std::string& text = token.text;
        if (text[0] == '$') {
            if (text.size() == 1) throw ParseError(token.line, token.column, "empty variable name");
            return Expression::variable(text.substr(1));
        }
        if (text[0] == '&') {
            if (text.size() == 1) {
                throw ParseError(token.line, token.column, "empty grounded symbol name");
            }
            return Expression::grounded(text.substr(1));
        }
        if (text[0] == '!') {
            throw ParseError(token.line, token.column, "unknown reader directive: " + text);
        }
        return Expression::symbol(text);
    }

    Expression list(const Token& open) {
        if (current_.kind == TokenKind::Bare && !current_.text.empty() &&
            current_.text[0] == '!') {
            if (current_.text == "!enrich") {
                consume();
                return enrich_directive(open);
            }
            if (current_.text == "!rule" && options_.allow_rule_directives) {
                consume();
                std::vector<Expression> children{Expression::symbol("!rule")};
                while (current_.kind != TokenKind::RParen) {
                    if (current_.kind == TokenKind::End) {
                        throw ParseError(open.line, open.column, "unclosed '('");
                    }
                    children.push_back(expression());
                }
                consume();
                return Expression::list(std::move(children));
            }
            throw ParseError(current_.line, current_.column,
                             "unknown reader directive: " + current_.text);
        }
        std::vector<Expression> children;
        while (current_.kind != TokenKind::RParen) {
            if (current_.kind == TokenKind::End) {
                throw ParseError(open.line, open.column, "unclosed '('");
            }
            children.push_back(expression());
        }
        consume();
        return Expression::list(std::move(children));
    }

    // (!enrich <kind-string> <base64-payload> <expr>)
    Expression enrich_directive(const Token& open) {
        if (current_.kind != TokenKind::String && current_.kind != TokenKind::Bare) {
            throw ParseError(current_.line, current_.column, "!enrich expects a kind string");
        }
        const std::string kind = current_.text;
        consume();
        if (current_.kind != TokenKind::Bare) {
            throw ParseError(current_.line, current_.column, "!enrich expects a base64 payload");
        }
        const Token payload_token = current_;
        consume();
        std::vector<std::uint8_t> payload;
        try {
            payload = base64::decode(payload_token.text);
        } catch (const Error& e) {
            throw ParseError(payload_token.line, payload_token.column, e.what());
        }
        Expression inner = expression();
        if (current_.kind != TokenKind::RParen) {
            throw ParseError(open.line, open.column, "!enrich takes exactly three arguments");
        }
        consume();
        if (inner.enrichment()) {
            throw ParseError(open.line, open.column, "expression is already enriched");
        }
        return inner.with_enrichment(Enrichment{kind, std::move(payload)});
    }

    Lexer lexer_;
    ParseOptions options_;
    Token current_;
};

}  // namespace

Expression parse(std::string_view text) {
    Parser parser(text, {});
    Expression expr = parser.expression();
    parser.expect_end();
    return expr;
}

std::vector<Expression> parse_stream(std::string_view text, const ParseOptions& options) {
    Parser parser(text, options);
    std::vector<Expression> out;
    while (!parser.at_end()) {
        out.push_back(parser.expression());
    }
    return out;
}

std::string dump(const Metagraph& space) {
    std::string out;
    for (const EdgeId& root : space.roots()) {
        out += space.lift(root).to_text();
        out += '\n';
    }
    return out;
}

Metagraph load(std::string_view text) {
    Metagraph space;
    for (const Expression& expr : parse_stream(text)) {
        space.add_expression(expr);
    }
    return space;
}

}  // namespace mgrew
