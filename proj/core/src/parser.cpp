#include "hype/parser.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hype/error.hpp"

namespace hype {

std::string ParseError::to_string() const {
    std::string out = span.to_string() + ": error: " + message;
    if (!expected.empty()) {
        out += " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            out += (i ? ", " : "") + expected[i];
        }
        out += ')';
    }
    return out;
}

namespace {

enum class Tok : std::uint8_t {
    Ident,
    Number,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semicolon,
    Colon,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Tilde,
    Prime,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    AndAnd,
    OrOr,
    Bang,
    End,
    Invalid,
};

const char* describe(Tok kind) {
    switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semicolon: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Tilde: return "'~'";
    case Tok::Prime: return "'''";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Eq: return "'='";
    case Tok::Ge: return "'>='";
    case Tok::Gt: return "'>'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Bang: return "'!'";
    case Tok::End: return "end of input";
    case Tok::Invalid: return "invalid character";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    SourceSpan span;
};

class Lexer {
  public:
    Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token token;
            token.span = {file_, line_, column_, 1};
            if (pos_ >= text_.size()) {
                token.kind = Tok::End;
                token.span.length = 0;
                out.push_back(std::move(token));
                return out;
            }
            const std::size_t start = pos_;
            const char c = text_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                    advance();
                }
                token.kind = Tok::Ident;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                lex_number();
                token.kind = Tok::Number;
                const auto digits = text_.substr(start, pos_ - start);
                auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), token.number);
                if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
                    token.kind = Tok::Invalid;
                }
            } else {
                token.kind = punctuation();
            }
            token.text = std::string(text_.substr(start, pos_ - start));
            token.span.length = pos_ - start;
            out.push_back(std::move(token));
        }
    }

  private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    advance();
                }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }

    bool digit_at(std::size_t i) const {
        return i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]));
    }

    void lex_number() {
        while (digit_at(pos_)) {
            advance();
        }
        if (pos_ < text_.size() && text_[pos_] == '.' && digit_at(pos_ + 1)) {
            advance();
            while (digit_at(pos_)) {
                advance();
            }
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
                ++look;
            }
            if (digit_at(look)) {
                while (pos_ < look) {
                    advance();
                }
                while (digit_at(pos_)) {
                    advance();
                }
            }
        }
    }

    Tok punctuation() {
        const char c = text_[pos_];
        const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
        auto two = [&](Tok kind) {
            advance();
            advance();
            return kind;
        };
        auto one = [&](Tok kind) {
            advance();
            return kind;
        };
        switch (c) {
        case '(': return one(Tok::LParen);
        case ')': return one(Tok::RParen);
        case '{': return one(Tok::LBrace);
        case '}': return one(Tok::RBrace);
        case ',': return one(Tok::Comma);
        case ';': return one(Tok::Semicolon);
        case ':': return one(Tok::Colon);
        case '.': return one(Tok::Dot);
        case '+': return one(Tok::Plus);
        case '-': return one(Tok::Minus);
        case '*': return one(Tok::Star);
        case '/': return one(Tok::Slash);
        case '~': return one(Tok::Tilde);
        case '\'': return one(Tok::Prime);
        case '<': return next == '=' ? two(Tok::Le) : one(Tok::Lt);
        case '>': return next == '=' ? two(Tok::Ge) : one(Tok::Gt);
        case '=': return next == '=' ? two(Tok::Eq) : one(Tok::Eq);
        case '&': return next == '&' ? two(Tok::AndAnd) : one(Tok::Invalid);
        case '|': return next == '|' ? two(Tok::OrOr) : one(Tok::Invalid);
        case '!': return one(Tok::Bang);
        default: break;
        }
        // Consume a whole UTF-8 sequence so the span covers one character.
        advance();
        while (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80) {
            advance();
        }
        return Tok::Invalid;
    }

    std::string_view text_;
    std::string file_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

struct SyntaxError {
    ParseError error;
};

// Result of parsing a controller body: a sequential term, a composition, or
// a bare name that can serve as either.
struct ControllerNode {
    std::optional<ControllerTerm> term;
    std::optional<CompositionTree> tree;
};

struct EventUse {
    std::string name;
    bool marked = false;
    SourceSpan span;
};

const std::set<std::string, std::less<>> kReserved = {
    "model", "param", "var", "type", "iv", "event", "ec", "subcomponent", "controller", "system", "sync",
    "true", "false", "and", "or", "not", "if", "then", "else", "min", "max", "pow",
};

class Parser {
  public:
    Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    std::optional<HypeModel> parse_file() {
        if (!is_keyword("model")) {
            errors_.push_back({peek().span, "expected model header", {"'model'"}, {}});
            return std::nullopt;
        }
        try {
            advance();
            model_.name = expect_name("model name").text;
            expect(Tok::Semicolon);
        } catch (const SyntaxError& e) {
            errors_.push_back(e.error);
            return std::nullopt;
        }
        while (peek().kind != Tok::End) {
            try {
                declaration();
            } catch (const SyntaxError& e) {
                errors_.push_back(e.error);
                recover();
            }
        }
        check_event_uses();
        if (!errors_.empty()) {
            return std::nullopt;
        }
        return std::move(model_);
    }

    Expr standalone_expression() {
        Expr e = expression();
        if (peek().kind != Tok::End) {
            fail("unexpected trailing input", {describe(Tok::End)});
        }
        return e;
    }

    std::vector<ParseError>& errors() { return errors_; }

  private:
    // --- token helpers -----------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const {
        return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
    }

    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (pos_ + 1 < tokens_.size()) {
            ++pos_;
        }
        return t;
    }

    bool is_keyword(std::string_view word, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Ident && t.text == word;
    }

    bool accept(Tok kind) {
        if (peek().kind == kind) {
            advance();
            return true;
        }
        return false;
    }

    bool accept_keyword(std::string_view word) {
        if (is_keyword(word)) {
            advance();
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(std::string message, std::vector<std::string> expected = {}) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw SyntaxError{{t.span, std::move(message) + ", found " + found, std::move(expected), {}}};
    }

    const Token& expect(Tok kind) {
        if (peek().kind != kind) {
            fail(std::string("expected ") + describe(kind), {describe(kind)});
        }
        return advance();
    }

    void expect_keyword(std::string_view word) {
        if (!is_keyword(word)) {
            fail("expected '" + std::string(word) + "'", {"'" + std::string(word) + "'"});
        }
        advance();
    }

    const Token& expect_name(const char* what) {
        const Token& t = peek();
        if (t.kind != Tok::Ident) {
            fail(std::string("expected ") + what, {describe(Tok::Ident)});
        }
        if (kReserved.contains(t.text)) {
            fail(std::string("expected ") + what + ", '" + t.text + "' is reserved", {describe(Tok::Ident)});
        }
        return advance();
    }

    std::vector<std::string> name_list(const char* what) {
        std::vector<std::string> out;
        if (peek().kind == Tok::RParen) {
            return out;
        }
        do {
            out.push_back(expect_name(what).text);
        } while (accept(Tok::Comma));
        return out;
    }

    // Skips to just past the next ';' at bracket depth zero.
    void recover() {
        int depth = 0;
        while (peek().kind != Tok::End) {
            const Tok kind = advance().kind;
            if (kind == Tok::LParen || kind == Tok::LBrace) {
                ++depth;
            } else if ((kind == Tok::RParen || kind == Tok::RBrace) && depth > 0) {
                --depth;
            } else if (kind == Tok::Semicolon && depth == 0) {
                return;
            }
        }
    }

    // --- declarations ------------------------------------------------------

    void declaration() {
        const Token& head = peek();
        const SourceSpan span = head.span;
        if (head.kind != Tok::Ident) {
            fail("expected a declaration", {"'param'", "'var'", "'type'", "'iv'", "'event'", "'ec'",
                                            "'subcomponent'", "'controller'", "'system'"});
        }
        const std::string word = head.text;
        if (word == "param") {
            advance();
            Parameter p;
            p.name = expect_name("parameter name").text;
            p.span.value = span;
            expect(Tok::Eq);
            p.value = signed_number();
            model_.parameters.push_back(std::move(p));
        } else if (word == "var") {
            advance();
            do {
                const Token& t = expect_name("variable name");
                model_.variables.push_back({t.text, {t.span}});
            } while (accept(Tok::Comma));
        } else if (word == "type") {
            advance();
            InfluenceType type;
            type.span.value = span;
            type.name = expect_name("influence type name").text;
            if (accept(Tok::LParen)) {
                type.formals = name_list("formal parameter");
                expect(Tok::RParen);
            }
            expect(Tok::Eq);
            type.body = expression();
            model_.influence_types.push_back(std::move(type));
        } else if (word == "iv") {
            advance();
            InfluenceVariable binding;
            binding.span.value = span;
            binding.influence = expect_name("influence name").text;
            expect(Tok::Eq);
            binding.variable = expect_name("variable name").text;
            model_.influence_variables.push_back(std::move(binding));
        } else if (word == "event") {
            advance();
            do {
                const SourceSpan at = peek().span;
                const bool stochastic = accept(Tok::Tilde);
                const Token& t = expect_name("event name");
                model_.events.push_back(
                    {t.text, stochastic ? EventKind::Stochastic : EventKind::Instantaneous, {at}});
            } while (accept(Tok::Comma));
        } else if (word == "ec") {
            advance();
            event_condition(span);
        } else if (word == "subcomponent") {
            advance();
            subcomponent(span);
        } else if (word == "controller") {
            advance();
            controller(span);
        } else if (word == "system") {
            advance();
            system(span);
        } else {
            fail("expected a declaration", {"'param'", "'var'", "'type'", "'iv'", "'event'", "'ec'",
                                            "'subcomponent'", "'controller'", "'system'"});
        }
        expect(Tok::Semicolon);
    }

    double signed_number() {
        const bool negative = accept(Tok::Minus);
        if (!negative) {
            accept(Tok::Plus);
        }
        const double value = expect(Tok::Number).number;
        return negative ? -value : value;
    }

    EventUse event_name() {
        EventUse use;
        use.span = peek().span;
        use.marked = accept(Tok::Tilde);
        use.name = expect_name("event name").text;
        event_uses_.push_back(use);
        return use;
    }

    void event_condition(const SourceSpan& span) {
        expect(Tok::LParen);
        const EventUse event = event_name();
        expect(Tok::RParen);
        expect(Tok::Eq);
        expect(Tok::LParen);
        EventConditionDecl decl;
        decl.span.value = span;
        decl.event = event.name;
        decl.condition.kind = event.marked ? EventKind::Stochastic : EventKind::Instantaneous;
        decl.condition.activation = expression();
        expect(Tok::Comma);
        decl.condition.reset = reset();
        expect(Tok::RParen);
        pending_conditions_.push_back(model_.conditions.size());
        model_.conditions.push_back(std::move(decl));
    }

    Reset reset() {
        Reset out;
        if (accept_keyword("true")) {
            return out;
        }
        do {
            Assignment a;
            a.variable = expect_name("reset variable").text;
            expect(Tok::Prime);
            expect(Tok::Eq);
            a.value = additive();
            out.push_back(std::move(a));
        } while (accept_keyword("and") || accept(Tok::AndAnd));
        return out;
    }

    void subcomponent(const SourceSpan& span) {
        Subcomponent sub;
        sub.span.value = span;
        sub.name = expect_name("subcomponent name").text;
        if (accept(Tok::LParen)) {
            sub.formals = name_list("formal parameter");
            expect(Tok::RParen);
        }
        expect(Tok::Eq);
        do {
            sub.branches.push_back(branch());
        } while (accept(Tok::Plus));
        model_.subcomponents.push_back(std::move(sub));
    }

    Branch branch() {
        Branch b;
        b.span.value = peek().span;
        b.event = event_name().name;
        expect(Tok::Colon);
        expect(Tok::LParen);
        b.influence.name = expect_name("influence name").text;
        expect(Tok::Comma);
        b.influence.strength = expression();
        expect(Tok::Comma);
        b.influence.type = expect_name("influence type").text;
        if (accept(Tok::LParen)) {
            b.influence.arguments = name_list("influence argument");
            expect(Tok::RParen);
        }
        expect(Tok::RParen);
        expect(Tok::Dot);
        b.target = expect_name("subcomponent name").text;
        if (accept(Tok::LParen)) {
            b.target_arguments = name_list("argument");
            expect(Tok::RParen);
        }
        return b;
    }

    // --- controllers -------------------------------------------------------

    void controller(const SourceSpan& span) {
        const std::string name = expect_name("controller name").text;
        expect(Tok::Eq);
        ControllerNode body = controller_expression();
        if (body.term) {
            model_.controllers.push_back({name, *body.term, {span}});
        } else {
            model_.controller_compositions.push_back({name, *body.tree, {span}});
        }
    }

    ControllerNode controller_expression() {
        ControllerNode left = controller_sum();
        while (is_keyword("sync")) {
            const SourceSpan span = peek().span;
            advance();
            auto events = sync_set();
            ControllerNode right = controller_sum();
            left = {std::nullopt, CompositionTree::sync(as_tree(left, span), std::move(events),
                                                        as_tree(right, span), span)};
        }
        return left;
    }

    CompositionTree as_tree(const ControllerNode& node, const SourceSpan& span) const {
        if (!node.tree) {
            throw SyntaxError{{span, "operands of 'sync' between controllers must be controller names", {}, {}}};
        }
        return *node.tree;
    }

    ControllerTerm as_term(const ControllerNode& node, const SourceSpan& span) const {
        if (!node.term) {
            throw SyntaxError{{span, "a controller composition cannot appear inside a sequential term", {}, {}}};
        }
        return *node.term;
    }

    ControllerNode controller_sum() {
        const SourceSpan span = peek().span;
        ControllerNode first = controller_prefix();
        if (peek().kind != Tok::Plus) {
            return first;
        }
        std::vector<ControllerTerm> summands{as_term(first, span)};
        while (accept(Tok::Plus)) {
            const SourceSpan at = peek().span;
            summands.push_back(as_term(controller_prefix(), at));
        }
        return {ControllerTerm::choice(std::move(summands)), std::nullopt};
    }

    ControllerNode controller_prefix() {
        const Token& t = peek();
        const bool prefix = t.kind == Tok::Tilde || (t.kind == Tok::Ident && peek(1).kind == Tok::Dot);
        if (prefix) {
            const EventUse event = event_name();
            expect(Tok::Dot);
            const SourceSpan at = peek().span;
            ControllerTerm next = as_term(controller_prefix(), at);
            return {ControllerTerm::prefix(event.name, std::move(next)), std::nullopt};
        }
        if (t.kind == Tok::Number && t.text == "0") {
            advance();
            return {ControllerTerm::zero(), std::nullopt};
        }
        if (accept(Tok::LParen)) {
            ControllerNode inner = controller_expression();
            expect(Tok::RParen);
            // A parenthesized name stays usable as a composition leaf.
            return inner;
        }
        if (t.kind == Tok::Ident) {
            const Token& name = expect_name("controller name");
            return {ControllerTerm::reference(name.text), CompositionTree::leaf(name.text, {}, name.span)};
        }
        fail("expected a controller term", {"event", "'0'", "'('", "controller name"});
    }

    std::set<std::string> sync_set() {
        expect(Tok::LBrace);
        std::set<std::string> events;
        if (peek().kind != Tok::RBrace) {
            do {
                events.insert(event_name().name);
            } while (accept(Tok::Comma));
        }
        expect(Tok::RBrace);
        return events;
    }

    // --- systems -----------------------------------------------------------

    void system(const SourceSpan& span) {
        const std::string name = expect_name("system name").text;
        expect(Tok::Eq);
        CompositionTree tree = system_atom();
        while (is_keyword("sync")) {
            const SourceSpan at = peek().span;
            advance();
            auto events = sync_set();
            if (is_keyword("init") && peek(1).kind == Tok::Dot) {
                advance();
                advance();
                ControlledSystem top;
                top.name = name;
                top.span.value = span;
                top.uncontrolled = std::move(tree);
                top.sync = std::move(events);
                top.controller = controller_operand();
                if (is_keyword("sync")) {
                    fail("the controlled system must end with 'init.<controller>'", {"';'"});
                }
                if (model_.controlled) {
                    throw SyntaxError{{span, "duplicate definition of the controlled system '" + name + "'", {}, {}}};
                }
                model_.controlled = std::move(top);
                return;
            }
            tree = CompositionTree::sync(std::move(tree), std::move(events), system_atom(), at);
        }
        model_.systems.push_back({name, std::move(tree), {span}});
    }

    CompositionTree controller_operand() {
        const SourceSpan span = peek().span;
        if (accept(Tok::LParen)) {
            ControllerNode inner = controller_expression();
            expect(Tok::RParen);
            return as_tree(inner, span);
        }
        const Token& name = expect_name("controller name");
        return CompositionTree::leaf(name.text, {}, name.span);
    }

    CompositionTree system_atom() {
        if (accept(Tok::LParen)) {
            CompositionTree inner = system_atom();
            while (is_keyword("sync")) {
                const SourceSpan at = peek().span;
                advance();
                auto events = sync_set();
                inner = CompositionTree::sync(std::move(inner), std::move(events), system_atom(), at);
            }
            expect(Tok::RParen);
            return inner;
        }
        const Token& name = expect_name("subcomponent or system name");
        const SourceSpan span = name.span;
        std::vector<std::string> arguments;
        std::string text = name.text;
        if (accept(Tok::LParen)) {
            arguments = name_list("argument");
            expect(Tok::RParen);
        }
        return CompositionTree::leaf(std::move(text), std::move(arguments), span);
    }

    // --- expressions -------------------------------------------------------

    Expr expression() {
        if (accept_keyword("if")) {
            Expr condition = expression();
            expect_keyword("then");
            Expr then_branch = expression();
            expect_keyword("else");
            Expr else_branch = expression();
            return Expr::cond(std::move(condition), std::move(then_branch), std::move(else_branch));
        }
        return disjunction();
    }

    Expr disjunction() {
        Expr left = conjunction();
        while (accept_keyword("or") || accept(Tok::OrOr)) {
            left = Expr::binary(Op::Or, std::move(left), conjunction());
        }
        return left;
    }

    Expr conjunction() {
        Expr left = negation();
        while (accept_keyword("and") || accept(Tok::AndAnd)) {
            left = Expr::binary(Op::And, std::move(left), negation());
        }
        return left;
    }

    Expr negation() {
        if (accept_keyword("not") || accept(Tok::Bang)) {
            return Expr::unary(Op::Not, negation());
        }
        return comparison();
    }

    Expr comparison() {
        Expr left = additive();
        Op op;
        switch (peek().kind) {
        case Tok::Lt: op = Op::Lt; break;
        case Tok::Le: op = Op::Le; break;
        case Tok::Eq: op = Op::Eq; break;
        case Tok::Ge: op = Op::Ge; break;
        case Tok::Gt: op = Op::Gt; break;
        default: return left;
        }
        advance();
        return Expr::binary(op, std::move(left), additive());
    }

    Expr additive() {
        Expr left = multiplicative();
        for (;;) {
            if (accept(Tok::Plus)) {
                left = Expr::binary(Op::Add, std::move(left), multiplicative());
            } else if (accept(Tok::Minus)) {
                left = Expr::binary(Op::Sub, std::move(left), multiplicative());
            } else {
                return left;
            }
        }
    }

    Expr multiplicative() {
        Expr left = unary();
        for (;;) {
            if (accept(Tok::Star)) {
                left = Expr::binary(Op::Mul, std::move(left), unary());
            } else if (accept(Tok::Slash)) {
                left = Expr::binary(Op::Div, std::move(left), unary());
            } else {
                return left;
            }
        }
    }

    Expr unary() {
        if (accept(Tok::Minus)) {
            if (peek().kind == Tok::Number) {
                return Expr::number(-advance().number);
            }
            return Expr::unary(Op::Neg, unary());
        }
        return primary();
    }

    Expr primary() {
        const Token& t = peek();
        if (t.kind == Tok::Number) {
            return Expr::number(advance().number);
        }
        if (accept(Tok::LParen)) {
            Expr inner = expression();
            expect(Tok::RParen);
            return inner;
        }
        if (t.kind == Tok::Ident) {
            if (t.text == "true" || t.text == "false") {
                return Expr::boolean(advance().text == "true");
            }
            for (auto [word, op] : {std::pair{"min", Op::Min}, {"max", Op::Max}, {"pow", Op::Pow}}) {
                if (t.text == word) {
                    advance();
                    expect(Tok::LParen);
                    Expr a = expression();
                    expect(Tok::Comma);
                    Expr b = expression();
                    expect(Tok::RParen);
                    return Expr::binary(op, std::move(a), std::move(b));
                }
            }
            if (t.text == "if") {
                fail("a conditional operand must be parenthesized", {"'('"});
            }
            return Expr::name(expect_name("expression").text);
        }
        fail("expected an expression", {describe(Tok::Number), describe(Tok::Ident), "'('"});
    }

    // --- post-parse --------------------------------------------------------

    void check_event_uses() {
        for (const auto& use : event_uses_) {
            if (!use.marked) {
                continue;
            }
            const auto kind = model_.event_kind(use.name);
            if (kind && *kind == EventKind::Instantaneous) {
                errors_.push_back({use.span, "event '" + use.name + "' is instantaneous but marked '~'", {}, {}});
            }
        }
        // An unmarked ec of a stochastic event takes its kind from the declaration.
        for (std::size_t index : pending_conditions_) {
            auto& decl = model_.conditions[index];
            if (model_.event_kind(decl.event) == EventKind::Stochastic) {
                decl.condition.kind = EventKind::Stochastic;
            }
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    HypeModel model_;
    std::vector<ParseError> errors_;
    std::vector<EventUse> event_uses_;
    std::vector<std::size_t> pending_conditions_;
};

// --- printing ----------------------------------------------------------------

std::string event_text(const std::string& event, const HypeModel* model) {
    if (model != nullptr && model->event_kind(event) == EventKind::Stochastic) {
        return "~" + event;
    }
    return event;
}

void print_term(const ControllerTerm& term, const HypeModel* model, std::string& out) {
    switch (term.kind()) {
    case ControllerTerm::Kind::Zero:
        out += '0';
        return;
    case ControllerTerm::Kind::Reference:
        out += term.name();
        return;
    case ControllerTerm::Kind::Prefix: {
        out += event_text(term.name(), model) + ".";
        const auto& next = term.children().front();
        if (next.kind() == ControllerTerm::Kind::Choice) {
            out += '(';
            print_term(next, model, out);
            out += ')';
        } else {
            print_term(next, model, out);
        }
        return;
    }
    case ControllerTerm::Kind::Choice: {
        bool first = true;
        for (const auto& summand : term.children()) {
            out += first ? "" : " + ";
            first = false;
            if (summand.kind() == ControllerTerm::Kind::Choice) {
                out += '(';
                print_term(summand, model, out);
                out += ')';
            } else {
                print_term(summand, model, out);
            }
        }
        return;
    }
    }
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? ", " : "") + items[i];
    }
    return out;
}

std::string sync_text(const std::set<std::string>& events, const HypeModel& model) {
    std::vector<std::string> items;
    for (const auto& e : events) {
        items.push_back(event_text(e, &model));
    }
    return "sync{" + join(items) + "}";
}

void print_tree(const CompositionTree& tree, const HypeModel& model, std::string& out) {
    if (tree.is_leaf()) {
        out += tree.name();
        if (!tree.arguments().empty()) {
            out += "(" + join(tree.arguments()) + ")";
        }
        return;
    }
    print_tree(tree.left(), model, out);
    out += " " + sync_text(tree.events(), model) + " ";
    if (tree.right().is_leaf()) {
        print_tree(tree.right(), model, out);
    } else {
        out += '(';
        print_tree(tree.right(), model, out);
        out += ')';
    }
}

// Reset right-hand sides are parsed at additive level.
std::string reset_value(const Expr& e) {
    switch (e.op()) {
    case Op::Cond:
    case Op::Or:
    case Op::And:
    case Op::Not:
    case Op::Lt:
    case Op::Le:
    case Op::Eq:
    case Op::Ge:
    case Op::Gt:
        return "(" + to_string(e) + ")";
    default:
        return to_string(e);
    }
}

std::string reset_text(const Reset& reset) {
    if (reset.empty()) {
        return "true";
    }
    std::string out;
    for (std::size_t i = 0; i < reset.size(); ++i) {
        out += (i ? " and " : "") + reset[i].variable + "' = " + reset_value(reset[i].value);
    }
    return out;
}

} // namespace

std::string to_string(const ControllerTerm& term, const HypeModel* model) {
    std::string out;
    print_term(term, model, out);
    return out;
}

ParseResult parse_model(std::string_view text, std::string file) {
    Parser parser(Lexer(text, std::move(file)).run());
    ParseResult result;
    result.model = parser.parse_file();
    result.errors = std::move(parser.errors());
    if (result.model) {
        for (auto& violation : validate(*result.model)) {
            result.errors.push_back({violation.span, violation.message, {}, violation.kind});
        }
    }
    return result;
}

ParseResult parse_model_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParseResult result;
        result.errors.push_back({{path.string(), 1, 1, 0}, "cannot read file", {}, {}});
        return result;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str(), path.string());
}

namespace {

HypeModel unwrap(ParseResult result) {
    if (result.ok()) {
        return std::move(*result.model);
    }
    std::string message;
    for (const auto& error : result.errors) {
        message += (message.empty() ? "" : "\n") + error.to_string();
    }
    throw ModelError(message, result.errors.empty() ? SourceSpan{} : result.errors.front().span);
}

} // namespace

HypeModel load_model(std::string_view text, std::string file) { return unwrap(parse_model(text, std::move(file))); }

HypeModel load_model_file(const std::filesystem::path& path) { return unwrap(parse_model_file(path)); }

Expr parse_expression(std::string_view text) {
    Parser parser(Lexer(text, "<expression>").run());
    try {
        return parser.standalone_expression();
    } catch (const SyntaxError& e) {
        throw ModelError(e.error.to_string(), e.error.span);
    }
}

std::string pretty_print(const HypeModel& model) {
    std::ostringstream out;
    out << "model " << model.name << ";\n";

    if (!model.parameters.empty()) {
        out << '\n';
        for (const auto& p : model.parameters) {
            out << "param " << p.name << " = " << format_number(p.value) << ";\n";
        }
    }
    if (!model.variables.empty()) {
        out << "\nvar " << join(model.variable_names()) << ";\n";
    }
    if (!model.influence_types.empty()) {
        out << '\n';
        for (const auto& t : model.influence_types) {
            out << "type " << t.name;
            if (!t.formals.empty()) {
                out << '(' << join(t.formals) << ')';
            }
            out << " = " << to_string(t.body) << ";\n";
        }
    }
    if (!model.influence_variables.empty()) {
        out << '\n';
        for (const auto& b : model.influence_variables) {
            out << "iv " << b.influence << " = " << b.variable << ";\n";
        }
    }
    if (!model.events.empty()) {
        std::vector<std::string> names;
        for (const auto& e : model.events) {
            names.push_back(event_text(e.name, &model));
        }
        out << "\nevent " << join(names) << ";\n";
    }
    if (!model.conditions.empty()) {
        out << '\n';
        for (const auto& c : model.conditions) {
            std::string event = c.condition.kind == EventKind::Stochastic ? "~" + c.event : c.event;
            out << "ec(" << event << ") = (" << to_string(c.condition.activation) << ", "
                << reset_text(c.condition.reset) << ");\n";
        }
    }
    if (!model.subcomponents.empty()) {
        out << '\n';
        for (const auto& s : model.subcomponents) {
            out << "subcomponent " << s.name;
            if (!s.formals.empty()) {
                out << '(' << join(s.formals) << ')';
            }
            out << " =";
            for (std::size_t i = 0; i < s.branches.size(); ++i) {
                const auto& b = s.branches[i];
                out << (i ? "\n    + " : " ") << event_text(b.event, &model) << ":(" << b.influence.name << ", "
                    << to_string(b.influence.strength) << ", " << b.influence.type;
                if (!b.influence.arguments.empty()) {
                    out << '(' << join(b.influence.arguments) << ')';
                }
                out << ")." << b.target;
                if (!b.target_arguments.empty()) {
                    out << '(' << join(b.target_arguments) << ')';
                }
            }
            out << ";\n";
        }
    }
    if (!model.controllers.empty() || !model.controller_compositions.empty()) {
        out << '\n';
        for (const auto& c : model.controllers) {
            out << "controller " << c.name << " = " << to_string(c.body, &model) << ";\n";
        }
        for (const auto& c : model.controller_compositions) {
            std::string tree;
            print_tree(c.tree, model, tree);
            out << "controller " << c.name << " = " << tree << ";\n";
        }
    }
    if (!model.systems.empty() || model.controlled) {
        out << '\n';
        for (const auto& s : model.systems) {
            std::string tree;
            print_tree(s.tree, model, tree);
            out << "system " << s.name << " = " << tree << ";\n";
        }
        if (model.controlled) {
            const auto& top = *model.controlled;
            std::string sigma;
            print_tree(top.uncontrolled, model, sigma);
            std::string con;
            print_tree(top.controller, model, con);
            if (!top.controller.is_leaf()) {
                con = "(" + con + ")";
            }
            out << "system " << top.name << " = " << sigma << ' ' << sync_text(top.sync, model) << " init."
                << con << ";\n";
        }
    }
    return out.str();
}

} // namespace hype
