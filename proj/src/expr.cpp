#include "sampcert/expr.hpp"

#include "json.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>

namespace sampcert {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::invalid_argument(message + " (column " + std::to_string(offset + 1) + ")"),
      offset_(offset) {}

namespace {

enum class TokKind { Number, Ident, Plus, Minus, Star, Caret, LParen, RParen, End };

struct Token {
    TokKind kind;
    std::size_t pos;       // offset of first character
    std::string text;      // identifiers and numbers
    double value = 0.0;    // numbers
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        std::size_t i = 0;
        while (i < text_.size()) {
            char c = text_[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                out.push_back(number(i));
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = i;
                while (i < text_.size() &&
                       (std::isalnum(static_cast<unsigned char>(text_[i])) || text_[i] == '_'))
                    ++i;
                out.push_back({TokKind::Ident, start, std::string(text_.substr(start, i - start))});
                continue;
            }
            TokKind k;
            switch (c) {
                case '+': k = TokKind::Plus; break;
                case '-': k = TokKind::Minus; break;
                case '*': k = TokKind::Star; break;
                case '^': k = TokKind::Caret; break;
                case '(': k = TokKind::LParen; break;
                case ')': k = TokKind::RParen; break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", i);
            }
            out.push_back({k, i, std::string(1, c)});
            ++i;
        }
        out.push_back({TokKind::End, text_.size(), ""});
        return out;
    }

private:
    Token number(std::size_t& i) {
        const char* begin = text_.data() + i;
        const char* end = text_.data() + text_.size();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr == begin)
            throw ParseError("malformed number", i);
        Token t{TokKind::Number, i, std::string(begin, ptr), value};
        i += static_cast<std::size_t>(ptr - begin);
        return t;
    }

    std::string_view text_;
};

class Parser {
public:
    Parser(std::vector<Token> tokens, VarSetPtr vars)
        : toks_(std::move(tokens)), vars_(std::move(vars)) {}

    Polynomial run() {
        Polynomial p = expression();
        if (peek().kind != TokKind::End)
            throw ParseError("unexpected '" + peek().text + "'", peek().pos);
        return p;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    static bool starts_atom(TokKind k) {
        return k == TokKind::Number || k == TokKind::Ident || k == TokKind::LParen;
    }

    Polynomial expression() {
        Polynomial acc = term();
        while (peek().kind == TokKind::Plus || peek().kind == TokKind::Minus) {
            bool minus = next().kind == TokKind::Minus;
            Polynomial rhs = term();
            acc = minus ? acc - rhs : acc + rhs;
        }
        return acc;
    }

    Polynomial term() {
        Polynomial acc = factor();
        for (;;) {
            if (peek().kind == TokKind::Star) {
                next();
                acc = acc * factor();
            } else if (starts_atom(peek().kind)) {
                throw ParseError("implicit multiplication is not supported; insert '*'",
                                 peek().pos);
            } else {
                return acc;
            }
        }
    }

    Polynomial factor() {
        if (peek().kind == TokKind::Minus) {
            next();
            return -factor();
        }
        if (peek().kind == TokKind::Plus) {
            next();
            return factor();
        }
        return power();
    }

    Polynomial power() {
        Polynomial base = atom();
        if (peek().kind != TokKind::Caret) return base;
        next();
        const Token& e = peek();
        if (e.kind != TokKind::Number)
            throw ParseError("exponent must be a non-negative integer literal", e.pos);
        unsigned k = 0;
        auto [ptr, ec] = std::from_chars(e.text.data(), e.text.data() + e.text.size(), k);
        if (ec != std::errc() || ptr != e.text.data() + e.text.size())
            throw ParseError("exponent must be a non-negative integer literal", e.pos);
        if (k > 1000) throw ParseError("exponent too large", e.pos);
        next();
        return base.pow(k);
    }

    Polynomial atom() {
        const Token& t = peek();
        switch (t.kind) {
            case TokKind::Number:
                next();
                return Polynomial::constant(vars_, t.value);
            case TokKind::Ident: {
                auto idx = vars_->index_of(t.text);
                if (!idx) throw ParseError("unknown variable '" + t.text + "'", t.pos);
                next();
                return Polynomial::variable(vars_, *idx);
            }
            case TokKind::LParen: {
                next();
                Polynomial p = expression();
                if (peek().kind != TokKind::RParen)
                    throw ParseError("expected ')'", peek().pos);
                next();
                return p;
            }
            default:
                throw ParseError("expected a number, variable, or '('", t.pos);
        }
    }

    std::vector<Token> toks_;
    VarSetPtr vars_;
    std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, VarSetPtr vars) {
    return Parser(Lexer(text).run(), std::move(vars)).run();
}

VarSetPtr system_varset(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n; ++i) names.push_back("z" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    return VarSet::create(std::move(names));
}

VarSetPtr system_file_varset(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n; ++i) names.push_back("z" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) names.push_back("xk" + std::to_string(i));
    return VarSet::create(std::move(names));
}

SystemDef make_system(std::string name, std::size_t n,
                      const std::vector<std::string>& dynamics) {
    if (n < 1) throw std::invalid_argument("system dimension must be at least 1");
    if (dynamics.size() != n)
        throw std::invalid_argument("declared n=" + std::to_string(n) + " but got " +
                                    std::to_string(dynamics.size()) + " dynamics entries");
    SystemDef sys;
    sys.name = std::move(name);
    sys.n = n;
    sys.vars = system_varset(n);
    auto file_vars = system_file_varset(n);
    std::vector<int> slot(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) slot[i] = static_cast<int>(i);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            sys.f.push_back(parse_polynomial(dynamics[i], file_vars).remapped(sys.vars, slot));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("dynamics[" + std::to_string(i) + "]: " + e.what());
        }
    }
    return sys;
}

SystemDef parse_system_text(const std::string& json_text, const std::string& context) {
    const std::string where = context.empty() ? "system file" : context;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(where + ": " + e.what());
    }
    try {
        if (!j.is_object()) throw std::invalid_argument("top level must be a JSON object");
        for (const char* field : {"name", "n", "dynamics"})
            if (!j.contains(field))
                throw std::invalid_argument(std::string("missing field \"") + field + "\"");
        if (!j["name"].is_string()) throw std::invalid_argument("\"name\" must be a string");
        if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1)
            throw std::invalid_argument("\"n\" must be a positive integer");
        if (!j["dynamics"].is_array())
            throw std::invalid_argument("\"dynamics\" must be an array of strings");
        std::vector<std::string> dynamics;
        for (const auto& entry : j["dynamics"]) {
            if (!entry.is_string())
                throw std::invalid_argument("\"dynamics\" entries must be strings");
            dynamics.push_back(entry.get<std::string>());
        }
        return make_system(j["name"].get<std::string>(), j["n"].get<std::size_t>(), dynamics);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + ": " + e.what());
    }
}

SystemDef parse_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open system file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_system_text(buf.str(), path);
}

}  // namespace sampcert
