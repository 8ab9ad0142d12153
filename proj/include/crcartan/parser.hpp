#ifndef CRCARTAN_PARSER_HPP
#define CRCARTAN_PARSER_HPP

#include <cctype>
#include <string>
#include <string_view>

#include <json.hpp>

#include "crcartan/zero_test.hpp"

namespace crcartan {

struct SyntaxError : std::runtime_error {
    size_t pos;
    SyntaxError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"), pos(pos) {}
};
struct UnknownIdentifier : std::runtime_error {
    size_t pos;
    UnknownIdentifier(const std::string& name, size_t pos)
        : std::runtime_error("unknown identifier '" + name + "' (at offset " + std::to_string(pos) + ")"),
          pos(pos) {}
};
struct NotReal : std::runtime_error {
    Assignment witness;
    NotReal(const std::string& msg, Assignment w) : std::runtime_error(msg), witness(std::move(w)) {}
};
struct IllegalVariable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Recursive-descent parser for the expression grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ['^' ['-'] integer]          -- a^2^3 is rejected
//   atom   := ident | conj '(' expr ')' | phi '[' int ',' int ',' int ']'
//           | integer | i | '(' expr ')'
// Identifiers: z zb u b bb c cb s sb. Rational literals arise as p/q through
// the division operator, which folds constants exactly.
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
  public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError("trailing input", pos_);
        return e;
    }

  private:
    std::string_view text_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }

    mpz_class integer_literal() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) throw SyntaxError("expected integer", pos_);
        return mpz_class(std::string(text_.substr(start, pos_ - start)), 10);
    }

    long small_int() {
        bool neg = accept('-');
        mpz_class n = integer_literal();
        if (!n.fits_slong_p()) throw SyntaxError("integer too large here", pos_);
        long v = n.get_si();
        return neg ? -v : v;
    }

    Expr expr() {
        bool neg = accept('-');
        Expr acc = term();
        if (neg) acc = -acc;
        while (true) {
            if (accept('+')) acc = acc + term();
            else if (accept('-')) acc = acc - term();
            else return acc;
        }
    }

    Expr term() {
        Expr acc = factor();
        while (true) {
            if (accept('*')) acc = acc * factor();
            else if (accept('/')) acc = acc / factor();
            else return acc;
        }
    }

    Expr factor() {
        Expr base = atom();
        if (accept('^')) {
            long n = small_int();
            if (peek() == '^')
                throw SyntaxError("power is non-associative; parenthesize a^(m^n)", pos_);
            return pow(base, n);
        }
        return base;
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)))
            return Expr::constant(GaussianRational(mpq_class(integer_literal())));
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw SyntaxError("unexpected character", pos_);
    }

    Expr identifier() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (name == "i") return Expr::I();
        if (name == "conj") {
            expect('(');
            Expr inner = expr();
            expect(')');
            return conjugate(inner);
        }
        if (name == "phi") {
            expect('[');
            long a = small_int();
            expect(',');
            long b = small_int();
            expect(',');
            long cc = small_int();
            expect(']');
            if (a < 0 || b < 0 || cc < 0) throw SyntaxError("negative jet index", start);
            return Expr::var(VarId::jet(int(a), int(b), int(cc)));
        }
        if (name == "z") return Expr::var(VarId::z());
        if (name == "zb") return Expr::var(VarId::zb());
        if (name == "u") return Expr::var(VarId::u());
        if (name == "b") return Expr::var(VarId::gb());
        if (name == "bb") return Expr::var(VarId::gbb());
        if (name == "c") return Expr::var(VarId::gc());
        if (name == "cb") return Expr::var(VarId::gcb());
        if (name == "s") return Expr::var(VarId::gs());
        if (name == "sb") return Expr::var(VarId::gsb());
        throw UnknownIdentifier(name, start);
    }
};

}  // namespace detail

inline Expr parse_expression(std::string_view text) { return detail::Parser(text).parse(); }

/// Parse a graphing function phi(z, zb, u) and validate reality.
/// phi(0) = 0 is advisory in the source material and deliberately not enforced.
inline Expr parse_phi(std::string_view text) {
    Expr phi = parse_expression(text);
    for (VarId v : variables_of(phi))
        if (!v.is_base()) throw IllegalVariable("phi may only use z, zb, u; found " + v.name());
    Expr residual = conjugate(phi) - phi;
    ZeroVerdict verdict = is_identically_zero_auto(residual, kDefaultTrials, derive_seed(2, "phi-reality"));
    if (!verdict.zero) {
        throw NotReal("phi is not real-valued (conj(phi) != phi)",
                      verdict.witness ? *verdict.witness : Assignment{});
    }
    return phi;
}

// ---------------------------------------------------------------------------
// Rendering. The plain format re-parses to a semantically equal expression.
// ---------------------------------------------------------------------------

enum class RenderFormat { Plain, Tex, JsonTree };

namespace detail {

// effective precedence level of a rendered snippet: 1 sum-like, 2 product-like,
// 3 power, 4 atomic (including anything already parenthesized)
inline int const_level(const GaussianRational& q) {
    if (!q.is_real() && q.re != 0) return 4;  // rendered with its own parentheses
    if (q.is_real()) {
        if (q.re < 0) return 1;
        return q.re.get_den() == 1 ? 4 : 2;
    }
    if (q.im < 0) return 1;
    if (q.im == 1) return 4;
    return 2;
}

inline std::string render_plain_rec(Expr e, int parent,
                                    std::unordered_map<uint32_t, std::pair<int, std::string>>& memo) {
    auto wrap = [&](int level, std::string s) {
        if (level < parent) return "(" + s + ")";
        return s;
    };
    auto it = memo.find(e.id());
    if (it != memo.end()) return wrap(it->second.first, it->second.second);
    int level;
    std::string s;
    switch (e.kind()) {
        case Kind::Const:
            s = e.constant_value().str();
            level = const_level(e.constant_value());
            break;
        case Kind::Var:
            s = e.var_id().name();
            level = 4;
            break;
        case Kind::Add: {
            std::string a = render_plain_rec(e.child_a(), 1, memo);
            std::string b = render_plain_rec(e.child_b(), 1, memo);
            s = (!b.empty() && b[0] == '-') ? a + b : a + "+" + b;
            level = 1;
            break;
        }
        case Kind::Mul: {
            std::string a = render_plain_rec(e.child_a(), 2, memo);
            std::string b = render_plain_rec(e.child_b(), 2, memo);
            s = a + "*" + b;
            level = 2;
            break;
        }
        case Kind::Div: {
            std::string a = render_plain_rec(e.child_a(), 2, memo);
            std::string b = render_plain_rec(e.child_b(), 3, memo);
            s = a + "/" + b;
            level = 2;
            break;
        }
        case Kind::Pow: {
            std::string a = render_plain_rec(e.child_a(), 4, memo);
            s = a + "^" + std::to_string(e.pow_exponent());
            level = 3;
            break;
        }
        default: level = 4;
    }
    memo.emplace(e.id(), std::make_pair(level, s));
    return wrap(level, s);
}

inline std::string tex_name(VarId v) {
    switch (v.code()) {
        case 0: return "z";
        case 1: return "\\bar{z}";
        case 2: return "u";
        case 3: return "{\\sf b}";
        case 4: return "\\bar{\\sf b}";
        case 5: return "{\\sf c}";
        case 6: return "\\bar{\\sf c}";
        case 7: return "{\\sf s}";
        case 8: return "\\bar{\\sf s}";
        default:
            return "\\varphi_{" + std::to_string(v.jet_a()) + "," + std::to_string(v.jet_b()) + "," +
                   std::to_string(v.jet_c()) + "}";
    }
}

inline std::string render_tex_rec(Expr e, int parent) {
    auto wrap = [&](int level, std::string s) {
        if (level < parent) return "\\left(" + s + "\\right)";
        return s;
    };
    switch (e.kind()) {
        case Kind::Const: {
            const GaussianRational& q = e.constant_value();
            auto rat = [](const mpq_class& x) {
                if (x.get_den() == 1) return x.get_str();
                std::string sign = x < 0 ? "-" : "";
                mpq_class ax = abs(x);
                return sign + "\\tfrac{" + ax.get_num().get_str() + "}{" + ax.get_den().get_str() + "}";
            };
            if (q.is_real()) return wrap(const_level(q), rat(q.re));
            std::string ims = (q.im == 1) ? "i" : (q.im == -1 ? "-i" : rat(q.im) + "\\,i");
            if (q.re == 0) return wrap(const_level(q), ims);
            std::string s = rat(q.re) + (q.im > 0 ? "+" : "") + ims;
            return "\\left(" + s + "\\right)";
        }
        case Kind::Var: return tex_name(e.var_id());
        case Kind::Add: {
            std::string b = render_tex_rec(e.child_b(), 1);
            return wrap(1, render_tex_rec(e.child_a(), 1) + ((!b.empty() && b[0] == '-') ? b : "+" + b));
        }
        case Kind::Mul: return wrap(2, render_tex_rec(e.child_a(), 2) + "\\," + render_tex_rec(e.child_b(), 2));
        case Kind::Div:
            return "\\frac{" + render_tex_rec(e.child_a(), 0) + "}{" + render_tex_rec(e.child_b(), 0) + "}";
        case Kind::Pow:
            return render_tex_rec(e.child_a(), 4) + "^{" + std::to_string(e.pow_exponent()) + "}";
    }
    return "";
}

inline nlohmann::ordered_json render_json_rec(Expr e) {
    nlohmann::ordered_json j;
    switch (e.kind()) {
        case Kind::Const:
            j["kind"] = "const";
            j["value"] = e.constant_value().str();
            break;
        case Kind::Var:
            j["kind"] = "var";
            j["name"] = e.var_id().name();
            break;
        case Kind::Add:
        case Kind::Mul:
        case Kind::Div:
            j["kind"] = e.kind() == Kind::Add ? "add" : (e.kind() == Kind::Mul ? "mul" : "div");
            j["a"] = render_json_rec(e.child_a());
            j["b"] = render_json_rec(e.child_b());
            break;
        case Kind::Pow:
            j["kind"] = "pow";
            j["base"] = render_json_rec(e.child_a());
            j["exp"] = e.pow_exponent();
            break;
    }
    return j;
}

}  // namespace detail

inline std::string render(Expr e, RenderFormat format = RenderFormat::Plain) {
    switch (format) {
        case RenderFormat::Plain: {
            std::unordered_map<uint32_t, std::pair<int, std::string>> memo;
            return detail::render_plain_rec(e, 0, memo);
        }
        case RenderFormat::Tex: return detail::render_tex_rec(e, 0);
        case RenderFormat::JsonTree: return detail::render_json_rec(e).dump();
    }
    return "";
}

inline std::string render_assignment(const Assignment& at) {
    std::string s = "{";
    bool first = true;
    for (auto& [v, q] : at) {
        if (!first) s += ", ";
        first = false;
        s += v.name() + " = " + q.str();
    }
    return s + "}";
}

}  // namespace crcartan

#endif
