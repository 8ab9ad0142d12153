#ifndef CRCARTAN_POLY_HPP
#define CRCARTAN_POLY_HPP

#include <algorithm>
#include <map>
#include <unordered_map>
#include <vector>

#include "crcartan/expr_ops.hpp"

namespace crcartan {

// ---------------------------------------------------------------------------
// Sparse multivariate polynomials over Q(i) in the fixed variable order
// base < jet (graded-lex multi-index) < group, with graded-lex monomial order.
// Canonical expansion of an expression is a content-normalized fraction of two
// such polynomials. No general multivariate GCD: scalar content plus the
// monomial gcd is enough for the acceptance identities.
// ---------------------------------------------------------------------------

struct Monomial {
    // (variable sort key, exponent), sorted ascending by key, exponents > 0
    std::vector<std::pair<uint64_t, int>> factors;

    int total_degree() const {
        int d = 0;
        for (auto& [_, e] : factors) d += e;
        return d;
    }
    bool operator==(const Monomial& o) const { return factors == o.factors; }
};

/// Leading (graded-lex greatest) monomials order first.
struct MonomialOrder {
    bool operator()(const Monomial& m1, const Monomial& m2) const {
        int d1 = m1.total_degree(), d2 = m2.total_degree();
        if (d1 != d2) return d1 > d2;
        size_t i = 0, j = 0;
        while (i < m1.factors.size() && j < m2.factors.size()) {
            if (m1.factors[i].first != m2.factors[j].first)
                return m1.factors[i].first < m2.factors[j].first;
            if (m1.factors[i].second != m2.factors[j].second)
                return m1.factors[i].second > m2.factors[j].second;
            ++i, ++j;
        }
        return i < m1.factors.size();
    }
};

class Poly {
  public:
    using Terms = std::map<Monomial, GaussianRational, MonomialOrder>;
    Terms terms;

    Poly() = default;
    static Poly constant(const GaussianRational& q) {
        Poly p;
        if (!q.is_zero()) p.terms.emplace(Monomial{}, q);
        return p;
    }
    static Poly variable(uint64_t key) {
        Poly p;
        p.terms.emplace(Monomial{{{key, 1}}}, GaussianRational(1));
        return p;
    }

    bool is_zero() const { return terms.empty(); }
    bool is_constant() const { return terms.empty() || (terms.size() == 1 && terms.begin()->first.factors.empty()); }
    size_t size() const { return terms.size(); }

    void add_term(const Monomial& m, const GaussianRational& c) {
        if (c.is_zero()) return;
        auto it = terms.find(m);
        if (it == terms.end()) {
            terms.emplace(m, c);
        } else {
            it->second = it->second + c;
            if (it->second.is_zero()) terms.erase(it);
        }
    }

    friend bool operator==(const Poly& a, const Poly& b) { return a.terms == b.terms; }
};

/// Counts work done during expansion; throws past the configured node budget.
struct ExpansionBudget {
    size_t limit;
    size_t used = 0;
    explicit ExpansionBudget(size_t limit = 5000000) : limit(limit) {}
    void charge(size_t n = 1) {
        used += n;
        if (used > limit) throw ExpansionOverflow("canonical expansion exceeds the node budget");
    }
};

namespace detail {

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.factors.reserve(a.factors.size() + b.factors.size());
    size_t i = 0, j = 0;
    while (i < a.factors.size() || j < b.factors.size()) {
        if (j == b.factors.size() || (i < a.factors.size() && a.factors[i].first < b.factors[j].first))
            out.factors.push_back(a.factors[i++]);
        else if (i == a.factors.size() || b.factors[j].first < a.factors[i].first)
            out.factors.push_back(b.factors[j++]);
        else {
            out.factors.emplace_back(a.factors[i].first, a.factors[i].second + b.factors[j].second);
            ++i, ++j;
        }
    }
    return out;
}

}  // namespace detail

inline Poly operator+(const Poly& a, const Poly& b) {
    Poly out = a;
    for (auto& [m, c] : b.terms) out.add_term(m, c);
    return out;
}

inline Poly poly_mul(const Poly& a, const Poly& b, ExpansionBudget& budget) {
    Poly out;
    for (auto& [ma, ca] : a.terms)
        for (auto& [mb, cb] : b.terms) {
            budget.charge();
            out.add_term(detail::mono_mul(ma, mb), ca * cb);
        }
    return out;
}

inline Poly poly_scale(const Poly& a, const GaussianRational& q) {
    Poly out;
    if (q.is_zero()) return out;
    for (auto& [m, c] : a.terms) out.terms.emplace(m, c * q);
    return out;
}

inline GaussianRational poly_eval(const Poly& p, const std::map<uint64_t, GaussianRational>& at) {
    GaussianRational acc(0);
    for (auto& [m, c] : p.terms) {
        GaussianRational t = c;
        for (auto& [key, e] : m.factors) t = t * at.at(key).pow(e);
        acc = acc + t;
    }
    return acc;
}

/// A fraction of polynomials, content-normalized: common monomial factor
/// cancelled, denominator's leading coefficient scaled to 1.
struct PolyFraction {
    Poly num, den;

    PolyFraction() : num(), den(Poly::constant(GaussianRational(1))) {}
    PolyFraction(Poly n, Poly d) : num(std::move(n)), den(std::move(d)) {}

    void normalize() {
        if (num.is_zero()) {
            den = Poly::constant(GaussianRational(1));
            return;
        }
        // monomial gcd across numerator and denominator
        auto common = [](const Poly& p) {
            std::map<uint64_t, int> lo;
            bool first = true;
            for (auto& [m, _] : p.terms) {
                std::map<uint64_t, int> cur(m.factors.begin(), m.factors.end());
                if (first) {
                    lo = cur;
                    first = false;
                } else {
                    for (auto it = lo.begin(); it != lo.end();) {
                        auto f = cur.find(it->first);
                        if (f == cur.end()) {
                            it = lo.erase(it);
                        } else {
                            it->second = std::min(it->second, f->second);
                            ++it;
                        }
                    }
                }
            }
            return lo;
        };
        std::map<uint64_t, int> gn = common(num), gd = common(den), g;
        for (auto& [k, e] : gn) {
            auto it = gd.find(k);
            if (it != gd.end()) g[k] = std::min(e, it->second);
        }
        if (!g.empty()) {
            auto strip = [&](Poly& p) {
                Poly out;
                for (auto& [m, c] : p.terms) {
                    Monomial r;
                    for (auto& [k, e] : m.factors) {
                        auto it = g.find(k);
                        int rem = e - (it == g.end() ? 0 : it->second);
                        if (rem > 0) r.factors.emplace_back(k, rem);
                    }
                    out.terms.emplace(r, c);
                }
                p = std::move(out);
            };
            strip(num);
            strip(den);
        }
        GaussianRational lead = den.terms.begin()->second;
        if (!lead.is_one()) {
            GaussianRational inv = GaussianRational(1) / lead;
            num = poly_scale(num, inv);
            den = poly_scale(den, inv);
        }
    }
};

// ---------------------------------------------------------------------------
// Canonical expansion of an expression DAG into a PolyFraction.
// ---------------------------------------------------------------------------

struct CanonicalForm {
    PolyFraction fraction;
    std::map<uint64_t, VarId> key_to_var;  // for rebuilding/evaluating
    size_t monomial_count() const { return fraction.num.size(); }
};

namespace detail {

struct ExpandCtx {
    ExpansionBudget* budget;
    std::map<uint64_t, VarId>* keys;
    std::unordered_map<uint32_t, PolyFraction> memo;
};

inline PolyFraction expand_rec(Expr e, ExpandCtx& ctx) {
    auto it = ctx.memo.find(e.id());
    if (it != ctx.memo.end()) return it->second;
    PolyFraction out;
    switch (e.kind()) {
        case Kind::Const:
            out.num = Poly::constant(e.constant_value());
            break;
        case Kind::Var: {
            uint64_t key = e.var_id().sort_key();
            (*ctx.keys)[key] = e.var_id();
            out.num = Poly::variable(key);
            break;
        }
        case Kind::Add: {
            PolyFraction a = expand_rec(e.child_a(), ctx), b = expand_rec(e.child_b(), ctx);
            if (a.den == b.den) {
                out = PolyFraction(a.num + b.num, a.den);
            } else {
                out = PolyFraction(poly_mul(a.num, b.den, *ctx.budget) + poly_mul(b.num, a.den, *ctx.budget),
                                   poly_mul(a.den, b.den, *ctx.budget));
            }
            break;
        }
        case Kind::Mul: {
            PolyFraction a = expand_rec(e.child_a(), ctx), b = expand_rec(e.child_b(), ctx);
            out = PolyFraction(poly_mul(a.num, b.num, *ctx.budget), poly_mul(a.den, b.den, *ctx.budget));
            break;
        }
        case Kind::Div: {
            PolyFraction a = expand_rec(e.child_a(), ctx), b = expand_rec(e.child_b(), ctx);
            if (b.num.is_zero()) throw DivisionByZeroExpr("denominator expands to zero");
            out = PolyFraction(poly_mul(a.num, b.den, *ctx.budget), poly_mul(a.den, b.num, *ctx.budget));
            break;
        }
        case Kind::Pow: {
            PolyFraction base = expand_rec(e.child_a(), ctx);
            long n = e.pow_exponent();
            PolyFraction acc(Poly::constant(GaussianRational(1)), Poly::constant(GaussianRational(1)));
            while (n) {
                if (n & 1)
                    acc = PolyFraction(poly_mul(acc.num, base.num, *ctx.budget),
                                       poly_mul(acc.den, base.den, *ctx.budget));
                n >>= 1;
                if (n)
                    base = PolyFraction(poly_mul(base.num, base.num, *ctx.budget),
                                        poly_mul(base.den, base.den, *ctx.budget));
            }
            out = acc;
            break;
        }
    }
    out.normalize();
    ctx.memo.emplace(e.id(), out);
    return out;
}

}  // namespace detail

inline CanonicalForm expand_canonical(Expr e, ExpansionBudget budget = ExpansionBudget()) {
    CanonicalForm form;
    detail::ExpandCtx ctx{&budget, &form.key_to_var, {}};
    form.fraction = detail::expand_rec(e, ctx);
    return form;
}

/// Deterministic Expr rebuild of a canonical form (leading monomials first).
inline Expr poly_to_expr(const Poly& p, const std::map<uint64_t, VarId>& keys) {
    if (p.is_zero()) return Expr::zero();
    Expr acc = Expr::zero();
    for (auto& [m, c] : p.terms) {
        Expr term = Expr::constant(c);
        for (auto& [key, exp] : m.factors) term = term * pow(Expr::var(keys.at(key)), exp);
        acc = acc + term;
    }
    return acc;
}

inline Expr canonical_to_expr(const CanonicalForm& form) {
    Expr num = poly_to_expr(form.fraction.num, form.key_to_var);
    if (form.fraction.den == Poly::constant(GaussianRational(1))) return num;
    return num / poly_to_expr(form.fraction.den, form.key_to_var);
}

}  // namespace crcartan

#endif
