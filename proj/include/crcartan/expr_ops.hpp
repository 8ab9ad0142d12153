#ifndef CRCARTAN_EXPR_OPS_HPP
#define CRCARTAN_EXPR_OPS_HPP

#include <complex>
#include <functional>
#include <unordered_map>

#include "crcartan/expr.hpp"

namespace crcartan {

constexpr int kDefaultMaxOrder = 8;

// ---------------------------------------------------------------------------
// Conjugation: the involutive field automorphism fixing Q, sending i -> -i and
// each variable to its conjugation partner.
// ---------------------------------------------------------------------------

namespace detail {

inline Expr conjugate_rec(Expr e, std::unordered_map<uint32_t, Expr>& memo) {
    auto it = memo.find(e.id());
    if (it != memo.end()) return it->second;
    Expr out;
    switch (e.kind()) {
        case Kind::Const: out = Expr::constant(e.constant_value().conj()); break;
        case Kind::Var: out = Expr::var(e.var_id().conj()); break;
        case Kind::Add: out = conjugate_rec(e.child_a(), memo) + conjugate_rec(e.child_b(), memo); break;
        case Kind::Mul: out = conjugate_rec(e.child_a(), memo) * conjugate_rec(e.child_b(), memo); break;
        case Kind::Div: out = conjugate_rec(e.child_a(), memo) / conjugate_rec(e.child_b(), memo); break;
        case Kind::Pow: out = pow(conjugate_rec(e.child_a(), memo), e.pow_exponent()); break;
    }
    memo.emplace(e.id(), out);
    return out;
}

}  // namespace detail

inline Expr conjugate(Expr e) {
    std::unordered_map<uint32_t, Expr> memo;
    return detail::conjugate_rec(e, memo);
}

// ---------------------------------------------------------------------------
// Simultaneous substitution.
// ---------------------------------------------------------------------------

using SubstMap = std::map<VarId, Expr>;

namespace detail {

inline Expr substitute_rec(Expr e, const SubstMap& map, std::unordered_map<uint32_t, Expr>& memo) {
    auto it = memo.find(e.id());
    if (it != memo.end()) return it->second;
    Expr out;
    switch (e.kind()) {
        case Kind::Const: out = e; break;
        case Kind::Var: {
            auto found = map.find(e.var_id());
            out = (found != map.end()) ? found->second : e;
            break;
        }
        case Kind::Add: out = substitute_rec(e.child_a(), map, memo) + substitute_rec(e.child_b(), map, memo); break;
        case Kind::Mul: out = substitute_rec(e.child_a(), map, memo) * substitute_rec(e.child_b(), map, memo); break;
        case Kind::Div: out = substitute_rec(e.child_a(), map, memo) / substitute_rec(e.child_b(), map, memo); break;
        case Kind::Pow: out = pow(substitute_rec(e.child_a(), map, memo), e.pow_exponent()); break;
    }
    memo.emplace(e.id(), out);
    return out;
}

inline void check_acyclic(const SubstMap& map) {
    // walk the dependency graph among bound variables; any loop is an error
    std::map<VarId, int> color;  // 0 = white, 1 = grey, 2 = black
    std::function<void(VarId)> dfs = [&](VarId v) {
        color[v] = 1;
        for (VarId w : variables_of(map.at(v))) {
            if (!map.count(w)) continue;
            int c = color.count(w) ? color[w] : 0;
            if (c == 1) throw CyclicBinding("binding chain through " + w.name() + " loops");
            if (c == 0) dfs(w);
        }
        color[v] = 2;
    };
    for (auto& [v, _] : map)
        if ((color.count(v) ? color[v] : 0) == 0) dfs(v);
}

}  // namespace detail

inline Expr substitute(Expr e, const SubstMap& map) {
    detail::check_acyclic(map);
    std::unordered_map<uint32_t, Expr> memo;
    return detail::substitute_rec(e, map, memo);
}

// ---------------------------------------------------------------------------
// Derivations. total_derivative implements the total derivative on jet space:
// D_dir moves jet multi-indices, fixes the other base coordinates, and
// annihilates group parameters. partial_by differentiates with respect to one
// variable treating every other variable as constant (fiber directions).
// ---------------------------------------------------------------------------

namespace detail {

template <class LeafRule>
Expr derive_rec(Expr e, const LeafRule& leaf, std::unordered_map<uint32_t, Expr>& memo) {
    auto it = memo.find(e.id());
    if (it != memo.end()) return it->second;
    Expr out;
    switch (e.kind()) {
        case Kind::Const: out = Expr::zero(); break;
        case Kind::Var: out = leaf(e.var_id()); break;
        case Kind::Add:
            out = derive_rec(e.child_a(), leaf, memo) + derive_rec(e.child_b(), leaf, memo);
            break;
        case Kind::Mul: {
            Expr a = e.child_a(), b = e.child_b();
            out = derive_rec(a, leaf, memo) * b + a * derive_rec(b, leaf, memo);
            break;
        }
        case Kind::Div: {
            Expr a = e.child_a(), b = e.child_b();
            out = (derive_rec(a, leaf, memo) * b - a * derive_rec(b, leaf, memo)) / (b * b);
            break;
        }
        case Kind::Pow: {
            Expr a = e.child_a();
            long n = e.pow_exponent();
            out = Expr::integer(n) * pow(a, n - 1) * derive_rec(a, leaf, memo);
            break;
        }
    }
    memo.emplace(e.id(), out);
    return out;
}

}  // namespace detail

inline Expr total_derivative(Expr e, VarId dir, int max_order = kDefaultMaxOrder) {
    if (!dir.is_base()) throw std::invalid_argument("total derivative direction must be z, zb or u");
    auto leaf = [&](VarId v) -> Expr {
        if (v.is_base()) return v == dir ? Expr::one() : Expr::zero();
        if (v.is_group()) return Expr::zero();
        int a = v.jet_a(), b = v.jet_b(), c = v.jet_c();
        if (dir == VarId::z()) ++a;
        else if (dir == VarId::zb()) ++b;
        else ++c;
        if (a + b + c > max_order)
            throw JetOrderExceeded("jet order " + std::to_string(a + b + c) + " exceeds max_order " +
                                   std::to_string(max_order));
        return Expr::var(VarId::jet(a, b, c));
    };
    std::unordered_map<uint32_t, Expr> memo;
    return detail::derive_rec(e, leaf, memo);
}

inline Expr partial_by(Expr e, VarId v) {
    auto leaf = [&](VarId w) -> Expr { return w == v ? Expr::one() : Expr::zero(); };
    std::unordered_map<uint32_t, Expr> memo;
    return detail::derive_rec(e, leaf, memo);
}

// ---------------------------------------------------------------------------
// Double-precision complex evaluation (the CLI's numeric window).
// ---------------------------------------------------------------------------

using ComplexAssignment = std::map<VarId, std::complex<double>>;

inline std::complex<double> eval_complex(Expr e, const ComplexAssignment& at) {
    std::unordered_map<uint32_t, std::complex<double>> memo;
    std::complex<double> result;
    detail::postorder(e, [&](uint32_t id, const detail::Node& n) {
        if (memo.count(id)) return;
        Expr node = Expr::from_id(id);
        switch (n.kind) {
            case Kind::Const: {
                const GaussianRational& q = node.constant_value();
                memo.emplace(id, std::complex<double>(q.re.get_d(), q.im.get_d()));
                break;
            }
            case Kind::Var: {
                auto it = at.find(node.var_id());
                if (it == at.end()) throw UnboundVariable("unbound variable " + node.var_id().name());
                memo.emplace(id, it->second);
                break;
            }
            case Kind::Add: memo.emplace(id, memo.at(n.a) + memo.at(n.b)); break;
            case Kind::Mul: memo.emplace(id, memo.at(n.a) * memo.at(n.b)); break;
            case Kind::Div: {
                std::complex<double> den = memo.at(n.b);
                if (den == std::complex<double>(0.0, 0.0)) throw PoleAtPoint("numeric pole");
                memo.emplace(id, memo.at(n.a) / den);
                break;
            }
            case Kind::Pow: {
                std::complex<double> base = memo.at(n.a), acc(1.0, 0.0);
                for (long k = 0; k < n.aux; ++k) acc *= base;
                memo.emplace(id, acc);
                break;
            }
        }
    });
    return memo.at(e.id());
}

inline size_t count_nodes(Expr e) {
    std::unordered_map<uint32_t, bool> visited;
    size_t n = 0;
    detail::postorder(e, [&](uint32_t id, const detail::Node&) {
        if (!visited[id]) {
            visited[id] = true;
            ++n;
        }
    });
    return n;
}

}  // namespace crcartan

#endif
