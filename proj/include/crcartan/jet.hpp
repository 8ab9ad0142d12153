#ifndef CRCARTAN_JET_HPP
#define CRCARTAN_JET_HPP

#include <vector>

#include "crcartan/zero_test.hpp"

namespace crcartan {

/// Working context for the jet space of phi. max_order 8 leaves headroom above
/// the order-6 jets of the primary invariant: its secondary companion costs one
/// more derivative and the d^2-consistency checks one more still.
struct JetContext {
    int max_order = kDefaultMaxOrder;
    bool rigid = false;  // all u-jets identically zero
};

/// A derivation on the jet space: coefficients on D_z, D_zb, D_u.
struct VectorField {
    Expr coef_z, coef_zb, coef_u;
};

inline Expr apply_field(const VectorField& X, Expr e, const JetContext& ctx = {}) {
    return X.coef_z * total_derivative(e, VarId::z(), ctx.max_order) +
           X.coef_zb * total_derivative(e, VarId::zb(), ctx.max_order) +
           X.coef_u * total_derivative(e, VarId::u(), ctx.max_order);
}

inline VectorField conjugate(const VectorField& X) {
    return {conjugate(X.coef_zb), conjugate(X.coef_z), conjugate(X.coef_u)};
}

/// [X, Y] as a derivation: coefficients X(Y_d) - Y(X_d).
inline VectorField lie_bracket(const VectorField& X, const VectorField& Y,
                               const JetContext& ctx = {}) {
    return {apply_field(X, Y.coef_z, ctx) - apply_field(Y, X.coef_z, ctx),
            apply_field(X, Y.coef_zb, ctx) - apply_field(Y, X.coef_zb, ctx),
            apply_field(X, Y.coef_u, ctx) - apply_field(Y, X.coef_u, ctx)};
}

inline VectorField field_sub(const VectorField& X, const VectorField& Y) {
    return {X.coef_z - Y.coef_z, X.coef_zb - Y.coef_zb, X.coef_u - Y.coef_u};
}
inline VectorField field_add(const VectorField& X, const VectorField& Y) {
    return {X.coef_z + Y.coef_z, X.coef_zb + Y.coef_zb, X.coef_u + Y.coef_u};
}
inline VectorField field_scale(Expr f, const VectorField& X) {
    return {f * X.coef_z, f * X.coef_zb, f * X.coef_u};
}

// ---------------------------------------------------------------------------
// Specialization to a concrete graphing function: every jet variable
// phi[a,b,c] is replaced by the exact partial derivative of phi.
// ---------------------------------------------------------------------------

inline Expr specialize_phi(Expr e, Expr phi, const JetContext& ctx = {}) {
    std::map<uint32_t, Expr> partials;  // VarId code -> derivative of phi
    std::function<Expr(VarId)> partial = [&](VarId v) -> Expr {
        auto it = partials.find(v.code());
        if (it != partials.end()) return it->second;
        int a = v.jet_a(), b = v.jet_b(), c = v.jet_c();
        Expr result;
        if (a + b + c == 0) {
            result = phi;
        } else if (a > 0) {
            result = total_derivative(partial(VarId::jet(a - 1, b, c)), VarId::z(), ctx.max_order);
        } else if (b > 0) {
            result = total_derivative(partial(VarId::jet(a, b - 1, c)), VarId::zb(), ctx.max_order);
        } else {
            result = total_derivative(partial(VarId::jet(a, b, c - 1)), VarId::u(), ctx.max_order);
        }
        partials.emplace(v.code(), result);
        return result;
    };
    SubstMap map;
    for (VarId v : variables_of(e))
        if (v.is_jet()) map[v] = partial(v);
    return substitute(e, map);
}

/// Substitution map sending every u-jet of the expression to zero (rigid case).
inline SubstMap rigid_restriction_map(Expr e) {
    SubstMap map;
    for (VarId v : variables_of(e))
        if (v.is_jet() && v.jet_c() >= 1) map[v] = Expr::zero();
    return map;
}

inline Expr restrict_rigid(Expr e) { return substitute(e, rigid_restriction_map(e)); }

// ---------------------------------------------------------------------------
// Reality-consistent random assignments with exclusions (the sampling side of
// probabilistic verification). All exclusion expressions evaluate nonzero at
// the returned assignment; pole-hitting or excluded draws are rejected.
// ---------------------------------------------------------------------------

inline Assignment random_real_assignment(const std::vector<VarId>& vars, uint64_t seed,
                                         const std::vector<Expr>& exclusions = {},
                                         long bound = kDefaultBound, const JetContext& ctx = {}) {
    std::vector<VarId> all = vars;
    for (const Expr& ex : exclusions)
        for (VarId v : variables_of(ex)) all.push_back(v);
    Rng rng(seed);
    for (int attempt = 0; attempt < kPoleRetryBudget; ++attempt) {
        Assignment at = detail::random_assignment(all, rng, bound);
        if (ctx.rigid)
            for (auto& [v, q] : at)
                if (v.is_jet() && v.jet_c() >= 1) q = GaussianRational(0);
        bool ok = true;
        for (const Expr& ex : exclusions) {
            try {
                if (eval_exact(ex, at).is_zero()) {
                    ok = false;
                    break;
                }
            } catch (const PoleAtPoint&) {
                ok = false;
                break;
            }
        }
        if (ok) return at;
    }
    throw SingularLocusExhausted("no assignment off the excluded locus after retry budget");
}

}  // namespace crcartan

#endif
