#ifndef CRCARTAN_ZERO_TEST_HPP
#define CRCARTAN_ZERO_TEST_HPP

#include <optional>
#include <string>

#include "crcartan/poly.hpp"

namespace crcartan {

// ---------------------------------------------------------------------------
// The engine's oracle for every "identically zero" claim. Canonical mode is
// exact (expand to the normal form); probabilistic mode evaluates at random
// reality-consistent Gaussian-rational points (Schwartz-Zippel), deterministic
// given the seed, and returns a concrete witness when the expression is not
// zero. Pole-hitting assignments are redrawn.
// ---------------------------------------------------------------------------

struct ZeroVerdict {
    bool zero;
    std::optional<Assignment> witness;       // set when nonzero
    std::optional<GaussianRational> value;   // value at the witness
};

constexpr long kDefaultBound = 97;
constexpr int kDefaultTrials = 20;
constexpr int kPoleRetryBudget = 200;

inline ZeroVerdict is_identically_zero_canonical(Expr e,
                                                 ExpansionBudget budget = ExpansionBudget()) {
    CanonicalForm form = expand_canonical(e, budget);
    if (form.fraction.num.is_zero()) return {true, std::nullopt, std::nullopt};
    // find a nonzero witness for the report; the canonical verdict itself is exact
    std::vector<VarId> vars = variables_of(e);
    Rng rng(derive_seed(1, "canonical-witness"));
    for (int attempt = 0; attempt < kPoleRetryBudget; ++attempt) {
        Assignment at = detail::random_assignment(vars, rng, kDefaultBound);
        try {
            GaussianRational v = eval_exact(e, at);
            if (!v.is_zero()) return {false, at, v};
        } catch (const PoleAtPoint&) {
        }
    }
    return {false, std::nullopt, std::nullopt};
}

inline ZeroVerdict is_identically_zero_probabilistic(Expr e, int trials, uint64_t seed,
                                                     long bound = kDefaultBound) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::vector<VarId> vars = variables_of(e);
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        bool evaluated = false;
        for (int retry = 0; retry < kPoleRetryBudget && !evaluated; ++retry) {
            Assignment at = detail::random_assignment(vars, rng, bound);
            try {
                GaussianRational v = eval_exact(e, at);
                evaluated = true;
                if (!v.is_zero()) return {false, at, v};
            } catch (const PoleAtPoint&) {
            }
        }
        if (!evaluated)
            throw SingularLocusExhausted("could not draw a pole-free assignment");
    }
    return {true, std::nullopt, std::nullopt};
}

/// Canonical when the budget allows, probabilistic otherwise.
inline ZeroVerdict is_identically_zero_auto(Expr e, int trials, uint64_t seed,
                                            size_t canonical_budget = 200000,
                                            long bound = kDefaultBound) {
    try {
        return is_identically_zero_canonical(e, ExpansionBudget(canonical_budget));
    } catch (const ExpansionOverflow&) {
        return is_identically_zero_probabilistic(e, trials, seed, bound);
    }
}

}  // namespace crcartan

#endif
