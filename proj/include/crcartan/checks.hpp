#ifndef CRCARTAN_CHECKS_HPP
#define CRCARTAN_CHECKS_HPP

#include <string>
#include <vector>

#include "crcartan/forms.hpp"
#include "crcartan/parser.hpp"

namespace crcartan {

/// One verification result; details carry witnesses, residual values, counts.
struct Check {
    std::string name;
    std::string status;  // "pass" | "fail" | "report"
    std::map<std::string, std::string> details;

    bool passed() const { return status != "fail"; }
    static Check pass(std::string name) { return {std::move(name), "pass", {}}; }
    static Check fail(std::string name) { return {std::move(name), "fail", {}}; }
};

struct SuiteConfig {
    uint64_t seed = 7;
    int trials = kDefaultTrials;
    long bound = kDefaultBound;
    size_t budget = 5000000;
    size_t canonical_budget = 200000;  // ceiling for opportunistic canonical zero tests
    Mutations mutations;
};

struct NamedExpr {
    std::string name;
    Expr e;
};

namespace detail {

inline Assignment restrict_assignment(const Assignment& at, Expr e) {
    Assignment out;
    for (VarId v : variables_of(e)) {
        auto it = at.find(v);
        if (it != at.end()) out.emplace(*it);
    }
    return out;
}

}  // namespace detail

/// Zero-test a family of residuals at shared random reality-consistent points:
/// one DAG evaluation pass per trial covers every residual.
inline std::vector<Check> zero_test_group(const std::vector<NamedExpr>& residuals, int trials,
                                          uint64_t seed, long bound = kDefaultBound) {
    std::vector<Check> checks(residuals.size());
    std::vector<bool> failed(residuals.size(), false);
    for (size_t i = 0; i < residuals.size(); ++i) checks[i] = Check::pass(residuals[i].name);

    std::vector<VarId> vars;
    std::vector<Expr> exprs;
    for (auto& ne : residuals) {
        exprs.push_back(ne.e);
        for (VarId v : variables_of(ne.e)) vars.push_back(v);
    }
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        bool evaluated = false;
        for (int retry = 0; retry < kPoleRetryBudget && !evaluated; ++retry) {
            Assignment at = detail::random_assignment(vars, rng, bound);
            try {
                std::vector<GaussianRational> values = eval_exact_multi(exprs, at);
                evaluated = true;
                for (size_t i = 0; i < residuals.size(); ++i) {
                    if (failed[i] || values[i].is_zero()) continue;
                    failed[i] = true;
                    checks[i].status = "fail";
                    checks[i].details["witness"] =
                        render_assignment(detail::restrict_assignment(at, exprs[i]));
                    checks[i].details["residual"] = values[i].str();
                }
            } catch (const PoleAtPoint&) {
            }
        }
        if (!evaluated) throw SingularLocusExhausted("no pole-free assignment for residual group");
    }
    for (size_t i = 0; i < residuals.size(); ++i)
        if (!failed[i]) checks[i].details["trials"] = std::to_string(trials);
    return checks;
}

/// Single-residual zero check; canonical first when requested and affordable,
/// probabilistic fallback.
inline Check check_zero(const std::string& name, Expr residual, const SuiteConfig& cfg,
                        bool prefer_canonical = false) {
    Check check = Check::pass(name);
    if (prefer_canonical) {
        try {
            ZeroVerdict verdict = is_identically_zero_canonical(residual, ExpansionBudget(cfg.canonical_budget));
            check.details["mode"] = "canonical";
            if (!verdict.zero) {
                check.status = "fail";
                if (verdict.witness) check.details["witness"] = render_assignment(*verdict.witness);
                if (verdict.value) check.details["residual"] = verdict.value->str();
            }
            return check;
        } catch (const ExpansionOverflow&) {
        }
    }
    ZeroVerdict verdict =
        is_identically_zero_probabilistic(residual, cfg.trials, derive_seed(cfg.seed, name), cfg.bound);
    check.details["mode"] = "probabilistic";
    check.details["trials"] = std::to_string(cfg.trials);
    if (!verdict.zero) {
        check.status = "fail";
        if (verdict.witness) check.details["witness"] = render_assignment(*verdict.witness);
        if (verdict.value) check.details["residual"] = verdict.value->str();
    }
    return check;
}

/// Zero-test every coefficient of a residual form; one Check per form.
inline Check check_form_zero(const std::string& name, const Form& residual, const Stage& stage,
                             const SuiteConfig& cfg, int trials_override = 0) {
    std::vector<NamedExpr> comps;
    for (auto& [idx, c] : residual.terms()) {
        std::string label;
        for (size_t k = 0; k < idx.size(); ++k)
            label += (k ? "^" : "") + std::string("d") + stage.coords[size_t(idx[k])].name();
        comps.push_back({label, c});
    }
    Check check = Check::pass(name);
    check.details["components"] = std::to_string(comps.size());
    if (comps.empty()) {
        check.details["mode"] = "structural";
        return check;
    }
    int trials = trials_override > 0 ? trials_override : cfg.trials;
    check.details["mode"] = "probabilistic";
    check.details["trials"] = std::to_string(trials);
    std::vector<Check> sub = zero_test_group(comps, trials, derive_seed(cfg.seed, name), cfg.bound);
    for (auto& s : sub) {
        if (!s.passed()) {
            check.status = "fail";
            check.details["component"] = s.name;
            auto w = s.details.find("witness");
            if (w != s.details.end()) check.details["witness"] = w->second;
            auto r = s.details.find("residual");
            if (r != s.details.end()) check.details["residual"] = r->second;
            break;
        }
    }
    return check;
}

}  // namespace crcartan

#endif
