#ifndef CRCARTAN_FORMS_HPP
#define CRCARTAN_FORMS_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "crcartan/invariants.hpp"

namespace crcartan {

struct DegreeOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnrewritableCoefficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularBasis : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Graded exterior-algebra element with Expr coefficients over an indexed
/// 1-form basis. Antisymmetry is normalized away: index tuples are strictly
/// increasing, signs absorbed into the coefficients. Degree <= 3 (3-forms only
/// arise transiently inside d^2 checks).
class Form {
  public:
    explicit Form(int degree = 1) : degree_(degree) {
        if (degree < 0 || degree > 3) throw DegreeOverflow("form degree out of range");
    }

    static Form scalar(Expr c) {
        Form f(0);
        f.add({}, c);
        return f;
    }
    static Form d_coord(int index) {
        Form f(1);
        f.add({index}, Expr::one());
        return f;
    }

    int degree() const { return degree_; }
    const std::map<std::vector<int>, Expr>& terms() const { return terms_; }
    bool structurally_zero() const { return terms_.empty(); }

    Expr coefficient(const std::vector<int>& idx) const {
        auto it = terms_.find(idx);
        return it == terms_.end() ? Expr::zero() : it->second;
    }

    /// Insert c * e_idx, sorting the indices with the wedge sign; repeated
    /// indices annihilate, structural zeros are pruned.
    void add(std::vector<int> idx, Expr c) {
        if (int(idx.size()) != degree_) throw DegreeOverflow("index tuple does not match degree");
        if (c.is_zero_const()) return;
        int sign = 1;
        for (size_t i = 1; i < idx.size(); ++i)
            for (size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
                if (idx[j - 1] == idx[j]) return;
                std::swap(idx[j - 1], idx[j]);
                sign = -sign;
            }
        if (sign < 0) c = -c;
        auto it = terms_.find(idx);
        if (it == terms_.end()) {
            terms_.emplace(std::move(idx), c);
        } else {
            it->second = it->second + c;
            if (it->second.is_zero_const()) terms_.erase(it);
        }
    }

    Form& operator+=(const Form& o) {
        if (o.degree_ != degree_) throw DegreeOverflow("degree mismatch in sum");
        for (auto& [idx, c] : o.terms_) add(idx, c);
        return *this;
    }
    friend Form operator+(Form a, const Form& b) {
        a += b;
        return a;
    }
    friend Form operator-(const Form& a) {
        Form out(a.degree_);
        for (auto& [idx, c] : a.terms_) out.add(idx, -c);
        return out;
    }
    friend Form operator-(Form a, const Form& b) { return a + (-b); }

    Form scaled(Expr f) const {
        Form out(degree_);
        for (auto& [idx, c] : terms_) out.add(idx, f * c);
        return out;
    }

  private:
    int degree_;
    std::map<std::vector<int>, Expr> terms_;
};

inline Form wedge(const Form& a, const Form& b) {
    int deg = a.degree() + b.degree();
    if (deg > 3) throw DegreeOverflow("wedge degree exceeds 3");
    Form out(deg);
    for (auto& [ia, ca] : a.terms())
        for (auto& [ib, cb] : b.terms()) {
            std::vector<int> idx = ia;
            idx.insert(idx.end(), ib.begin(), ib.end());
            out.add(std::move(idx), ca * cb);
        }
    return out;
}

// ---------------------------------------------------------------------------
// A stage of the equivalence method: a coordinate chart (base + fiber
// coordinates) together with the lifted coframe expressed in the coordinate
// differentials. Eliminated parameters (sbar, r, rb at the final stage) never
// appear as coordinates; their differentials come from differentiating the
// binding right-hand sides.
// ---------------------------------------------------------------------------

struct Stage {
    std::string name;
    std::vector<VarId> coords;
    std::vector<std::string> coord_names;
    std::vector<Form> coframe;
    std::vector<std::string> coframe_names;

    int coord_index(VarId v) const {
        for (size_t k = 0; k < coords.size(); ++k)
            if (coords[k] == v) return int(k);
        return -1;
    }
};

inline Expr stage_derivative(const Stage& stage, Expr e, int k, int max_order = kDefaultMaxOrder) {
    VarId v = stage.coords[k];
    if (v.is_base()) return total_derivative(e, v, max_order);
    return partial_by(e, v);
}

inline Form exterior_d(const Form& w, const Stage& stage, int max_order = kDefaultMaxOrder) {
    Form out(w.degree() + 1);
    for (auto& [idx, c] : w.terms()) {
        for (VarId v : variables_of(c))
            if (v.is_group() && stage.coord_index(v) < 0)
                throw UnrewritableCoefficient("coefficient depends on eliminated parameter " +
                                              v.name() + " at stage " + stage.name);
        for (size_t k = 0; k < stage.coords.size(); ++k) {
            Expr dc = stage_derivative(stage, c, int(k), max_order);
            if (dc.is_zero_const()) continue;
            std::vector<int> nidx;
            nidx.reserve(idx.size() + 1);
            nidx.push_back(int(k));
            nidx.insert(nidx.end(), idx.begin(), idx.end());
            out.add(std::move(nidx), dc);
        }
    }
    return out;
}

/// Conjugation of a form: conjugate coefficients, map each basis index to its
/// conjugate coordinate's index. Only valid when every occurring coordinate
/// has its partner in the chart.
inline Form conj_form(const Form& w, const Stage& stage) {
    Form out(w.degree());
    for (auto& [idx, c] : w.terms()) {
        std::vector<int> nidx;
        nidx.reserve(idx.size());
        for (int k : idx) {
            int pk = stage.coord_index(stage.coords[k].conj());
            if (pk < 0)
                throw UnrewritableCoefficient("coordinate " + stage.coords[k].name() +
                                              " has no conjugate partner at stage " + stage.name);
            nidx.push_back(pk);
        }
        out.add(std::move(nidx), conjugate(c));
    }
    return out;
}

/// Pairing of a 1-form in a base chart (dz, dzb, du) with a vector field.
inline Expr pair_with_field(const Form& w, const Stage& stage, const VectorField& X) {
    Expr acc = Expr::zero();
    for (auto& [idx, c] : w.terms()) {
        VarId v = stage.coords[idx[0]];
        if (v == VarId::z()) acc = acc + c * X.coef_z;
        else if (v == VarId::zb()) acc = acc + c * X.coef_zb;
        else if (v == VarId::u()) acc = acc + c * X.coef_u;
        else throw UnrewritableCoefficient("pairing only defined over base coordinates");
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Exact linear algebra over the expression field: coframe matrix inversion and
// basis changes. Pivots are screened by fingerprint and confirmed by the
// probabilistic nonzero probe.
// ---------------------------------------------------------------------------

using ExprMatrix = std::vector<std::vector<Expr>>;

inline ExprMatrix coframe_matrix(const Stage& stage) {
    size_t n = stage.coords.size();
    if (stage.coframe.size() != n) throw SingularBasis("coframe is not square at stage " + stage.name);
    ExprMatrix S(n, std::vector<Expr>(n, Expr::zero()));
    for (size_t i = 0; i < n; ++i) {
        if (stage.coframe[i].degree() != 1) throw SingularBasis("coframe entries must be 1-forms");
        for (auto& [idx, c] : stage.coframe[i].terms()) S[i][size_t(idx[0])] = c;
    }
    return S;
}

inline bool pivot_usable(Expr e) {
    if (e.is_zero_const()) return false;
    if (e.fp() != 0 && e.fp() != detail::kFpPole) return true;
    return detail::definitely_not_zero(e);
}

inline ExprMatrix invert_matrix(ExprMatrix S) {
    size_t n = S.size();
    ExprMatrix T(n, std::vector<Expr>(n, Expr::zero()));
    for (size_t i = 0; i < n; ++i) T[i][i] = Expr::one();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && !pivot_usable(S[piv][col])) ++piv;
        if (piv == n) throw SingularBasis("coframe matrix is singular");
        std::swap(S[piv], S[col]);
        std::swap(T[piv], T[col]);
        Expr inv = Expr::one() / S[col][col];
        for (size_t j = 0; j < n; ++j) {
            S[col][j] = S[col][j] * inv;
            T[col][j] = T[col][j] * inv;
        }
        for (size_t row = 0; row < n; ++row) {
            if (row == col) continue;
            Expr f = S[row][col];
            if (f.is_zero_const()) continue;
            for (size_t j = 0; j < n; ++j) {
                S[row][j] = S[row][j] - f * S[col][j];
                T[row][j] = T[row][j] - f * T[col][j];
            }
        }
    }
    return T;
}

/// Rewrite a form by substituting each basis 1-form e_j with images[j].
inline Form substitute_basis(const Form& w, const std::vector<Form>& images) {
    Form out(w.degree());
    for (auto& [idx, c] : w.terms()) {
        Form acc = Form::scalar(c);
        for (int k : idx) acc = wedge(acc, images[size_t(k)]);
        out += acc;
    }
    return out;
}

/// Coordinate-basis form -> lifted-basis form (indices into stage.coframe).
inline Form to_lifted_basis(const Form& w, const Stage& stage, const ExprMatrix& inverse) {
    std::vector<Form> images;
    size_t n = stage.coords.size();
    images.reserve(n);
    for (size_t j = 0; j < n; ++j) {
        Form img(1);
        for (size_t i = 0; i < n; ++i) img.add({int(i)}, inverse[j][i]);
        images.push_back(img);
    }
    return substitute_basis(w, images);
}

/// Lifted-basis form -> coordinate-basis form.
inline Form to_coordinate_basis(const Form& w, const Stage& stage) {
    return substitute_basis(w, stage.coframe);
}

}  // namespace crcartan

#endif
