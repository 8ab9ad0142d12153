#ifndef CRCARTAN_EXPR_HPP
#define CRCARTAN_EXPR_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "crcartan/rational.hpp"
#include "crcartan/rng.hpp"
#include "crcartan/varid.hpp"

namespace crcartan {

struct DivisionByZeroExpr : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundVariable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CyclicBinding : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ExpansionOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularLocusExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Kind : uint8_t { Const, Var, Add, Mul, Div, Pow };

namespace detail {

// Fingerprints live in F_p, p = 15*2^27+1 (p = 1 mod 4 so -1 has a square root).
// Every node carries its value at one fixed reality-consistent assignment, mapped
// through the ring homomorphism Q(i) -> F_p. This gives O(1) screening for
// identically-zero denominators and cheap semantic sanity checks; all user-visible
// verdicts still come from the exact evaluation paths.
constexpr uint64_t kFpPrime = 2013265921ull;
constexpr uint64_t kFpPole = ~0ull;

inline uint64_t fp_mul(uint64_t a, uint64_t b) { return (a * b) % kFpPrime; }
inline uint64_t fp_add(uint64_t a, uint64_t b) { return (a + b) % kFpPrime; }
inline uint64_t fp_pow(uint64_t a, uint64_t e) {
    uint64_t r = 1;
    a %= kFpPrime;
    while (e) {
        if (e & 1) r = fp_mul(r, a);
        a = fp_mul(a, a);
        e >>= 1;
    }
    return r;
}
inline uint64_t fp_inv(uint64_t a) { return fp_pow(a, kFpPrime - 2); }

inline uint64_t fp_imaginary_unit() {
    static const uint64_t unit = [] {
        for (uint64_t t = 2;; ++t) {
            uint64_t x = fp_pow(t, (kFpPrime - 1) / 4);
            if (fp_mul(x, x) == kFpPrime - 1) return x;
        }
    }();
    return unit;
}

inline uint64_t fp_of_mpz(const mpz_class& n) {
    uint64_t r = mpz_fdiv_ui(n.get_mpz_t(), kFpPrime);
    return r;
}

inline uint64_t fp_of_rational(const GaussianRational& q) {
    uint64_t rd = fp_of_mpz(q.re.get_den());
    uint64_t id = fp_of_mpz(q.im.get_den());
    if (rd == 0 || id == 0) return kFpPole;
    uint64_t re = fp_mul(fp_of_mpz(q.re.get_num()), fp_inv(rd));
    uint64_t im = fp_mul(fp_of_mpz(q.im.get_num()), fp_inv(id));
    return fp_add(re, fp_mul(fp_imaginary_unit(), im));
}

/// Fingerprint value of a variable: image of a fixed Gaussian-integer point chosen
/// reality-consistently (conjugate pairs get conjugate points, self-conjugate
/// variables get real points), so semantically-zero expressions fingerprint to 0.
inline uint64_t fp_of_var(VarId v) {
    VarId rep = v;
    VarId cj = v.conj();
    bool flipped = cj.code() < v.code();
    if (flipped) rep = cj;
    uint64_t a = derive_seed(rep.code(), "fp-re") % (kFpPrime - 1) + 1;
    if (v.is_self_conjugate()) return a;
    uint64_t b = derive_seed(rep.code(), "fp-im") % (kFpPrime - 1) + 1;
    uint64_t ib = fp_mul(fp_imaginary_unit(), b);
    return flipped ? (a + kFpPrime - ib) % kFpPrime : fp_add(a, ib);
}

struct Node {
    Kind kind;
    uint32_t a = 0xFFFFFFFF, b = 0xFFFFFFFF;
    int64_t aux = 0;  // Const: constant index; Var: VarId code; Pow: exponent >= 2
    uint64_t fp = 0;
};

struct NodeKey {
    Kind kind;
    uint32_t a, b;
    int64_t aux;
    bool operator==(const NodeKey& o) const {
        return kind == o.kind && a == o.a && b == o.b && aux == o.aux;
    }
};
struct NodeKeyHash {
    size_t operator()(const NodeKey& k) const {
        uint64_t h = uint64_t(k.kind) * 0x9E3779B97F4A7C15ull;
        h ^= (uint64_t(k.a) << 1) + 0x2545F4914F6CDD1Dull * k.b;
        h *= 0xFF51AFD7ED558CCDull;
        h ^= uint64_t(k.aux) + (h >> 29);
        h *= 0xC4CEB9FE1A85EC53ull;
        return size_t(h ^ (h >> 32));
    }
};

/// Append-only node store with stable addresses and lock-free reads.
class Arena {
  public:
    static Arena& instance() {
        static Arena arena;
        return arena;
    }

    const Node& node(uint32_t id) const { return chunks_[id >> kChunkBits]->at(id & kChunkMask); }

    uint32_t intern(Kind kind, uint32_t a, uint32_t b, int64_t aux, uint64_t fp) {
        NodeKey key{kind, a, b, aux};
        std::lock_guard<std::mutex> lock(mu_);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        uint32_t id = size_;
        if ((id & kChunkMask) == 0) chunks_.push_back(std::make_unique<Chunk>());
        auto& slot = chunks_[id >> kChunkBits]->at(id & kChunkMask);
        slot = Node{kind, a, b, aux, fp};
        index_.emplace(key, id);
        ++size_;
        return id;
    }

    uint32_t intern_constant(const GaussianRational& q) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = const_index_.find(q);
        if (it != const_index_.end()) return it->second;
        uint32_t idx = uint32_t(constants_.size());
        constants_.push_back(q);
        const_index_.emplace(q, idx);
        return idx;
    }

    const GaussianRational& constant(uint32_t idx) const { return constants_[idx]; }
    uint32_t size() const { return size_; }

  private:
    static constexpr unsigned kChunkBits = 16;
    static constexpr uint32_t kChunkMask = (1u << kChunkBits) - 1;
    using Chunk = std::array<Node, 1u << kChunkBits>;

    Arena() = default;
    std::mutex mu_;
    std::vector<std::unique_ptr<Chunk>> chunks_;
    std::unordered_map<NodeKey, uint32_t, NodeKeyHash> index_;
    std::vector<GaussianRational> constants_;
    std::map<GaussianRational, uint32_t> const_index_;
    uint32_t size_ = 0;
};

}  // namespace detail

/// Immutable value handle into the structurally shared expression DAG.
class Expr {
  public:
    Expr() : id_(zero().id_) {}

    static Expr constant(const GaussianRational& q) {
        auto& arena = detail::Arena::instance();
        uint32_t cidx = arena.intern_constant(q);
        return Expr(arena.intern(Kind::Const, 0xFFFFFFFF, 0xFFFFFFFF, cidx, detail::fp_of_rational(q)));
    }
    static Expr integer(long n) { return constant(GaussianRational::integer(n)); }
    static Expr ratio(long n, long d) { return constant(GaussianRational::ratio(n, d)); }
    static Expr I() { return constant(GaussianRational::i()); }
    static Expr zero() {
        static const Expr e = integer(0);
        return e;
    }
    static Expr one() {
        static const Expr e = integer(1);
        return e;
    }
    static Expr var(VarId v) {
        auto& arena = detail::Arena::instance();
        return Expr(arena.intern(Kind::Var, 0xFFFFFFFF, 0xFFFFFFFF, v.code(), detail::fp_of_var(v)));
    }

    uint32_t id() const { return id_; }
    static Expr from_id(uint32_t id) { return Expr(id); }

    Kind kind() const { return node().kind; }
    Expr child_a() const { return Expr(node().a); }
    Expr child_b() const { return Expr(node().b); }
    long pow_exponent() const { return long(node().aux); }
    VarId var_id() const;
    const GaussianRational& constant_value() const {
        return detail::Arena::instance().constant(uint32_t(node().aux));
    }
    uint64_t fp() const { return node().fp; }

    bool is_const() const { return kind() == Kind::Const; }
    bool is_zero_const() const { return is_const() && constant_value().is_zero(); }
    bool is_one_const() const { return is_const() && constant_value().is_one(); }

    bool same(Expr o) const { return id_ == o.id_; }
    friend bool operator==(Expr a, Expr b) { return a.id_ == b.id_; }
    friend bool operator!=(Expr a, Expr b) { return a.id_ != b.id_; }

  private:
    explicit Expr(uint32_t id) : id_(id) {}
    const detail::Node& node() const { return detail::Arena::instance().node(id_); }
    uint32_t id_;
};

/// Exact evaluation point: every assigned variable maps to a Gaussian rational.
using Assignment = std::map<VarId, GaussianRational>;

inline VarId Expr::var_id() const {
    uint32_t code = uint32_t(node().aux);
    switch (code) {
        case 0: return VarId::z();
        case 1: return VarId::zb();
        case 2: return VarId::u();
        case 3: return VarId::gb();
        case 4: return VarId::gbb();
        case 5: return VarId::gc();
        case 6: return VarId::gcb();
        case 7: return VarId::gs();
        case 8: return VarId::gsb();
        case 9: return VarId::gr();
        case 10: return VarId::grb();
        default: {
            uint32_t rel = code - 0x10000;
            return VarId::jet(int(rel >> 10) & 31, int(rel >> 5) & 31, int(rel) & 31);
        }
    }
}

// ---------------------------------------------------------------------------
// Construction with light normalization. No eager expansion: products of sums
// stay factored; sharing is preserved by hash-consing.
// ---------------------------------------------------------------------------

inline Expr operator+(Expr a, Expr b);
inline Expr operator*(Expr a, Expr b);
inline Expr operator/(Expr a, Expr b);
inline Expr pow(Expr a, long n);

namespace detail {

inline uint64_t fp_combine(Kind kind, uint64_t fa, uint64_t fb, int64_t aux) {
    if (fa == kFpPole || (kind != Kind::Pow && fb == kFpPole)) return kFpPole;
    switch (kind) {
        case Kind::Add: return fp_add(fa, fb);
        case Kind::Mul: return fp_mul(fa, fb);
        case Kind::Div: return fb == 0 ? kFpPole : fp_mul(fa, fp_inv(fb));
        case Kind::Pow: return fp_pow(fa, uint64_t(aux));
        default: return 0;
    }
}

inline Expr make(Kind kind, Expr a, Expr b, int64_t aux = 0) {
    auto& arena = Arena::instance();
    uint64_t fp = fp_combine(kind, a.fp(), kind == Kind::Pow ? 0 : b.fp(), aux);
    return Expr::from_id(arena.intern(kind, a.id(), kind == Kind::Pow ? 0xFFFFFFFF : b.id(),
                                      kind == Kind::Pow ? aux : 0, fp));
}

// Probabilistic nonzero probe used only when a denominator's fingerprint is
// suspicious; defined in zero_test-free terms right here so the kernel stands alone.
bool definitely_not_zero(Expr e);

}  // namespace detail

inline Expr operator+(Expr a, Expr b) {
    if (a.is_zero_const()) return b;
    if (b.is_zero_const()) return a;
    if (a.is_const() && b.is_const()) return Expr::constant(a.constant_value() + b.constant_value());
    if (a == b) return Expr::integer(2) * a;
    // x + (-1)*x and (c1*x) + (c2*x) fold; catches structural cancellation in residuals.
    auto const_factor = [](Expr e) -> std::pair<bool, Expr> {
        if (e.kind() == Kind::Mul) {
            if (e.child_a().is_const()) return {true, e.child_b()};
            if (e.child_b().is_const()) return {true, e.child_a()};
        }
        return {false, e};
    };
    auto coeff_of = [](Expr e, Expr base) -> GaussianRational {
        if (e == base) return GaussianRational(1);
        if (e.child_a().is_const() && e.child_b() == base) return e.child_a().constant_value();
        return e.child_b().constant_value();
    };
    auto [fa, basea] = const_factor(a);
    auto [fb, baseb] = const_factor(b);
    if ((fa || fb) && basea == baseb) {
        GaussianRational ca = fa ? coeff_of(a, basea) : GaussianRational(1);
        GaussianRational cb = fb ? coeff_of(b, baseb) : GaussianRational(1);
        return Expr::constant(ca + cb) * basea;
    }
    if (a.id() > b.id()) std::swap(a, b);
    return detail::make(Kind::Add, a, b);
}

inline Expr operator*(Expr a, Expr b) {
    if (a.is_zero_const() || b.is_zero_const()) return Expr::zero();
    if (a.is_one_const()) return b;
    if (b.is_one_const()) return a;
    if (a.is_const() && b.is_const()) return Expr::constant(a.constant_value() * b.constant_value());
    // collapse repeated factors into powers so derivative chains stay compact
    auto base_exp = [](Expr e) -> std::pair<Expr, long> {
        if (e.kind() == Kind::Pow) return {e.child_a(), e.pow_exponent()};
        return {e, 1};
    };
    auto [ba, ea] = base_exp(a);
    auto [bb, eb] = base_exp(b);
    if (ba == bb) return pow(ba, ea + eb);
    if (a.id() > b.id()) std::swap(a, b);
    return detail::make(Kind::Mul, a, b);
}

inline Expr operator-(Expr a) { return Expr::integer(-1) * a; }
inline Expr operator-(Expr a, Expr b) { return a + (-b); }

inline Expr pow(Expr a, long n) {
    if (n == 0) return Expr::one();
    if (n == 1) return a;
    if (a.is_const()) return Expr::constant(a.constant_value().pow(n));
    if (n < 0) return Expr::one() / pow(a, -n);
    if (a.kind() == Kind::Pow) return pow(a.child_a(), a.pow_exponent() * n);
    return detail::make(Kind::Pow, a, a, n);
}

inline Expr operator/(Expr a, Expr b) {
    if (b.is_const()) {
        if (b.constant_value().is_zero()) throw DivisionByZeroExpr("division by the constant zero");
        return a * Expr::constant(GaussianRational(1) / b.constant_value());
    }
    if (b.fp() == 0 || b.fp() == detail::kFpPole) {
        if (!detail::definitely_not_zero(b))
            throw DivisionByZeroExpr("denominator is identically zero");
    }
    if (a.is_zero_const()) return Expr::zero();
    if (a == b) return Expr::one();
    return detail::make(Kind::Div, a, b);
}

// ---------------------------------------------------------------------------
// Variable scan and exact evaluation.
// ---------------------------------------------------------------------------

namespace detail {

template <class Visit>
void postorder(Expr root, Visit&& visit) {
    std::vector<uint32_t> stack{root.id()};
    std::unordered_map<uint32_t, bool> expanded;
    while (!stack.empty()) {
        uint32_t id = stack.back();
        auto& state = expanded[id];
        const Node& n = Arena::instance().node(id);
        if (!state) {
            state = true;
            if (n.kind == Kind::Add || n.kind == Kind::Mul || n.kind == Kind::Div) {
                stack.push_back(n.a);
                stack.push_back(n.b);
                continue;
            }
            if (n.kind == Kind::Pow) {
                stack.push_back(n.a);
                continue;
            }
        }
        stack.pop_back();
        visit(id, n);
    }
}

}  // namespace detail

inline std::vector<VarId> variables_of(Expr e) {
    std::map<VarId, bool> seen;
    std::unordered_map<uint32_t, bool> visited;
    detail::postorder(e, [&](uint32_t id, const detail::Node& n) {
        if (visited[id]) return;
        visited[id] = true;
        if (n.kind == Kind::Var) seen[Expr::from_id(id).var_id()] = true;
    });
    std::vector<VarId> out;
    out.reserve(seen.size());
    for (auto& [v, _] : seen) out.push_back(v);
    return out;
}

namespace detail {

inline void eval_into(Expr e, const Assignment& at,
                      std::unordered_map<uint32_t, GaussianRational>& memo) {
    postorder(e, [&](uint32_t id, const Node& n) {
        if (memo.count(id)) return;
        switch (n.kind) {
            case Kind::Const:
                memo.emplace(id, detail::Arena::instance().constant(uint32_t(n.aux)));
                break;
            case Kind::Var: {
                auto it = at.find(Expr::from_id(id).var_id());
                if (it == at.end())
                    throw UnboundVariable("unbound variable " + Expr::from_id(id).var_id().name());
                memo.emplace(id, it->second);
                break;
            }
            case Kind::Add: memo.emplace(id, memo.at(n.a) + memo.at(n.b)); break;
            case Kind::Mul: memo.emplace(id, memo.at(n.a) * memo.at(n.b)); break;
            case Kind::Div: {
                const GaussianRational& den = memo.at(n.b);
                if (den.is_zero()) throw PoleAtPoint("assignment hits a pole");
                memo.emplace(id, memo.at(n.a) / den);
                break;
            }
            case Kind::Pow: memo.emplace(id, memo.at(n.a).pow(long(n.aux))); break;
        }
    });
}

}  // namespace detail

/// Exact evaluation, memoized over the DAG; a homomorphism Q(i)-expressions -> Q(i).
/// Throws UnboundVariable / PoleAtPoint.
inline GaussianRational eval_exact(Expr e, const Assignment& at) {
    std::unordered_map<uint32_t, GaussianRational> memo;
    detail::eval_into(e, at, memo);
    return memo.at(e.id());
}

/// Evaluate many expressions at one point with a shared memo (one DAG pass).
inline std::vector<GaussianRational> eval_exact_multi(const std::vector<Expr>& es,
                                                      const Assignment& at) {
    std::unordered_map<uint32_t, GaussianRational> memo;
    std::vector<GaussianRational> out;
    out.reserve(es.size());
    for (const Expr& e : es) {
        detail::eval_into(e, at, memo);
        out.push_back(memo.at(e.id()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reality-consistent random assignments (kernel-internal flavor; the public
// operation with exclusion handling lives with the jet calculus).
// ---------------------------------------------------------------------------

namespace detail {

inline GaussianRational random_rational(Rng& rng, long bound, bool real_only) {
    mpq_class re(rng.uniform(-bound, bound), rng.uniform(1, bound));
    re.canonicalize();
    if (real_only) return GaussianRational(re);
    mpq_class im(rng.uniform(-bound, bound), rng.uniform(1, bound));
    im.canonicalize();
    return GaussianRational(re, im);
}

/// Draw one value per conjugate pair; partners get conjugates, self-conjugate
/// variables real values.
inline Assignment random_assignment(const std::vector<VarId>& vars, Rng& rng, long bound = 97) {
    Assignment at;
    for (VarId v : vars) {
        VarId cj = v.conj();
        VarId rep = (cj.code() < v.code()) ? cj : v;
        if (at.count(rep)) continue;
        GaussianRational q = random_rational(rng, bound, rep.is_self_conjugate());
        at[rep] = q;
        if (!(rep == rep.conj())) at[rep.conj()] = q.conj();
    }
    return at;
}

inline bool definitely_not_zero(Expr e) {
    std::vector<VarId> vars = variables_of(e);
    Rng rng(derive_seed(0x5EEDDEADBEEFull, "den-check"));
    int poles = 0;
    for (int trial = 0; trial < 12 + poles && poles < 64; ++trial) {
        try {
            if (!eval_exact(e, random_assignment(vars, rng)).is_zero()) return true;
        } catch (const PoleAtPoint&) {
            ++poles;
        }
    }
    return false;
}

}  // namespace detail

}  // namespace crcartan

#endif
