#ifndef CRCARTAN_VARID_HPP
#define CRCARTAN_VARID_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace crcartan {

struct JetOrderExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Identifier of an indeterminate.
/// base coordinates z, zb, u; jet coordinates phi[a,b,c]; group parameters b, bb, c, cb, s, sb.
/// Jets encode the multi-index of d_z^a d_zb^b d_u^c phi; conjugation swaps a and b.
class VarId {
  public:
    enum class Kind : uint8_t { Base, Jet, Group };

    static constexpr int kMaxIndex = 30;  // hard cap per jet index (environment bound, not the order cap)

    constexpr VarId() : code_(0) {}

    static constexpr VarId z() { return VarId(0); }
    static constexpr VarId zb() { return VarId(1); }
    static constexpr VarId u() { return VarId(2); }
    static constexpr VarId gb() { return VarId(3); }   // group parameter b
    static constexpr VarId gbb() { return VarId(4); }  // bb
    static constexpr VarId gc() { return VarId(5); }   // c
    static constexpr VarId gcb() { return VarId(6); }  // cb
    static constexpr VarId gs() { return VarId(7); }   // s
    static constexpr VarId gsb() { return VarId(8); }  // sb
    // prolonged parameters; appear only in intermediate torsion expressions,
    // never as coordinates of a stage (they are eliminated by their bindings)
    static constexpr VarId gr() { return VarId(9); }    // r
    static constexpr VarId grb() { return VarId(10); }  // rb

    static VarId jet(int a, int b, int c) {
        if (a < 0 || b < 0 || c < 0 || a > kMaxIndex || b > kMaxIndex || c > kMaxIndex)
            throw JetOrderExceeded("jet multi-index out of range");
        return VarId(kJetBase + (uint32_t(a) << 10) + (uint32_t(b) << 5) + uint32_t(c));
    }

    uint32_t code() const { return code_; }
    Kind kind() const {
        if (code_ < 3) return Kind::Base;
        if (code_ < 11) return Kind::Group;
        return Kind::Jet;
    }
    bool is_jet() const { return code_ >= kJetBase; }
    bool is_group() const { return code_ >= 3 && code_ < 11; }
    bool is_base() const { return code_ < 3; }

    int jet_a() const { return int((code_ - kJetBase) >> 10) & 31; }
    int jet_b() const { return int((code_ - kJetBase) >> 5) & 31; }
    int jet_c() const { return int(code_ - kJetBase) & 31; }
    int jet_order() const { return jet_a() + jet_b() + jet_c(); }

    /// Conjugation pairing: z<->zb, u<->u, b<->bb, c<->cb, s<->sb, jet(a,b,c)<->jet(b,a,c).
    VarId conj() const {
        switch (code_) {
            case 0: return zb();
            case 1: return z();
            case 2: return u();
            case 3: return gbb();
            case 4: return gb();
            case 5: return gcb();
            case 6: return gc();
            case 7: return gsb();
            case 8: return gs();
            case 9: return grb();
            case 10: return gr();
            default: return jet(jet_b(), jet_a(), jet_c());
        }
    }
    bool is_self_conjugate() const { return conj() == *this; }

    /// Total order for canonical forms: base < jet (graded-lex multi-index) < group.
    uint64_t sort_key() const {
        if (is_base()) return code_;
        if (is_jet()) {
            uint64_t total = uint64_t(jet_order());
            return (1ull << 40) + (total << 20) + ((code_ - kJetBase));
        }
        return (2ull << 40) + (code_ - 3);
    }

    std::string name() const {
        switch (code_) {
            case 0: return "z";
            case 1: return "zb";
            case 2: return "u";
            case 3: return "b";
            case 4: return "bb";
            case 5: return "c";
            case 6: return "cb";
            case 7: return "s";
            case 8: return "sb";
            case 9: return "r";
            case 10: return "rb";
            default:
                return "phi[" + std::to_string(jet_a()) + "," + std::to_string(jet_b()) + "," +
                       std::to_string(jet_c()) + "]";
        }
    }

    friend bool operator==(VarId a, VarId b) { return a.code_ == b.code_; }
    friend bool operator!=(VarId a, VarId b) { return a.code_ != b.code_; }
    friend bool operator<(VarId a, VarId b) { return a.sort_key() < b.sort_key(); }

  private:
    explicit constexpr VarId(uint32_t code) : code_(code) {}
    static constexpr uint32_t kJetBase = 0x10000;
    uint32_t code_;
};

}  // namespace crcartan

#endif
