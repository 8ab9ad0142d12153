#ifndef CRCARTAN_RATIONAL_HPP
#define CRCARTAN_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace crcartan {

struct PoleAtPoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact element of Q(i): re + im*i with arbitrary-precision rational parts.
/// mpq_class keeps each part reduced with a positive denominator.
class GaussianRational {
  public:
    mpq_class re, im;

    GaussianRational() : re(0), im(0) {}
    GaussianRational(long n) : re(n), im(0) {}
    GaussianRational(mpq_class r) : re(std::move(r)), im(0) {}
    GaussianRational(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}

    static GaussianRational i() { return GaussianRational(mpq_class(0), mpq_class(1)); }
    static GaussianRational integer(long n) { return GaussianRational(n); }
    static GaussianRational ratio(long num, long den) {
        if (den == 0) throw std::invalid_argument("zero denominator literal");
        mpq_class q(num, den);
        q.canonicalize();
        return GaussianRational(q);
    }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_one() const { return im == 0 && re == 1; }
    bool is_real() const { return im == 0; }

    GaussianRational conj() const { return {re, mpq_class(-im)}; }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
        return {mpq_class(a.re + b.re), mpq_class(a.im + b.im)};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
        return {mpq_class(a.re - b.re), mpq_class(a.im - b.im)};
    }
    friend GaussianRational operator-(const GaussianRational& a) {
        return {mpq_class(-a.re), mpq_class(-a.im)};
    }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
        return {mpq_class(a.re * b.re - a.im * b.im), mpq_class(a.re * b.im + a.im * b.re)};
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
        mpq_class n(b.re * b.re + b.im * b.im);
        if (n == 0) throw PoleAtPoint("division by zero Gaussian rational");
        return {mpq_class((a.re * b.re + a.im * b.im) / n),
                mpq_class((a.im * b.re - a.re * b.im) / n)};
    }
    GaussianRational pow(long e) const {
        if (e < 0) return GaussianRational(1) / pow(-e);
        GaussianRational acc(1), base = *this;
        for (; e; e >>= 1) {
            if (e & 1) acc = acc * base;
            if (e > 1) base = base * base;
        }
        return acc;
    }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }
    friend bool operator<(const GaussianRational& a, const GaussianRational& b) {
        int c = cmp(a.re, b.re);
        if (c != 0) return c < 0;
        return cmp(a.im, b.im) < 0;
    }

    /// Plain-grammar rendering, e.g. "2/3", "i", "-5*i", "(1/2+1/3*i)".
    std::string str() const {
        auto rat = [](const mpq_class& q) { return q.get_str(); };
        if (im == 0) return rat(re);
        std::string ims;
        if (im == 1) ims = "i";
        else if (im == -1) ims = "-i";
        else ims = rat(im) + "*i";
        if (re == 0) return ims;
        std::string s = rat(re);
        if (im > 0) s += "+" + ims;
        else s += ims;  // the imaginary part carries its own '-'
        return "(" + s + ")";
    }
};

}  // namespace crcartan

#endif
