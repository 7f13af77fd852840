#pragma once

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "gindex/angle.hpp"
#include "gindex/excision.hpp"

namespace gindex {

using cplx = std::complex<double>;

constexpr double kPruneTol = 1e-15;
constexpr int kOrderNegInf = -1000000;  // order of terms with compact radial support

// Multiset of excision-derivative factors attached to one term.  chi0 counts
// plain profile factors; derivs holds orders >= 1 (sorted).  A term with any
// order >= 1 factor is supported inside the transition interval.
struct ChiProfile {
    int chi0 = 1;
    std::vector<int> derivs;

    bool transition_only() const { return !derivs.empty(); }
    ChiProfile merged(const ChiProfile& o) const {
        ChiProfile r;
        r.chi0 = chi0 + o.chi0;
        r.derivs = derivs;
        r.derivs.insert(r.derivs.end(), o.derivs.begin(), o.derivs.end());
        std::sort(r.derivs.begin(), r.derivs.end());
        return r;
    }
    std::vector<int> multiset() const {
        std::vector<int> m(chi0, 0);
        m.insert(m.end(), derivs.begin(), derivs.end());
        return m;
    }
    auto tie() const { return std::make_pair(chi0, derivs); }
    bool operator<(const ChiProfile& o) const { return tie() < o.tie(); }
    bool operator==(const ChiProfile& o) const { return tie() == o.tie(); }
};

// One homogeneous-with-profile component: coeff * e^{i k.x} * r^deg * ang * chi,
// where ang = e^{i m theta} for n = 2 and the ray indicator for n = 1
// (m = +1 / -1 selects the positive / negative half-line).
struct TermKey {
    std::array<int, 2> k{0, 0};
    int m = 1;
    int deg = 0;
    ChiProfile chi;

    auto tie() const { return std::make_tuple(k, m, deg, chi); }
    bool operator<(const TermKey& o) const { return tie() < o.tie(); }
    bool operator==(const TermKey& o) const { return tie() == o.tie(); }
};

class AffineCanonical;  // group.hpp

// A finite sum of terms at a single h-order.  `n` is the torus dimension.
class ClassicalSymbol {
public:
    ClassicalSymbol() = default;
    explicit ClassicalSymbol(int n) : n_(n) {}

    int dim() const { return n_; }
    bool empty() const { return terms_.empty(); }
    const std::map<TermKey, cplx>& terms() const { return terms_; }

    void add_term(const TermKey& key, cplx c);
    ClassicalSymbol& operator+=(const ClassicalSymbol& o);
    ClassicalSymbol scaled(cplx s) const;

    // Pointwise product (exact: modes add, rays intersect, profiles merge).
    ClassicalSymbol mul(const ClassicalSymbol& o) const;

    // Exact derivatives. axis in [0, n).
    ClassicalSymbol dx(int axis) const;    // d/dx_axis
    ClassicalSymbol dxi(int axis) const;   // d/dxi_axis (polar rules)
    ClassicalSymbol Dx(int axis) const { return dx(axis).scaled(cplx(0, -1)); }
    // Directional xi-derivative <v, d/dxi>.
    ClassicalSymbol dxi_dir(const std::array<double, 2>& v) const;

    // Pullback along the affine canonical map C: (x,xi) -> (Ax+b, A^{-T}xi).
    ClassicalSymbol pullback(const AffineCanonical& C) const;

    cplx evaluate(const std::array<double, 2>& x, const std::array<double, 2>& xi,
                  const Excision& chi) const;

    // integral over T^n x R^n (with the profile): (2pi)^n * angular * radial.
    // Requires convergent germ tails (degree < -n); throws otherwise.
    cplx integrate(const Excision& chi) const;

    // Largest germ-tail degree (kOrderNegInf when every term is
    // transition-supported or the symbol is zero).
    int order() const;

    double max_abs_coeff() const;
    int x_bandwidth() const;   // max |k_i|
    int ang_bandwidth() const; // max |m| (n = 2), 0 for n = 1
    void prune(double tol = kPruneTol);

private:
    int n_ = 1;
    std::map<TermKey, cplx> terms_;
};

// h-polynomial of classical symbols, truncated at h^N.
class SemiclassicalSymbol {
public:
    SemiclassicalSymbol() = default;
    SemiclassicalSymbol(int n, int N) : n_(n), coeff_(N, ClassicalSymbol(n)) {}

    int dim() const { return n_; }
    int truncation() const { return int(coeff_.size()); }
    const ClassicalSymbol& at(int j) const { return coeff_.at(j); }
    ClassicalSymbol& at(int j) { return coeff_.at(j); }
    bool is_zero() const;

    SemiclassicalSymbol& operator+=(const SemiclassicalSymbol& o);
    SemiclassicalSymbol operator+(const SemiclassicalSymbol& o) const;
    SemiclassicalSymbol scaled(cplx s) const;

    // Kohn-Nirenberg star product truncated at h^N:
    //   (a*b)_t = sum_{k+l+|alpha|=t} (1/alpha!) dxi^alpha a_k . Dx^alpha b_l.
    SemiclassicalSymbol star(const SemiclassicalSymbol& o) const;

    // x- and xi-derivatives by multi-index.
    SemiclassicalSymbol derive(const std::array<int, 2>& alpha_x,
                               const std::array<int, 2>& beta_xi) const;

    SemiclassicalSymbol pullback(const AffineCanonical& C) const;

    cplx evaluate(const std::array<double, 2>& x, const std::array<double, 2>& xi, double h,
                  const Excision& chi) const;

    // h-graded integral; index j of the result pairs with h^j.
    std::vector<cplx> integrate(const Excision& chi) const;

    int order() const;          // max_j (order(a_j) + j), kOrderNegInf if empty
    int h_valuation() const;    // smallest j with a_j != 0, N if zero
    int x_bandwidth() const;
    int ang_bandwidth() const;
    double max_abs_coeff() const;
    void prune(double tol = kPruneTol);

private:
    int n_ = 1;
    std::vector<ClassicalSymbol> coeff_;
};

// Literal construction, mirroring the config record
// {j, d, k, m, re, im}.  For n = 1, m = +1/-1 selects a ray and m = 0 both.
struct TermSpec {
    int j = 0;
    int d = 0;
    std::array<int, 2> k{0, 0};
    int m = 0;
    cplx c{0.0, 0.0};
};

// Throws std::invalid_argument with a diagnostic on grading violations
// (order(a_j) > m_declared - j) or j >= N.
SemiclassicalSymbol make_symbol(int n, int N, const std::vector<TermSpec>& specs,
                                std::optional<int> declared_order = std::nullopt);

// Value of the profile-factor product at radius r.
double chi_factor_value(const ChiProfile& chi, double r, const Excision& exc);

}  // namespace gindex
