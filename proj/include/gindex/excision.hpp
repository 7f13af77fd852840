#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

namespace gindex {

// Radial excision profile used by every symbol that vanishes near the zero
// section: a polynomial smoothstep rising from 0 to 1 on [lo, hi], constant
// outside.  All derivatives up to `smoothness` vanish at both knots, so the
// profile is C^smoothness on (0, inf) and identically 1 on the cosphere
// |xi| >= hi.
class Excision {
public:
    Excision(double lo, double hi, int smoothness);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int smoothness() const { return q_; }

    // Value of the p-th derivative of the profile at radius r.  p = 0 is the
    // profile itself.  At the knots the one-sided limits agree for p <= q;
    // we evaluate the constant branch at r == hi so the cosphere sees the
    // plain germ.
    double deriv(int p, double r) const;

    // Exact integral over (0, inf) of
    //     r^pow * prod_i profile^(derivs[i])(r)
    // where `derivs` is a multiset of derivative orders (order 0 entries are
    // plain profile factors).  Factors of order >= 1 restrict the support to
    // the transition interval.  When the integrand has an unbounded tail
    // (all orders 0) the germ tail r^pow requires pow < -1; violations throw.
    double integral(int pow, const std::vector<int>& derivs) const;

    // Same integral restricted to the transition interval [lo, hi]; always
    // finite.  integral() = transition_integral() + tail for pure-profile
    // factor sets.
    double transition_integral(int pow, const std::vector<int>& derivs) const;

    // Tail part only: integral of r^pow over [hi, inf). Requires pow < -1.
    double tail_integral(int pow) const;

    bool operator==(const Excision& o) const {
        return lo_ == o.lo_ && hi_ == o.hi_ && q_ == o.q_;
    }

private:
    double lo_, hi_;
    int q_;
    // Coefficients of the smoothstep in the scaled variable t = (r-lo)/(hi-lo),
    // one poly per derivative order (already divided by width^p).
    std::vector<std::vector<double>> dpolys_;
    mutable std::map<std::pair<int, std::vector<int>>, double> cache_;

    double eval_poly(int p, double t) const;
};

// Shared Gauss-Legendre rule, exact for polynomial integrands of degree
// <= 2*GL_POINTS-1 and geometrically convergent for analytic ones.
struct GaussLegendre {
    static constexpr int GL_POINTS = 320;
    static const GaussLegendre& get();
    std::vector<double> node, weight;  // on [-1, 1]

private:
    GaussLegendre();
};

}  // namespace gindex
