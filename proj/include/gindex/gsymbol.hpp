#pragma once

#include <map>
#include <string>
#include <vector>

#include "gindex/group.hpp"
#include "gindex/symbol.hpp"

namespace gindex {

// Element of the unitalized crossed product: scalar + finitely supported map
// from group-ball elements to semiclassical symbols (common truncation).
class GSymbol {
public:
    GSymbol() = default;
    GSymbol(const GroupStructure* grp, int N, cplx scalar = 0.0)
        : grp_(grp), N_(N), scalar_(scalar) {}

    static GSymbol unit(const GroupStructure* grp, int N) { return GSymbol(grp, N, 1.0); }

    const GroupStructure* group() const { return grp_; }
    int dim() const { return grp_->dim(); }
    int truncation() const { return N_; }
    cplx scalar() const { return scalar_; }
    void set_scalar(cplx s) { scalar_ = s; }
    const std::map<int, SemiclassicalSymbol>& parts() const { return parts_; }
    std::map<int, SemiclassicalSymbol>& mutable_parts() { return parts_; }
    bool has_part(int g) const { return parts_.count(g) > 0; }
    const SemiclassicalSymbol& part(int g) const;
    void set_part(int g, SemiclassicalSymbol s);
    void add_part(int g, const SemiclassicalSymbol& s);

    GSymbol operator+(const GSymbol& o) const;
    GSymbol operator-(const GSymbol& o) const;
    GSymbol scaled(cplx s) const;

    // Action of the ball element g on symbols: exact pullback along C_g^{-1}
    // (Egorov corrections vanish for affine maps; the oracle verifies this).
    SemiclassicalSymbol act(int g, const SemiclassicalSymbol& a) const;

    // Twisted product: (A*B)_g = sum_{l k = g} A_l * act(l, B_k), plus scalar
    // bookkeeping.  Throws when a product support leaves the ball.
    GSymbol gmul(const GSymbol& o) const;

    int order() const;
    double max_abs_coeff() const;
    int x_bandwidth() const;
    void prune(double tol = kPruneTol);

private:
    const GroupStructure* grp_ = nullptr;
    int N_ = 1;
    cplx scalar_{0.0, 0.0};
    std::map<int, SemiclassicalSymbol> parts_;
};

// Cosphere grid: x uniform on [0,2pi)^n, directions = two rays (n = 1) or
// uniform angles (n = 2); radius fixed at |xi| = hi (profile == 1 there).
struct EvaluationGrid {
    int n = 1;
    int nx = 32;      // per x-coordinate
    int ntheta = 2;   // 2 rays for n = 1, angle count for n = 2

    int points() const { return (n == 1 ? nx * 2 : nx * nx * ntheta); }
    // Decode flat index into (x, direction angle).
    void decode(int idx, std::array<double, 2>& x, double& theta) const;
    static EvaluationGrid for_bandwidth(int n, int xband, int angband);
};

struct EllipticityReport {
    bool elliptic = false;
    double margin = 0.0;     // min |det| - threshold (finite G) or Neumann margin
    double min_det = 0.0;
    bool neumann_route = false;
    std::string detail;
};

// Leading-symbol ellipticity test at the configured threshold.
EllipticityReport is_elliptic(const GSymbol& a, const EvaluationGrid& grid,
                              double threshold = 1e-6);

struct LeadingInverseResult {
    GSymbol r0;
    double projection_residual = 0.0;  // sup norm of dropped tail on the grid
    bool neumann_route = false;
    double neumann_tail = 0.0;
};

// Order-zero inverse of the leading symbol: pointwise regular-representation
// inverse on the grid projected to modes within the bandwidth caps, or a
// truncated Neumann series when the unit dominates.  Throws when the residual
// exceeds `residual_tol`.
LeadingInverseResult leading_inverse(const GSymbol& a, const EvaluationGrid& grid,
                                     int x_bandwidth, int ang_bandwidth,
                                     double residual_tol = 1e-8,
                                     double ellipticity_threshold = 1e-6);

struct ParametrixResult {
    GSymbol r;                     // almost inverse r_N
    GSymbol resid_left;            // unit - r*a
    GSymbol resid_right;           // unit - a*r
    double projection_residual = 0.0;
    // sup of |coefficients| of germ-tail terms in the residuals that violate
    // the trace-class degree bound (should be ~0 for clean scenarios).
    double untraceable_mass = 0.0;
};

// r = r0 * (1 + w + w*w + ... + w^N), w = unit - a*r0.
ParametrixResult parametrix(const GSymbol& a, const LeadingInverseResult& li);

// Drop residual germ-tail terms of degree >= `min_degree` whose coefficients
// are below `tol`; returns the dropped mass.  Terms above tolerance throw.
double cleanse_for_trace(GSymbol& g, int min_degree_exclusive, double tol);

// 2x2 matrices over the crossed product (projector index formula).
struct GMatrix2 {
    std::array<std::array<GSymbol, 2>, 2> m;
    GMatrix2 mul(const GMatrix2& o) const;
    GMatrix2 sub(const GMatrix2& o) const;
};

}  // namespace gindex
