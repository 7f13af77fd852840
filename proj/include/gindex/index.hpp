#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gindex/gsymbol.hpp"
#include "gindex/hlaurent.hpp"

namespace gindex {

// Localized trace of one crossed-product element over the conjugacy class of
// g: exact fixed-point evaluation of the h -> 0 expansion of
// sum_{l in <g>} tr(Op_h(a_l) Phi_l).  Coefficients are kept for exponents
// j < N - n.  Requires each contributing part to have germ order < -2n;
// throws otherwise.
HLaurent localized_trace(const GSymbol& a, int g, const Excision& chi);

// Per-element contribution (exposed for tests and reports).
HLaurent localized_trace_element(const SemiclassicalSymbol& a_l, const AffineCanonical& l,
                                 const FixedPointSet& fp, const Excision& chi, int window_max);

// max |coefficient| of tau_g(a*b) - tau_g(b*a) within the window.
double trace_property_check(const GSymbol& a, const GSymbol& b, int g, const Excision& chi);

struct IndexResult {
    HLaurent laurent;
    std::complex<double> constant_term{0.0};
    double integrality_gap = 0.0;   // |c0 - round(Re c0)|
    double max_nonconstant = 0.0;   // largest |c_j|, j != 0
    double cleanse_dropped = 0.0;   // mass dropped to meet the trace precondition
};

// Algebraic index localized at <g>: tau_g(1 - r*a) - tau_g(1 - a*r).
IndexResult algebraic_index(const GSymbol& a, const ParametrixResult& px, int g,
                            const Excision& chi);

// Same index through the conjugated-projector formula
// tau_g(w p0 w^{-1} - p0) with the explicit 2x2 w built from (a, r).
IndexResult algebraic_index_projector(const GSymbol& a, const ParametrixResult& px, int g,
                                      const Excision& chi);

enum class Vanishing { kYes, kNo, kUnknown };

// True iff a homomorphism chi: G -> Z with chi(g) != 0 exists for the
// implemented group classes (then the localized index must vanish).
Vanishing vanishing_check(const GroupStructure& grp, int g);

struct FredholmBreakdown {
    int class_representative;
    std::string name;
    IndexResult index;
};

struct FredholmResult {
    std::complex<double> total{0.0};
    std::vector<FredholmBreakdown> per_class;
};

// Sum of localized algebraic indices over torsion conjugacy classes.
FredholmResult fredholm_index(const GSymbol& a, const ParametrixResult& px, const Excision& chi);

}  // namespace gindex
