#include "gindex/index.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gindex {

namespace {

// Integral of a classical symbol over the fixed covector subspace V.
//   f = n: full R^n integral with the polar weight r^{n-1} and angular factor.
//   f = 1: line integral along +/- the primitive direction (arclength).
cplx integrate_on_V(const ClassicalSymbol& c, const FixedPointSet& fp, const Excision& chi) {
    const int n = c.dim();
    cplx acc = 0.0;
    if (fp.f == n) {
        for (const auto& [k, coeff] : c.terms()) {
            if (n == 2 && k.m != 0) continue;
            int pw = k.deg + n - 1;
            if (!k.chi.transition_only() && pw >= -1)
                throw std::domain_error("localized trace: divergent radial integral");
            double rad = chi.integral(pw, k.chi.multiset());
            acc += coeff * rad * (n == 2 ? 2.0 * M_PI : 1.0);
        }
        return acc;
    }
    // f = 1: evaluate the angular factor on the two rays of V.
    double thu = std::atan2(double(fp.v_primitive[1]), double(fp.v_primitive[0]));
    for (const auto& [k, coeff] : c.terms()) {
        int pw = k.deg;  // arclength measure, no polar weight
        if (!k.chi.transition_only() && pw >= -1)
            throw std::domain_error("localized trace: divergent radial integral");
        double rad = chi.integral(pw, k.chi.multiset());
        cplx ang;
        if (n == 1) {
            ang = 1.0;  // each ray term contributes its own ray
        } else {
            // e^{im th_u} + e^{im (th_u + pi)}
            ang = std::exp(cplx(0, double(k.m) * thu)) * (1.0 + ((k.m % 2 == 0) ? 1.0 : -1.0));
        }
        acc += coeff * rad * ang;
    }
    return acc;
}

}  // namespace

HLaurent localized_trace_element(const SemiclassicalSymbol& a_l, const AffineCanonical& l,
                                 const FixedPointSet& fp, const Excision& chi, int window_max) {
    HLaurent out;
    if (fp.empty) return out;
    const int n = a_l.dim();
    const int f = fp.f;

    // Group coefficients by x-mode kappa.
    for (int j = 0; j < a_l.truncation(); ++j) {
        if (a_l.at(j).empty()) continue;
        std::map<std::array<int, 2>, ClassicalSymbol> by_kappa;
        for (const auto& [key, c] : a_l.at(j).terms()) {
            auto& sym = by_kappa.try_emplace(key.k, ClassicalSymbol(n)).first->second;
            sym.add_term(key, c);
        }
        for (const auto& [kappa, sym] : by_kappa) {
            // Only modes with integer solutions of (A^T - I) j0 = kappa hit the
            // twisted diagonal; others cancel across base components.
            auto j0 = solve_twisted_mode(l, kappa);
            if (!j0) continue;
            cplx phase = std::exp(cplx(0, -l.pairing(*j0).radians()));
            // Perpendicular part of j0 (the V-component is gauge).
            std::array<double, 2> j0p{double((*j0)[0]), double((*j0)[1])};
            if (f == n) {
                j0p = {0.0, 0.0};
            } else if (f == 1) {
                double v0 = fp.v_primitive[0], v1 = fp.v_primitive[1];
                double vv = v0 * v0 + v1 * v1;
                double dot = (j0p[0] * v0 + j0p[1] * v1) / vv;
                j0p = {j0p[0] - dot * v0, j0p[1] - dot * v1};
            }
            bool j0p_zero = std::abs(j0p[0]) + std::abs(j0p[1]) < 1e-14;
            // Taylor transport along j0 of the slice integral:
            //   sum_p h^p <j0p, d/dxi>^p sym / p!   integrated over V.
            ClassicalSymbol cur = sym;
            double pfac = 1.0;
            for (int p = 0;; ++p) {
                int expo = j - f + p;
                if (expo >= window_max) break;
                if (!cur.empty())
                    out.add(expo, phase * integrate_on_V(cur, fp, chi) / (pfac * fp.covol));
                if (j0p_zero) break;  // higher transport terms vanish
                cur = cur.dxi_dir(j0p);
                pfac *= double(p + 1);
                if (cur.empty()) break;
            }
        }
    }
    return out;
}

HLaurent localized_trace(const GSymbol& a, int g, const Excision& chi) {
    const GroupStructure& G = *a.group();
    const int n = a.dim();
    const int N = a.truncation();
    const int window_max = N - n;
    HLaurent total;
    for (const auto& [l, part] : a.parts()) {
        if (!G.same_class(l, g)) continue;
        // trace-class precondition on contributing parts
        int ord = part.order();
        if (ord != kOrderNegInf && ord >= -2 * n) {
            std::ostringstream os;
            os << "localized trace: part at " << G.name(l) << " has order " << ord
               << " >= " << -2 * n;
            throw std::domain_error(os.str());
        }
        const FixedPointSet& fp = G.fixed_point_set(l);
        if (!fp.clean) throw std::runtime_error("localized trace: fixed set not clean");
        total = total + localized_trace_element(part, G.element(l), fp, chi, window_max);
    }
    return total;
}

double trace_property_check(const GSymbol& a, const GSymbol& b, int g, const Excision& chi) {
    HLaurent ab = localized_trace(a.gmul(b), g, chi);
    HLaurent ba = localized_trace(b.gmul(a), g, chi);
    HLaurent d = ab - ba;
    return d.max_abs();
}

namespace {

IndexResult finish_index(HLaurent lau, double dropped) {
    IndexResult res;
    lau.prune(0.0);
    res.laurent = lau;
    res.constant_term = lau.at(0);
    res.integrality_gap = std::abs(res.constant_term - std::round(res.constant_term.real()));
    res.max_nonconstant = lau.max_nonconstant();
    res.cleanse_dropped = dropped;
    return res;
}

}  // namespace

IndexResult algebraic_index(const GSymbol& a, const ParametrixResult& px, int g,
                            const Excision& chi) {
    const int n = a.dim();
    GSymbol left = px.resid_left;    // unit - r*a
    GSymbol right = px.resid_right;  // unit - a*r
    double dropped = 0.0;
    dropped = std::max(dropped, cleanse_for_trace(left, -2 * n, 1e-7));
    dropped = std::max(dropped, cleanse_for_trace(right, -2 * n, 1e-7));
    HLaurent lau = localized_trace(left, g, chi) - localized_trace(right, g, chi);
    return finish_index(lau, dropped);
}

IndexResult algebraic_index_projector(const GSymbol& a, const ParametrixResult& px, int g,
                                      const Excision& chi) {
    const GroupStructure* G = a.group();
    const int N = a.truncation();
    const int n = a.dim();
    GSymbol unit = GSymbol::unit(G, N);
    GSymbol zero(G, N, 0.0);
    const GSymbol& r = px.r;
    GSymbol ar = a.gmul(r);
    GSymbol ra = r.gmul(a);

    GMatrix2 w;
    w.m[0][0] = (unit + unit - ar).gmul(a);  // (2 - a*r)*a
    w.m[0][1] = unit - ar;
    w.m[1][0] = ra - unit;
    w.m[1][1] = r;

    GMatrix2 winv;
    winv.m[0][0] = r;
    winv.m[0][1] = ra - unit;
    winv.m[1][0] = unit - ar;
    winv.m[1][1] = a.gmul(unit + unit - ra);  // a*(2 - r*a)

    GMatrix2 p0;
    p0.m[0][0] = unit;
    p0.m[0][1] = zero;
    p0.m[1][0] = zero;
    p0.m[1][1] = zero;

    GMatrix2 conj = w.mul(p0).mul(winv).sub(p0);
    GSymbol tracearg = conj.m[0][0] + conj.m[1][1];
    double dropped = cleanse_for_trace(tracearg, -2 * n, 1e-7);
    HLaurent lau = localized_trace(tracearg, g, chi);
    return finish_index(lau, dropped);
}

Vanishing vanishing_check(const GroupStructure& grp, int g) {
    if (g == grp.identity()) return Vanishing::kNo;
    if (grp.torsion(g)) return Vanishing::kNo;  // homomorphisms to Z kill torsion
    const AffineCanonical& el = grp.element(g);

    // Translation subgroup analysis: for elements with trivial linear part and
    // an irrational translation component, the map "irrational residue" is a
    // homomorphism to a finitely generated subgroup of R containing g outside
    // the kernel, hence a Z-valued homomorphism separating g exists.
    bool trivial_A = el.A() == imat_identity(grp.dim());
    if (trivial_A) {
        for (int i = 0; i < grp.dim(); ++i)
            if (std::abs(el.b()[i].extra) > 1e-12) return Vanishing::kYes;
        // rational translation of infinite order cannot happen (it is torsion)
        return Vanishing::kUnknown;
    }
    return Vanishing::kUnknown;
}

FredholmResult fredholm_index(const GSymbol& a, const ParametrixResult& px,
                              const Excision& chi) {
    const GroupStructure& G = *a.group();
    FredholmResult out;
    for (const auto& cls : G.conjugacy_classes()) {
        int rep = cls.front();
        if (!G.torsion(rep)) continue;
        FredholmBreakdown row;
        row.class_representative = rep;
        row.name = G.name(rep);
        row.index = algebraic_index(a, px, rep, chi);
        out.total += row.index.constant_term;
        out.per_class.push_back(std::move(row));
    }
    return out;
}

}  // namespace gindex
