#include "gindex/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace gindex {

namespace {

double radius_of(const ModeSpace& ms, double h, const std::array<int, 2>& k) {
    return ms.n == 1 ? std::abs(h * k[0]) : std::hypot(h * k[0], h * k[1]);
}

// a_j's Fourier data grouped by x-mode for one h-coefficient.
cplx mode_value(const ClassicalSymbol& c, const std::array<int, 2>& kappa,
                const std::array<double, 2>& xi, const Excision& chi) {
    const int n = c.dim();
    double r = n == 1 ? std::abs(xi[0]) : std::hypot(xi[0], xi[1]);
    if (r <= chi.lo()) return 0.0;
    double theta = n == 2 ? std::atan2(xi[1], xi[0]) : 0.0;
    int ray = xi[0] >= 0 ? 1 : -1;
    cplx acc = 0.0;
    for (const auto& [key, coeff] : c.terms()) {
        if (key.k != kappa) continue;
        if (n == 1 && key.m != ray) continue;
        cplx v = coeff * std::pow(r, double(key.deg)) * chi_factor_value(key.chi, r, chi);
        if (n == 2) v *= std::exp(cplx(0, double(key.m) * theta));
        acc += v;
    }
    return acc;
}

}  // namespace

SpMat quantize(const SemiclassicalSymbol& a, double h, const ModeSpace& ms,
               const Excision& chi) {
    std::vector<Eigen::Triplet<cplx>> trip;
    const int dim = ms.dimension();
    // collect x-modes present
    std::vector<std::array<int, 2>> kappas;
    {
        std::map<std::array<int, 2>, bool> seen;
        for (int j = 0; j < a.truncation(); ++j)
            for (const auto& [key, c] : a.at(j).terms())
                if (!seen.count(key.k)) { seen[key.k] = true; kappas.push_back(key.k); }
    }
    for (int col = 0; col < dim; ++col) {
        std::array<int, 2> k = ms.mode(col);
        std::array<double, 2> xi{h * k[0], h * k[1]};
        if (radius_of(ms, h, k) <= chi.lo()) continue;
        for (const auto& kappa : kappas) {
            std::array<int, 2> row_mode{k[0] + kappa[0], k[1] + kappa[1]};
            if (!ms.contains(row_mode)) continue;
            cplx v = 0.0;
            double hp = 1.0;
            for (int j = 0; j < a.truncation(); ++j) {
                v += hp * mode_value(a.at(j), kappa, xi, chi);
                hp *= h;
            }
            if (std::abs(v) > 1e-300)
                trip.emplace_back(ms.index(row_mode), col, v);
        }
    }
    SpMat M(dim, dim);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SpMat shift_matrix(const AffineCanonical& g, const ModeSpace& ms) {
    std::vector<Eigen::Triplet<cplx>> trip;
    const int dim = ms.dimension();
    for (int col = 0; col < dim; ++col) {
        std::array<int, 2> k = ms.mode(col);
        std::array<int, 2> kk = g.apply_A_invT(k);
        cplx phase = std::exp(cplx(0, -g.pairing(kk).radians()));
        trip.emplace_back(ms.index(kk), col, phase);
    }
    SpMat M(dim, dim);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SpMat conjugate_by_shift(const AffineCanonical& g, const SpMat& M, const ModeSpace& ms) {
    SpMat P = shift_matrix(g, ms);
    SpMat Pi = shift_matrix(g.inverse(), ms);
    return SpMat(P * M * Pi);
}

GOperator GOperator::identity(const GroupStructure* grp, const ModeSpace& ms) {
    GOperator r;
    r.grp = grp;
    r.ms = ms;
    SpMat I(ms.dimension(), ms.dimension());
    I.setIdentity();
    r.pieces[grp->identity()] = I;
    return r;
}

GOperator GOperator::mul(const GOperator& o) const {
    GOperator r;
    r.grp = grp;
    r.ms = ms;
    for (const auto& [l, Ml] : pieces) {
        for (const auto& [k, Mk] : o.pieces) {
            int tgt = grp->mul(l, k);
            if (tgt < 0)
                throw std::runtime_error("operator product support escapes the word ball");
            SpMat prod = Ml * conjugate_by_shift(grp->element(l), Mk, ms);
            auto it = r.pieces.find(tgt);
            if (it == r.pieces.end()) r.pieces[tgt] = prod;
            else it->second = SpMat(it->second + prod);
        }
    }
    return r;
}

GOperator GOperator::sub_from_identity() const {
    GOperator r = GOperator::identity(grp, ms);
    for (const auto& [g, M] : pieces) {
        auto it = r.pieces.find(g);
        if (it == r.pieces.end()) r.pieces[g] = SpMat(-M);
        else it->second = SpMat(it->second - M);
    }
    return r;
}

GOperator quantize_gop(const GSymbol& a, double h, const ModeSpace& ms, const Excision& chi) {
    GOperator r;
    r.grp = a.group();
    r.ms = ms;
    if (std::abs(a.scalar()) > 0.0) {
        SpMat I(ms.dimension(), ms.dimension());
        I.setIdentity();
        r.pieces[a.group()->identity()] = SpMat(a.scalar() * I);
    }
    for (const auto& [g, p] : a.parts()) {
        SpMat M = quantize(p, h, ms, chi);
        auto it = r.pieces.find(g);
        if (it == r.pieces.end()) r.pieces[g] = M;
        else it->second = SpMat(it->second + M);
    }
    return r;
}

WindowTrace trace_with_shift(const SpMat& M, const AffineCanonical& l, const ModeSpace& ms,
                             int Kw) {
    WindowTrace out;
    const int dim = ms.dimension();
    for (int col = 0; col < dim; ++col) {
        // (M Phi_l) diagonal entry at k: phase(k) * M_{k, pi(k)} with
        // pi(k) = A^{-T} k; iterate k, read column pi(k).
        std::array<int, 2> k = ms.mode(col);
        std::array<int, 2> pk = l.apply_A_invT(k);
        cplx phase = std::exp(cplx(0, -l.pairing(pk).radians()));
        cplx entry = M.coeff(ms.index(k), ms.index(pk));
        if (entry == cplx(0.0)) continue;
        bool inside = std::abs(k[0]) <= Kw && (ms.n == 1 || std::abs(k[1]) <= Kw);
        if (inside) out.value += phase * entry;
        else out.tail += std::abs(entry);
    }
    return out;
}

WindowTrace operator_trace_g(const GOperator& P, int g, int Kw) {
    WindowTrace out;
    const GroupStructure& G = *P.grp;
    for (const auto& [l, M] : P.pieces) {
        if (!G.same_class(l, g)) continue;
        WindowTrace t = trace_with_shift(M, G.element(l), P.ms, Kw);
        out.value += t.value;
        out.tail += t.tail;
    }
    return out;
}

cplx quantized_shift_trace(const SemiclassicalSymbol& a, const AffineCanonical& l, double h,
                           int K, const Excision& chi) {
    // tr(Op(a) Phi_l) = sum_j a^((A^T - I) j; h j) e^{-i j . b}.
    const int n = a.dim();
    cplx acc = 0.0;
    IntMat At = imat_transpose(n, l.A());
    for (int j0 = -K; j0 <= K; ++j0) {
        for (int j1 = (n == 2 ? -K : 0); j1 <= (n == 2 ? K : 0); ++j1) {
            std::array<int, 2> j{j0, j1};
            std::array<double, 2> xi{h * j0, h * j1};
            double r = n == 1 ? std::abs(xi[0]) : std::hypot(xi[0], xi[1]);
            if (r <= chi.lo()) continue;
            std::array<int, 2> kappa{At[0][0] * j0 + At[0][1] * j1 - j0,
                                     n == 2 ? At[1][0] * j0 + At[1][1] * j1 - j1 : 0};
            cplx v = 0.0;
            double hp = 1.0;
            for (int t = 0; t < a.truncation(); ++t) {
                v += hp * mode_value(a.at(t), kappa, xi, chi);
                hp *= h;
            }
            if (v == cplx(0.0)) continue;
            acc += v * std::exp(cplx(0, -l.pairing(j).radians()));
        }
    }
    return acc;
}

AnalyticIndexResult analytic_index_g(const GSymbol& a, const GSymbol& r_N, int g, double h,
                                     const ModeSpace& ms, int Kw, const Excision& chi) {
    GOperator D = quantize_gop(a, h, ms, chi);
    GOperator R = quantize_gop(r_N, h, ms, chi);
    GOperator one_m_RD = R.mul(D).sub_from_identity();
    GOperator one_m_DR = D.mul(R).sub_from_identity();
    WindowTrace tl = operator_trace_g(one_m_RD, g, Kw);
    WindowTrace tr = operator_trace_g(one_m_DR, g, Kw);
    AnalyticIndexResult res;
    res.value = tl.value - tr.value;
    res.tail = tl.tail + tr.tail;
    return res;
}

double egorov_residual(const GSymbol& ref, int g, const SemiclassicalSymbol& a, double h,
                       const ModeSpace& ms, const Excision& chi) {
    const GroupStructure& G = *ref.group();
    SpMat A = quantize(a, h, ms, chi);
    SpMat lhs = conjugate_by_shift(G.element(g), A, ms);
    SpMat rhs = quantize(ref.act(g, a), h, ms, chi);
    SpMat diff = SpMat(lhs - rhs);
    return diff.norm();  // Frobenius upper-bounds the spectral norm
}

double spectral_norm(const SpMat& M, int iters) {
    const int dim = int(M.rows());
    if (M.nonZeros() == 0) return 0.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Random(dim);
    v.normalize();
    SpMat Mh = M.adjoint();
    double sigma = 0.0;
    for (int i = 0; i < iters; ++i) {
        Eigen::VectorXcd w = Mh * (M * v);
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        sigma = std::sqrt(nw);
    }
    return sigma;
}

std::vector<CompositionSample> composition_residual(const SemiclassicalSymbol& a,
                                                    const SemiclassicalSymbol& b,
                                                    const std::vector<double>& hs,
                                                    double coverage, int Kcap,
                                                    const Excision& chi) {
    std::vector<CompositionSample> out;
    SemiclassicalSymbol ab = a.star(b);
    for (double h : hs) {
        ModeSpace ms;
        ms.n = a.dim();
        ms.K = std::min(Kcap, int(std::ceil(coverage / h)));
        SpMat A = quantize(a, h, ms, chi);
        SpMat B = quantize(b, h, ms, chi);
        SpMat C = quantize(ab, h, ms, chi);
        SpMat diff = SpMat(SpMat(A * B) - C);
        out.push_back({h, ms.K, spectral_norm(diff)});
    }
    return out;
}

HFitResult fit_h_expansion(const std::vector<std::pair<double, cplx>>& samples, int jmin,
                           int jmax) {
    const int nterms = jmax - jmin + 1;
    const int m = int(samples.size());
    if (m < nterms + 1)
        throw std::invalid_argument("fit_h_expansion: need at least window + 1 samples");
    Eigen::MatrixXd V(m, nterms);
    Eigen::VectorXcd y(m);
    for (int i = 0; i < m; ++i) {
        for (int t = 0; t < nterms; ++t) V(i, t) = std::pow(samples[i].first, double(jmin + t));
        y(i) = samples[i].second;
    }
    // scale columns for conditioning
    Eigen::VectorXd scale(nterms);
    for (int t = 0; t < nterms; ++t) {
        scale(t) = V.col(t).norm();
        if (scale(t) == 0.0) scale(t) = 1.0;
        V.col(t) /= scale(t);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-13);
    if (svd.rank() < nterms)
        throw std::runtime_error("fit_h_expansion: rank-deficient design matrix");
    Eigen::VectorXd cre = svd.solve(Eigen::VectorXd(y.real()));
    Eigen::VectorXd cim = svd.solve(Eigen::VectorXd(y.imag()));
    HFitResult res;
    for (const auto& s : samples) res.hs.push_back(s.first);
    Eigen::VectorXcd c(nterms);
    for (int t = 0; t < nterms; ++t) c(t) = cplx(cre(t), cim(t)) / scale(t);
    for (int t = 0; t < nterms; ++t) res.fitted.add(jmin + t, c(t));
    Eigen::VectorXcd resid = y;
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < nterms; ++t)
            resid(i) -= c(t) * std::pow(samples[i].first, double(jmin + t));
    res.residual_norm = resid.norm();
    return res;
}

HFitResult fit_decay_slope(const std::vector<std::pair<double, double>>& samples) {
    HFitResult res;
    std::vector<double> xs, ys;
    for (const auto& [h, v] : samples) {
        res.hs.push_back(h);
        if (v <= 0.0) continue;  // exactly zero residuals carry no slope information
        xs.push_back(std::log(h));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 2) {
        res.slope = std::numeric_limits<double>::infinity();
        return res;
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    res.slope = num / den;
    double ss = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double pred = my + res.slope * (xs[i] - mx);
        ss += (ys[i] - pred) * (ys[i] - pred);
    }
    if (xs.size() > 2) res.slope_stderr = std::sqrt(ss / double(xs.size() - 2) / den);
    return res;
}

SvdIndexResult svd_index(const GOperator& D, int Kw, double tol) {
    // Assemble sum_g M_g Phi_g densely, then count small singular values of the
    // column-restricted and row-restricted blocks (domain/range windows).
    const ModeSpace& ms = D.ms;
    const int dim = ms.dimension();
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [g, M] : D.pieces)
        full += Eigen::MatrixXcd(SpMat(M * shift_matrix(D.grp->element(g), ms)));
    std::vector<int> win;
    for (int i = 0; i < dim; ++i) {
        std::array<int, 2> k = ms.mode(i);
        if (std::abs(k[0]) <= Kw && (ms.n == 1 || std::abs(k[1]) <= Kw)) win.push_back(i);
    }
    Eigen::MatrixXcd cols(dim, win.size()), rows(win.size(), dim);
    for (size_t t = 0; t < win.size(); ++t) {
        cols.col(t) = full.col(win[t]);
        rows.row(t) = full.row(win[t]);
    }
    SvdIndexResult res;
    Eigen::JacobiSVD<Eigen::MatrixXcd> s1(cols);
    Eigen::JacobiSVD<Eigen::MatrixXcd> s2(rows);
    double gap = 1e300;
    for (int i = 0; i < s1.singularValues().size(); ++i) {
        double s = s1.singularValues()(i);
        if (s < tol) res.dim_ker++;
        else gap = std::min(gap, s);
    }
    for (int i = 0; i < s2.singularValues().size(); ++i) {
        double s = s2.singularValues()(i);
        if (s < tol) res.dim_coker++;
        else gap = std::min(gap, s);
    }
    res.gap = gap;
    return res;
}

}  // namespace gindex
