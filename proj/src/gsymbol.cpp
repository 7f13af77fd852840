#include "gindex/gsymbol.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gindex {

const SemiclassicalSymbol& GSymbol::part(int g) const {
    auto it = parts_.find(g);
    if (it == parts_.end()) throw std::out_of_range("GSymbol: no part at this element");
    return it->second;
}

void GSymbol::set_part(int g, SemiclassicalSymbol s) {
    if (s.is_zero()) parts_.erase(g);
    else parts_[g] = std::move(s);
}

void GSymbol::add_part(int g, const SemiclassicalSymbol& s) {
    auto it = parts_.find(g);
    if (it == parts_.end()) {
        if (!s.is_zero()) parts_[g] = s;
    } else {
        it->second += s;
        if (it->second.is_zero()) parts_.erase(it);
    }
}

GSymbol GSymbol::operator+(const GSymbol& o) const {
    GSymbol r = *this;
    r.scalar_ += o.scalar_;
    for (const auto& [g, s] : o.parts_) r.add_part(g, s);
    return r;
}

GSymbol GSymbol::operator-(const GSymbol& o) const { return *this + o.scaled(-1.0); }

GSymbol GSymbol::scaled(cplx s) const {
    GSymbol r(grp_, N_, scalar_ * s);
    for (const auto& [g, p] : parts_) r.parts_[g] = p.scaled(s);
    return r;
}

SemiclassicalSymbol GSymbol::act(int g, const SemiclassicalSymbol& a) const {
    return a.pullback(grp_->element(g).inverse());
}

GSymbol GSymbol::gmul(const GSymbol& o) const {
    if (grp_ != o.grp_ || N_ != o.N_)
        throw std::invalid_argument("gmul: mismatched group or truncation");
    GSymbol r(grp_, N_, scalar_ * o.scalar_);
    for (const auto& [g, p] : o.parts_) r.add_part(g, p.scaled(scalar_));
    for (const auto& [g, p] : parts_) r.add_part(g, p.scaled(o.scalar_));
    for (const auto& [l, pl] : parts_) {
        for (const auto& [k, pk] : o.parts_) {
            int tgt = grp_->mul(l, k);
            if (tgt < 0) {
                std::ostringstream os;
                os << "gmul: product support " << grp_->name(l) << " * " << grp_->name(k)
                   << " escapes the word ball; enlarge the ball";
                throw std::runtime_error(os.str());
            }
            r.add_part(tgt, pl.star(act(l, pk)));
        }
    }
    r.prune();
    return r;
}

int GSymbol::order() const {
    int o = kOrderNegInf;
    for (const auto& [g, p] : parts_) o = std::max(o, p.order());
    return o;
}

double GSymbol::max_abs_coeff() const {
    double m = std::abs(scalar_);
    for (const auto& [g, p] : parts_) m = std::max(m, p.max_abs_coeff());
    return m;
}

int GSymbol::x_bandwidth() const {
    int b = 0;
    for (const auto& [g, p] : parts_) b = std::max(b, p.x_bandwidth());
    return b;
}

void GSymbol::prune(double tol) {
    for (auto it = parts_.begin(); it != parts_.end();) {
        it->second.prune(tol);
        it = it->second.is_zero() ? parts_.erase(it) : std::next(it);
    }
}

void EvaluationGrid::decode(int idx, std::array<double, 2>& x, double& theta) const {
    if (n == 1) {
        int ray = idx % 2;
        int ix = idx / 2;
        x = {2.0 * M_PI * ix / nx, 0.0};
        theta = ray == 0 ? 0.0 : M_PI;  // direction +1 / -1
    } else {
        int it = idx % ntheta;
        int iy = (idx / ntheta) % nx;
        int ix = idx / (ntheta * nx);
        x = {2.0 * M_PI * ix / nx, 2.0 * M_PI * iy / nx};
        theta = 2.0 * M_PI * it / ntheta;
    }
}

EvaluationGrid EvaluationGrid::for_bandwidth(int n, int xband, int angband) {
    EvaluationGrid g;
    g.n = n;
    g.nx = std::max(8, 2 * (2 * xband + 1));
    if (n == 1) {
        g.ntheta = 2;
    } else {
        g.ntheta = std::max(8, 2 * (2 * angband + 1));
    }
    return g;
}

namespace {

// Degree-0 germ value in direction theta: the part of the symbol that decides
// invertibility modulo order -1.  Profile factors are 1 (chi0) or 0 (any
// derivative order) at infinity, and r^0 = 1, so no radius enters.
cplx leading_value(const ClassicalSymbol& c, const std::array<double, 2>& x, double theta) {
    cplx acc = 0.0;
    const int n = c.dim();
    int ray = (std::cos(theta) >= 0.0) ? 1 : -1;
    for (const auto& [k, coeff] : c.terms()) {
        if (k.chi.transition_only() || k.deg != 0) continue;
        cplx v = coeff * std::exp(cplx(0, k.k[0] * x[0] + k.k[1] * x[1]));
        if (n == 1) {
            if (k.m != ray) continue;
        } else {
            v *= std::exp(cplx(0, double(k.m) * theta));
        }
        acc += v;
    }
    return acc;
}

}  // namespace

EllipticityReport is_elliptic(const GSymbol& a, const EvaluationGrid& grid, double threshold) {
    EllipticityReport rep;
    const GroupStructure& G = *a.group();
    const int m = G.size();

    // Infinite-flavor route when the ball is open (some products leave it):
    // use the Neumann criterion |scalar| - sup of leading parts.
    bool ball_closed = true;
    for (int i = 0; i < m && ball_closed; ++i)
        for (int j = 0; j < m; ++j)
            if (G.mul(i, j) < 0) { ball_closed = false; break; }

    if (!ball_closed) {
        double sup = 0.0;
        for (const auto& [g, p] : a.parts()) {
            double s = 0.0;
            for (int idx = 0; idx < grid.points(); ++idx) {
                std::array<double, 2> x;
                double th;
                grid.decode(idx, x, th);
                s = std::max(s, std::abs(leading_value(p.at(0), x, th)));
            }
            sup += s;
        }
        rep.neumann_route = true;
        rep.min_det = std::abs(a.scalar()) - sup;
        rep.margin = rep.min_det - threshold;
        rep.elliptic = rep.margin > 0.0;
        rep.detail = "neumann";
        return rep;
    }

    // Finite group: regular representation rho_p(a)[u,v] = a_{u v^{-1}}(C_u p).
    double mindet = 1e300;
    Eigen::MatrixXcd M(m, m);
    for (int idx = 0; idx < grid.points(); ++idx) {
        std::array<double, 2> x;
        double th;
        grid.decode(idx, x, th);
        std::array<double, 2> xi{std::cos(th), std::sin(th)};
        if (grid.n == 1) xi = {th == 0.0 ? 1.0 : -1.0, 0.0};
        for (int u = 0; u < m; ++u) {
            const AffineCanonical& Cu = G.element(u);
            std::array<double, 2> xu = Cu.apply_base(x);
            std::array<double, 2> xiu = Cu.apply_fiber(xi);
            double thu = std::atan2(grid.n == 2 ? xiu[1] : 0.0, xiu[0]);
            if (grid.n == 1) thu = xiu[0] >= 0 ? 0.0 : M_PI;
            for (int v = 0; v < m; ++v) {
                int w = G.mul(u, G.inv(v));
                cplx val = (u == v) ? a.scalar() : cplx(0.0);
                if (a.has_part(w)) val += leading_value(a.part(w).at(0), xu, thu);
                M(u, v) = val;
            }
        }
        double d = std::abs(M.determinant());
        mindet = std::min(mindet, d);
    }
    rep.min_det = mindet;
    rep.margin = mindet - threshold;
    rep.elliptic = rep.margin > 0.0;
    rep.detail = "regular-representation";
    return rep;
}

namespace {

// Project grid samples of a leading function to modes (k, m) within caps.
// Returns the symbol (h-order 0, degree 0 germs with one profile factor) and
// the sup-norm of the reconstruction error on the grid.
std::pair<SemiclassicalSymbol, double> project_to_modes(
    const GroupStructure& G, int N, const EvaluationGrid& grid,
    const std::vector<cplx>& values, int xband, int angband) {
    const int n = grid.n;
    SemiclassicalSymbol out(n, N);
    if (n == 1) {
        // separate DFT per ray
        for (int ray = 0; ray < 2; ++ray) {
            for (int k = -xband; k <= xband; ++k) {
                cplx acc = 0.0;
                for (int ix = 0; ix < grid.nx; ++ix) {
                    double x = 2.0 * M_PI * ix / grid.nx;
                    acc += values[ix * 2 + ray] * std::exp(cplx(0, -k * x));
                }
                acc /= double(grid.nx);
                if (std::abs(acc) < 1e-14) continue;
                TermKey key;
                key.k = {k, 0};
                key.m = ray == 0 ? 1 : -1;
                key.deg = 0;
                out.at(0).add_term(key, acc);
            }
        }
    } else {
        for (int k1 = -xband; k1 <= xband; ++k1)
            for (int k2 = -xband; k2 <= xband; ++k2)
                for (int mm = -angband; mm <= angband; ++mm) {
                    cplx acc = 0.0;
                    for (int ix = 0; ix < grid.nx; ++ix)
                        for (int iy = 0; iy < grid.nx; ++iy)
                            for (int it = 0; it < grid.ntheta; ++it) {
                                double x = 2.0 * M_PI * ix / grid.nx;
                                double y = 2.0 * M_PI * iy / grid.nx;
                                double th = 2.0 * M_PI * it / grid.ntheta;
                                int idx = (ix * grid.nx + iy) * grid.ntheta + it;
                                acc += values[idx] *
                                       std::exp(cplx(0, -(k1 * x + k2 * y + mm * th)));
                            }
                    acc /= double(grid.nx) * grid.nx * grid.ntheta;
                    if (std::abs(acc) < 1e-14) continue;
                    TermKey key;
                    key.k = {k1, k2};
                    key.m = mm;
                    key.deg = 0;
                    out.at(0).add_term(key, acc);
                }
    }
    // reconstruction error
    double err = 0.0;
    for (int idx = 0; idx < grid.points(); ++idx) {
        std::array<double, 2> x;
        double th;
        grid.decode(idx, x, th);
        cplx rec = leading_value(out.at(0), x, th);
        err = std::max(err, std::abs(rec - values[idx]));
    }
    return {out, err};
}

}  // namespace

LeadingInverseResult leading_inverse(const GSymbol& a, const EvaluationGrid& grid, int xband,
                                     int angband, double residual_tol,
                                     double ellipticity_threshold) {
    EllipticityReport ell = is_elliptic(a, grid, ellipticity_threshold);
    if (!ell.elliptic)
        throw std::runtime_error("leading_inverse: symbol is not elliptic (margin " +
                                 std::to_string(ell.margin) + ")");
    const GroupStructure& G = *a.group();
    const int m = G.size();
    const int N = a.truncation();
    LeadingInverseResult res;

    if (ell.neumann_route) {
        // r0 = s^{-1} sum_k (-P/s)^k truncated, P = degree-0 leading part.
        cplx s = a.scalar();
        GSymbol P(a.group(), N, 0.0);
        for (const auto& [g, p] : a.parts()) {
            SemiclassicalSymbol lead(a.dim(), N);
            for (const auto& [key, c] : p.at(0).terms())
                if (!key.chi.transition_only() && key.deg == 0) lead.at(0).add_term(key, c);
            if (!lead.is_zero()) P.add_part(g, lead);
        }
        double ratio = (std::abs(s) - ell.min_det) / std::abs(s);  // sup|P|/|s|
        GSymbol r0(a.group(), N, 1.0 / s);
        double tail = 0.0;
        if (!P.parts().empty()) {
            GSymbol pw = P.scaled(-1.0 / s);
            GSymbol term = pw;
            for (int L = 1; L <= 64; ++L) {
                r0 = r0 + term.scaled(1.0 / s);
                tail = std::pow(ratio, double(L + 1)) / ((1.0 - ratio) * std::abs(s));
                if (tail < residual_tol || term.max_abs_coeff() < kPruneTol) break;
                term = term.gmul(pw);
                term.prune(1e-16);
            }
        }
        res.r0 = r0;
        res.neumann_route = true;
        res.neumann_tail = tail;
        res.projection_residual = tail;
        if (tail > residual_tol)
            throw std::runtime_error("leading_inverse: Neumann tail above tolerance");
        return res;
    }

    // Regular representation inverse per grid point; read components off the
    // identity row: r_{v^{-1}}(p) = (rho_p(a)^{-1})[e, v].
    std::vector<std::vector<cplx>> values(m, std::vector<cplx>(grid.points(), cplx(0)));
    Eigen::MatrixXcd M(m, m);
    for (int idx = 0; idx < grid.points(); ++idx) {
        std::array<double, 2> x;
        double th;
        grid.decode(idx, x, th);
        std::array<double, 2> xi{std::cos(th), std::sin(th)};
        if (grid.n == 1) xi = {th == 0.0 ? 1.0 : -1.0, 0.0};
        for (int u = 0; u < m; ++u) {
            const AffineCanonical& Cu = G.element(u);
            std::array<double, 2> xu = Cu.apply_base(x);
            std::array<double, 2> xiu = Cu.apply_fiber(xi);
            double thu;
            if (grid.n == 1) thu = xiu[0] >= 0 ? 0.0 : M_PI;
            else thu = std::atan2(xiu[1], xiu[0]);
            for (int v = 0; v < m; ++v) {
                int w = G.mul(u, G.inv(v));
                cplx val = (u == v) ? a.scalar() : cplx(0.0);
                if (a.has_part(w)) val += leading_value(a.part(w).at(0), xu, thu);
                M(u, v) = val;
            }
        }
        Eigen::MatrixXcd X = M.inverse();
        for (int v = 0; v < m; ++v) values[G.inv(v)][idx] = X(0, v);
    }

    // The unit's share sits in the e-component; split it off so the parts stay
    // in the ideal and the scalar carries the constant.
    GSymbol r0(a.group(), N, 0.0);
    double maxerr = 0.0;
    for (int g = 0; g < m; ++g) {
        auto [sym, err] = project_to_modes(G, N, grid, values[g], xband, angband);
        maxerr = std::max(maxerr, err);
        if (g == G.identity()) {
            // constant mode -> scalar
            TermKey constkey;
            constkey.k = {0, 0};
            constkey.deg = 0;
            cplx c0 = 0.0;
            if (grid.n == 1) {
                TermKey plus = constkey, minus = constkey;
                plus.m = 1;
                minus.m = -1;
                auto itp = sym.at(0).terms().find(plus);
                auto itm = sym.at(0).terms().find(minus);
                cplx vp = itp != sym.at(0).terms().end() ? itp->second : cplx(0);
                cplx vm = itm != sym.at(0).terms().end() ? itm->second : cplx(0);
                c0 = 0.5 * (vp + vm);
                // move only the common constant into the scalar
                SemiclassicalSymbol rest = sym;
                rest.at(0).add_term(plus, -c0);
                rest.at(0).add_term(minus, -c0);
                r0.set_scalar(c0);
                r0.add_part(g, rest);
                continue;
            } else {
                TermKey ck = constkey;
                ck.m = 0;
                auto it = sym.at(0).terms().find(ck);
                c0 = it != sym.at(0).terms().end() ? it->second : cplx(0);
                SemiclassicalSymbol rest = sym;
                rest.at(0).add_term(ck, -c0);
                r0.set_scalar(c0);
                r0.add_part(g, rest);
                continue;
            }
        }
        r0.add_part(g, sym);
    }
    res.r0 = r0;
    res.projection_residual = maxerr;
    if (maxerr > residual_tol)
        throw std::runtime_error(
            "leading_inverse: projection residual " + std::to_string(maxerr) +
            " above tolerance; enlarge bandwidth or grid");
    return res;
}

ParametrixResult parametrix(const GSymbol& a, const LeadingInverseResult& li) {
    const int N = a.truncation();
    ParametrixResult out;
    GSymbol unit = GSymbol::unit(a.group(), N);
    GSymbol w = unit - a.gmul(li.r0);
    GSymbol series = unit;
    GSymbol wp = w;
    for (int k = 1; k <= N; ++k) {
        series = series + wp;
        if (k < N) {
            wp = wp.gmul(w);
            wp.prune(1e-16);
        }
    }
    out.r = li.r0.gmul(series);
    out.r.prune(1e-16);
    out.resid_right = unit - a.gmul(out.r);
    out.resid_left = unit - out.r.gmul(a);
    out.projection_residual = li.projection_residual + li.neumann_tail;
    return out;
}

double cleanse_for_trace(GSymbol& g, int min_degree_exclusive, double tol) {
    double dropped = 0.0;
    for (auto& [elem, sym] : g.mutable_parts()) {
        for (int j = 0; j < sym.truncation(); ++j) {
            ClassicalSymbol cleaned(sym.dim());
            for (const auto& [key, c] : sym.at(j).terms()) {
                if (!key.chi.transition_only() && key.deg >= min_degree_exclusive) {
                    if (std::abs(c) > tol) {
                        std::ostringstream os;
                        os << "trace operand has non-negligible germ of degree " << key.deg
                           << " (|c| = " << std::abs(c) << ")";
                        throw std::domain_error(os.str());
                    }
                    dropped = std::max(dropped, std::abs(c));
                    continue;
                }
                cleaned.add_term(key, c);
            }
            sym.at(j) = cleaned;
        }
    }
    return dropped;
}

GMatrix2 GMatrix2::mul(const GMatrix2& o) const {
    GMatrix2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r.m[i][j] = m[i][0].gmul(o.m[0][j]) + m[i][1].gmul(o.m[1][j]);
    return r;
}

GMatrix2 GMatrix2::sub(const GMatrix2& o) const {
    GMatrix2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
    return r;
}

}  // namespace gindex
