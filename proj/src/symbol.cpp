#include "gindex/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gindex/group.hpp"

namespace gindex {

namespace {

// i^q for integer q (exact).
cplx ipow(long long q) {
    switch (((q % 4) + 4) % 4) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

}  // namespace

double chi_factor_value(const ChiProfile& chi, double r, const Excision& exc) {
    double v = 1.0;
    for (int i = 0; i < chi.chi0; ++i) v *= exc.deriv(0, r);
    for (int p : chi.derivs) v *= exc.deriv(p, r);
    return v;
}

void ClassicalSymbol::add_term(const TermKey& key, cplx c) {
    if (std::abs(c) == 0.0) return;
    auto [it, inserted] = terms_.emplace(key, c);
    if (!inserted) {
        it->second += c;
        if (std::abs(it->second) < kPruneTol) terms_.erase(it);
    }
}

ClassicalSymbol& ClassicalSymbol::operator+=(const ClassicalSymbol& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
}

ClassicalSymbol ClassicalSymbol::scaled(cplx s) const {
    ClassicalSymbol r(n_);
    if (std::abs(s) == 0.0) return r;
    for (const auto& [k, c] : terms_) r.terms_[k] = c * s;
    return r;
}

ClassicalSymbol ClassicalSymbol::mul(const ClassicalSymbol& o) const {
    ClassicalSymbol r(n_);
    for (const auto& [ka, ca] : terms_) {
        for (const auto& [kb, cb] : o.terms_) {
            TermKey k;
            k.k = {ka.k[0] + kb.k[0], ka.k[1] + kb.k[1]};
            if (n_ == 1) {
                if (ka.m != kb.m) continue;  // disjoint rays
                k.m = ka.m;
            } else {
                k.m = ka.m + kb.m;
            }
            k.deg = ka.deg + kb.deg;
            k.chi = ka.chi.merged(kb.chi);
            r.add_term(k, ca * cb);
        }
    }
    return r;
}

ClassicalSymbol ClassicalSymbol::dx(int axis) const {
    ClassicalSymbol r(n_);
    for (const auto& [k, c] : terms_) {
        if (k.k[axis] == 0) continue;
        r.add_term(k, c * cplx(0, double(k.k[axis])));
    }
    return r;
}

namespace {

// Radial derivative of r^deg * chi: product rule over the profile factors.
void radial_derivative(const TermKey& k, cplx c,
                       std::vector<std::pair<TermKey, cplx>>& out) {
    if (k.deg != 0) {
        TermKey t = k;
        t.deg -= 1;
        out.emplace_back(t, c * double(k.deg));
    }
    if (k.chi.chi0 > 0) {
        TermKey t = k;
        t.chi.chi0 -= 1;
        t.chi.derivs.insert(std::lower_bound(t.chi.derivs.begin(), t.chi.derivs.end(), 1), 1);
        out.emplace_back(t, c * double(k.chi.chi0));
    }
    // distinct derivative orders with multiplicity
    for (size_t i = 0; i < k.chi.derivs.size(); ++i) {
        if (i > 0 && k.chi.derivs[i] == k.chi.derivs[i - 1]) continue;
        int p = k.chi.derivs[i];
        int mult = int(std::count(k.chi.derivs.begin(), k.chi.derivs.end(), p));
        TermKey t = k;
        auto it = std::find(t.chi.derivs.begin(), t.chi.derivs.end(), p);
        t.chi.derivs.erase(it);
        t.chi.derivs.insert(
            std::lower_bound(t.chi.derivs.begin(), t.chi.derivs.end(), p + 1), p + 1);
        out.emplace_back(t, c * double(mult));
    }
}

}  // namespace

ClassicalSymbol ClassicalSymbol::dxi(int axis) const {
    ClassicalSymbol r(n_);
    std::vector<std::pair<TermKey, cplx>> rad;
    for (const auto& [k, c] : terms_) {
        rad.clear();
        radial_derivative(k, c, rad);
        if (n_ == 1) {
            // xi = s r on the ray s: d/dxi = s d/dr.
            double s = double(k.m);
            for (auto& [t, tc] : rad) r.add_term(t, tc * s);
        } else if (axis == 0) {
            // d/dxi1 [R e^{im.th}] = ((R' - mR/r) e^{i(m+1)th} + (R' + mR/r) e^{i(m-1)th})/2
            for (auto& [t, tc] : rad) {
                TermKey up = t, dn = t;
                up.m += 1;
                dn.m -= 1;
                r.add_term(up, tc * 0.5);
                r.add_term(dn, tc * 0.5);
            }
            TermKey over = k;  // R/r term
            over.deg -= 1;
            TermKey up = over, dn = over;
            up.m += 1;
            dn.m -= 1;
            r.add_term(up, c * (-0.5 * double(k.m)));
            r.add_term(dn, c * (0.5 * double(k.m)));
        } else {
            // d/dxi2 [R e^{im.th}] = (i/2)((mR/r - R') e^{i(m+1)th} + (mR/r + R') e^{i(m-1)th})
            for (auto& [t, tc] : rad) {
                TermKey up = t, dn = t;
                up.m += 1;
                dn.m -= 1;
                r.add_term(up, tc * cplx(0, -0.5));
                r.add_term(dn, tc * cplx(0, 0.5));
            }
            TermKey over = k;
            over.deg -= 1;
            TermKey up = over, dn = over;
            up.m += 1;
            dn.m -= 1;
            r.add_term(up, c * cplx(0, 0.5 * double(k.m)));
            r.add_term(dn, c * cplx(0, 0.5 * double(k.m)));
        }
    }
    return r;
}

ClassicalSymbol ClassicalSymbol::dxi_dir(const std::array<double, 2>& v) const {
    ClassicalSymbol r(n_);
    if (v[0] != 0.0) r += dxi(0).scaled(v[0]);
    if (n_ == 2 && v[1] != 0.0) r += dxi(1).scaled(v[1]);
    return r;
}

ClassicalSymbol ClassicalSymbol::pullback(const AffineCanonical& C) const {
    // (a o C)(x, xi) = a(Ax + b, A^{-T} xi).
    ClassicalSymbol r(n_);
    const IntMat& A = C.A();
    for (const auto& [k, c] : terms_) {
        TermKey t = k;
        t.k = C.apply_A_T(k.k);
        cplx coeff = c * std::exp(cplx(0, C.pairing(k.k).radians()));
        if (n_ == 1) {
            t.m = A[0][0] * k.m;  // ray flips with the sign of A
        } else {
            // Angular action of O = A^{-T} (a signed permutation of the plane):
            // rotations shift theta by a quarter turn, reflections send theta
            // to psi - theta with psi the angle of O e1.
            IntMat O{};  // A^{-T} = A (A orthogonal integer) -- compute honestly:
            // A^{-1} = A^T, so A^{-T} = (A^T)^T = A.
            O = A;
            int det = imat_det(n_, O);
            int c0 = O[0][0], c1 = O[1][0];  // O e1
            int q;  // quarter turns of angle(O e1)
            if (c0 == 1 && c1 == 0) q = 0;
            else if (c0 == 0 && c1 == 1) q = 1;
            else if (c0 == -1 && c1 == 0) q = 2;
            else q = 3;
            if (det == 1) {
                coeff *= ipow(long(k.m) * q);  // theta -> theta + q pi/2
            } else {
                coeff *= ipow(long(k.m) * q);  // theta -> psi - theta
                t.m = -k.m;
            }
        }
        r.add_term(t, coeff);
    }
    return r;
}

cplx ClassicalSymbol::evaluate(const std::array<double, 2>& x, const std::array<double, 2>& xi,
                               const Excision& chi) const {
    double r = (n_ == 1) ? std::abs(xi[0]) : std::hypot(xi[0], xi[1]);
    if (r <= chi.lo()) return 0.0;
    double theta = (n_ == 2) ? std::atan2(xi[1], xi[0]) : 0.0;
    int ray = (xi[0] >= 0) ? 1 : -1;
    cplx acc = 0.0;
    for (const auto& [k, c] : terms_) {
        if (n_ == 1 && k.m != ray) continue;
        cplx v = c * std::exp(cplx(0, k.k[0] * x[0] + k.k[1] * x[1]));
        v *= std::pow(r, double(k.deg)) * chi_factor_value(k.chi, r, chi);
        if (n_ == 2) v *= std::exp(cplx(0, double(k.m) * theta));
        acc += v;
    }
    return acc;
}

cplx ClassicalSymbol::integrate(const Excision& chi) const {
    cplx acc = 0.0;
    double tx = std::pow(2.0 * M_PI, double(n_));
    for (const auto& [k, c] : terms_) {
        if (k.k[0] != 0 || k.k[1] != 0) continue;
        if (n_ == 2 && k.m != 0) continue;
        int pow = k.deg + n_ - 1;
        if (!k.chi.transition_only() && pow >= -1) {
            std::ostringstream os;
            os << "divergent radial integral: germ degree " << k.deg << " with n = " << n_;
            throw std::domain_error(os.str());
        }
        double rad = chi.integral(pow, k.chi.multiset());
        double ang = (n_ == 2) ? 2.0 * M_PI : 1.0;  // per-ray weight is 1 for n = 1
        acc += c * rad * ang * tx;
    }
    return acc;
}

int ClassicalSymbol::order() const {
    int o = kOrderNegInf;
    for (const auto& [k, c] : terms_)
        if (!k.chi.transition_only()) o = std::max(o, k.deg);
    return o;
}

double ClassicalSymbol::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

int ClassicalSymbol::x_bandwidth() const {
    int b = 0;
    for (const auto& [k, c] : terms_)
        b = std::max({b, std::abs(k.k[0]), std::abs(k.k[1])});
    return b;
}

int ClassicalSymbol::ang_bandwidth() const {
    if (n_ == 1) return 0;
    int b = 0;
    for (const auto& [k, c] : terms_) b = std::max(b, std::abs(k.m));
    return b;
}

void ClassicalSymbol::prune(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();)
        it = (std::abs(it->second) < tol) ? terms_.erase(it) : std::next(it);
}

bool SemiclassicalSymbol::is_zero() const {
    for (const auto& c : coeff_)
        if (!c.empty()) return false;
    return true;
}

SemiclassicalSymbol& SemiclassicalSymbol::operator+=(const SemiclassicalSymbol& o) {
    if (o.truncation() != truncation() || o.dim() != dim())
        throw std::invalid_argument("symbol sum: mismatched truncation or dimension");
    for (int j = 0; j < truncation(); ++j) coeff_[j] += o.coeff_[j];
    return *this;
}

SemiclassicalSymbol SemiclassicalSymbol::operator+(const SemiclassicalSymbol& o) const {
    SemiclassicalSymbol r = *this;
    r += o;
    return r;
}

SemiclassicalSymbol SemiclassicalSymbol::scaled(cplx s) const {
    SemiclassicalSymbol r(n_, truncation());
    for (int j = 0; j < truncation(); ++j) r.coeff_[j] = coeff_[j].scaled(s);
    return r;
}

SemiclassicalSymbol SemiclassicalSymbol::star(const SemiclassicalSymbol& o) const {
    const int N = truncation();
    if (o.truncation() != N || o.dim() != n_)
        throw std::invalid_argument("star: mismatched truncation or dimension");
    SemiclassicalSymbol r(n_, N);

    // Cache of dxi^alpha applied to our coefficients.
    std::map<std::tuple<int, int, int>, ClassicalSymbol> dcache;  // (j, a1, a2)
    for (int j = 0; j < N; ++j) {
        dcache[{j, 0, 0}] = coeff_[j];
        for (int a1 = 0; a1 < N; ++a1)
            for (int a2 = 0; a1 + a2 < N; ++a2) {
                if (a1 == 0 && a2 == 0) continue;
                if (n_ == 1 && a2 > 0) continue;
                if (a2 > 0)
                    dcache[{j, a1, a2}] = dcache[{j, a1, a2 - 1}].dxi(1);
                else
                    dcache[{j, a1, 0}] = dcache[{j, a1 - 1, 0}].dxi(0);
            }
    }
    auto dxi_pow = [&](int j, int a1, int a2) -> const ClassicalSymbol& {
        return dcache[{j, a1, a2}];
    };

    auto factorial = [](int p) {
        double f = 1.0;
        for (int i = 2; i <= p; ++i) f *= i;
        return f;
    };

    for (int t = 0; t < N; ++t) {
        for (int k = 0; k <= t; ++k) {
            if (coeff_[k].empty()) continue;
            for (int l = 0; l + k <= t; ++l) {
                if (o.coeff_[l].empty()) continue;
                int am = t - k - l;  // |alpha|
                for (int a1 = 0; a1 <= am; ++a1) {
                    int a2 = am - a1;
                    if (n_ == 1 && a2 != 0) continue;
                    const ClassicalSymbol& da = dxi_pow(k, a1, a2);
                    if (da.empty()) continue;
                    // Dx^alpha b multiplies the mode-k coefficient by k^alpha.
                    ClassicalSymbol db(n_);
                    for (const auto& [key, c] : o.coeff_[l].terms()) {
                        double f = 1.0;
                        for (int i = 0; i < a1; ++i) f *= double(key.k[0]);
                        for (int i = 0; i < a2; ++i) f *= double(key.k[1]);
                        if (f == 0.0) continue;
                        db.add_term(key, c * f);
                    }
                    if (db.empty()) continue;
                    r.coeff_[t] += da.mul(db).scaled(1.0 / (factorial(a1) * factorial(a2)));
                }
            }
        }
        r.coeff_[t].prune();
    }
    return r;
}

SemiclassicalSymbol SemiclassicalSymbol::derive(const std::array<int, 2>& ax,
                                                const std::array<int, 2>& bx) const {
    SemiclassicalSymbol r = *this;
    for (int j = 0; j < truncation(); ++j) {
        ClassicalSymbol c = r.coeff_[j];
        for (int i = 0; i < ax[0]; ++i) c = c.dx(0);
        for (int i = 0; i < ax[1]; ++i) c = c.dx(1);
        for (int i = 0; i < bx[0]; ++i) c = c.dxi(0);
        for (int i = 0; i < bx[1]; ++i) c = c.dxi(1);
        r.coeff_[j] = c;
    }
    return r;
}

SemiclassicalSymbol SemiclassicalSymbol::pullback(const AffineCanonical& C) const {
    SemiclassicalSymbol r(n_, truncation());
    for (int j = 0; j < truncation(); ++j) r.coeff_[j] = coeff_[j].pullback(C);
    return r;
}

cplx SemiclassicalSymbol::evaluate(const std::array<double, 2>& x, const std::array<double, 2>& xi,
                                   double h, const Excision& chi) const {
    cplx acc = 0.0;
    double hp = 1.0;
    for (int j = 0; j < truncation(); ++j) {
        acc += hp * coeff_[j].evaluate(x, xi, chi);
        hp *= h;
    }
    return acc;
}

std::vector<cplx> SemiclassicalSymbol::integrate(const Excision& chi) const {
    std::vector<cplx> r(truncation());
    for (int j = 0; j < truncation(); ++j) r[j] = coeff_[j].integrate(chi);
    return r;
}

int SemiclassicalSymbol::order() const {
    int o = kOrderNegInf;
    for (int j = 0; j < truncation(); ++j) {
        int oj = coeff_[j].order();
        if (oj != kOrderNegInf) o = std::max(o, oj + j);
    }
    return o;
}

int SemiclassicalSymbol::h_valuation() const {
    for (int j = 0; j < truncation(); ++j)
        if (!coeff_[j].empty()) return j;
    return truncation();
}

int SemiclassicalSymbol::x_bandwidth() const {
    int b = 0;
    for (const auto& c : coeff_) b = std::max(b, c.x_bandwidth());
    return b;
}

int SemiclassicalSymbol::ang_bandwidth() const {
    int b = 0;
    for (const auto& c : coeff_) b = std::max(b, c.ang_bandwidth());
    return b;
}

double SemiclassicalSymbol::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : coeff_) m = std::max(m, c.max_abs_coeff());
    return m;
}

void SemiclassicalSymbol::prune(double tol) {
    for (auto& c : coeff_) c.prune(tol);
}

SemiclassicalSymbol make_symbol(int n, int N, const std::vector<TermSpec>& specs,
                                std::optional<int> declared_order) {
    if (n != 1 && n != 2) throw std::invalid_argument("make_symbol: n must be 1 or 2");
    if (N < 1) throw std::invalid_argument("make_symbol: truncation must be positive");
    SemiclassicalSymbol a(n, N);
    for (const auto& s : specs) {
        if (s.j < 0 || s.j >= N) {
            std::ostringstream os;
            os << "make_symbol: h-order " << s.j << " outside [0, " << N << ")";
            throw std::invalid_argument(os.str());
        }
        TermKey key;
        key.k = s.k;
        key.deg = s.d;
        key.chi = ChiProfile{};
        if (n == 1) {
            if (s.m == 0) {
                key.m = 1;
                a.at(s.j).add_term(key, s.c);
                key.m = -1;
                a.at(s.j).add_term(key, s.c);
                continue;
            }
            if (s.m != 1 && s.m != -1)
                throw std::invalid_argument("make_symbol: n = 1 needs m in {-1, 0, +1}");
            key.m = s.m;
        } else {
            key.m = s.m;
        }
        a.at(s.j).add_term(key, s.c);
    }
    int m = declared_order ? *declared_order : a.order();
    for (int j = 0; j < N; ++j) {
        int oj = a.at(j).order();
        if (oj != kOrderNegInf && oj > m - j) {
            std::ostringstream os;
            os << "make_symbol: grading violation, order(a_" << j << ") = " << oj << " > "
               << m - j << " = declared_order - j";
            throw std::invalid_argument(os.str());
        }
    }
    return a;
}

}  // namespace gindex
