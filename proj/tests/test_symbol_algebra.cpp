#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gindex/symbol.hpp"
#include "gindex/group.hpp"

using namespace gindex;

namespace {

const Excision& chi() {
    static Excision e(0.5, 1.0, 7);
    return e;
}

SemiclassicalSymbol random_symbol(int n, int N, std::mt19937_64& rng, int max_terms = 4,
                                  int min_deg = -6, int max_deg = 0) {
    std::uniform_int_distribution<int> nt(1, max_terms);
    std::uniform_int_distribution<int> kd(-2, 2);
    std::uniform_int_distribution<int> md(n == 1 ? 0 : -2, 2);
    std::uniform_real_distribution<double> cd(-1.0, 1.0);
    std::vector<TermSpec> specs;
    int m = max_deg;
    for (int j = 0; j < N; ++j) {
        int cnt = nt(rng);
        for (int t = 0; t < cnt; ++t) {
            TermSpec s;
            s.j = j;
            std::uniform_int_distribution<int> dd(min_deg, m - j);
            s.d = dd(rng);
            s.k = {kd(rng), n == 2 ? kd(rng) : 0};
            if (n == 1) {
                s.m = (kd(rng) >= 0) ? 1 : -1;
            } else {
                s.m = md(rng);
            }
            s.c = cplx(cd(rng), cd(rng));
            specs.push_back(s);
        }
    }
    return make_symbol(n, N, specs, max_deg);
}

double coeff_distance(const SemiclassicalSymbol& a, const SemiclassicalSymbol& b) {
    double m = 0.0;
    for (int j = 0; j < a.truncation(); ++j) {
        auto ta = a.at(j).terms();
        for (const auto& [k, c] : b.at(j).terms()) {
            auto it = ta.find(k);
            if (it == ta.end()) ta.emplace(k, -c);
            else it->second -= c;
        }
        for (const auto& [k, c] : ta) {
            (void)k;
            m = std::max(m, std::abs(c));
        }
    }
    return m;
}

}  // namespace

TEST_CASE("smoothstep profile: knots, smoothness, basic integrals") {
    const Excision& e = chi();
    CHECK(e.deriv(0, 0.4) == 0.0);
    CHECK(e.deriv(0, 1.2) == 1.0);
    CHECK(e.deriv(0, 0.75) == doctest::Approx(0.5).epsilon(1e-12));
    for (int p = 1; p <= 7; ++p) {
        CHECK(e.deriv(p, 0.5) == 0.0);
        CHECK(e.deriv(p, 1.0) == 0.0);
    }
    CHECK(std::abs(e.deriv(1, 0.5 + 1e-9)) < 1e-6);
    CHECK(std::abs(e.deriv(1, 1.0 - 1e-9)) < 1e-6);
    // integral of chi' over the line is 1, chi''..chi'''' integrate to 0
    CHECK(e.integral(0, {1}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(e.integral(0, {2})) < 2e-9);
    CHECK(std::abs(e.integral(0, {3})) < 2e-9);
    // integral of chi * chi' = [chi^2/2] = 1/2
    CHECK(e.integral(0, {0, 1}) == doctest::Approx(0.5).epsilon(1e-12));
    // integral chi(r) r^-3 over (0,inf): transition part + tail 1/2
    double v = e.integral(-3, {0});
    double quad = 0.0;  // trapezoid check
    int M = 200000;
    for (int i = 0; i < M; ++i) {
        double r = 0.5 + 0.5 * (i + 0.5) / M;
        quad += e.deriv(0, r) * std::pow(r, -3.0) * (0.5 / M);
    }
    quad += 0.5;  // exact tail of r^-3 from 1
    CHECK(v == doctest::Approx(quad).epsilon(1e-8));
}

TEST_CASE("make_symbol: zero, single coefficient, both rays, grading errors") {
    SemiclassicalSymbol z = make_symbol(1, 3, {});
    CHECK(z.is_zero());
    CHECK(z.order() == kOrderNegInf);

    // e^{ix} on the positive ray
    SemiclassicalSymbol a = make_symbol(1, 3, {{0, 0, {1, 0}, 1, cplx(1, 0)}});
    CHECK(a.at(0).terms().size() == 1);
    CHECK(a.order() == 0);
    CHECK(a.evaluate({0.0, 0.0}, {2.0, 0.0}, 0.1, chi()).real() == doctest::Approx(1.0));

    // |xi|^-3 on both rays
    SemiclassicalSymbol b = make_symbol(1, 3, {{0, -3, {0, 0}, 0, cplx(1, 0)}});
    CHECK(b.at(0).terms().size() == 2);
    CHECK(b.evaluate({0.3, 0.0}, {-2.0, 0.0}, 0.1, chi()).real() ==
          doctest::Approx(std::pow(2.0, -3)));

    // grading violation: order(a_1) > m - 1 with declared order 0
    CHECK_THROWS_AS(make_symbol(1, 3, {{1, 0, {0, 0}, 1, cplx(1, 0)}}, 0),
                    std::invalid_argument);
    // h-order outside truncation
    CHECK_THROWS_AS(make_symbol(1, 2, {{2, 0, {0, 0}, 1, cplx(1, 0)}}), std::invalid_argument);
}

TEST_CASE("derivatives: x phase factors, radial power rule, polar identity") {
    // d/dx e^{ix} = i e^{ix}
    SemiclassicalSymbol a = make_symbol(1, 2, {{0, 0, {1, 0}, 1, cplx(1, 0)}});
    SemiclassicalSymbol dxa = a.derive({1, 0}, {0, 0});
    auto it = dxa.at(0).terms().begin();
    CHECK(it->second == cplx(0, 1));

    // n=1: d/dxi (xi^{-1} on xi>0) = -xi^{-2}: compare on the germ side r >= 1
    SemiclassicalSymbol b = make_symbol(1, 2, {{0, -1, {0, 0}, 1, cplx(1, 0)}});
    SemiclassicalSymbol db = b.derive({0, 0}, {1, 0});
    cplx v = db.evaluate({0.0, 0.0}, {2.0, 0.0}, 0.0, chi());
    CHECK(v.real() == doctest::Approx(-0.25).epsilon(1e-12));

    // n=2: d/dxi1 |xi|^{-2} = -|xi|^{-3}(e^{i th} + e^{-i th}), finite differences
    SemiclassicalSymbol c = make_symbol(2, 2, {{0, -2, {0, 0}, 0, cplx(1, 0)}});
    SemiclassicalSymbol dc = c.derive({0, 0}, {1, 0});
    std::array<double, 2> x{0.7, -0.3};
    std::array<double, 2> xi{1.7, 0.9};
    double eps = 1e-6;
    cplx fd = (c.evaluate(x, {xi[0] + eps, xi[1]}, 0.0, chi()) -
               c.evaluate(x, {xi[0] - eps, xi[1]}, 0.0, chi())) /
              (2 * eps);
    CHECK(dc.evaluate(x, xi, 0.0, chi()).real() == doctest::Approx(fd.real()).epsilon(1e-6));
    // the germ part carries -|xi|^{-3}(e^{i th} + e^{-i th}); the profile
    // derivative rides along as transition-supported terms
    for (int mm : {1, -1}) {
        TermKey key;
        key.k = {0, 0};
        key.m = mm;
        key.deg = -3;
        key.chi = ChiProfile{};
        auto it2 = dc.at(0).terms().find(key);
        REQUIRE(it2 != dc.at(0).terms().end());
        CHECK(it2->second.real() == doctest::Approx(-1.0).epsilon(1e-13));
    }

    // mixed partials commute exactly
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        SemiclassicalSymbol s = random_symbol(2, 3, rng);
        SemiclassicalSymbol d1 = s.derive({1, 0}, {0, 1});
        SemiclassicalSymbol d2 = s.derive({0, 0}, {0, 1}).derive({1, 0}, {0, 0});
        CHECK(coeff_distance(d1, d2) < 1e-12);
    }
}

TEST_CASE("star product: units, zero, h-expansion against hand series") {
    const int N = 4;
    // a = xi^{-1} on xi>0, b = e^{ix} on xi>0.
    // (a*b)_alpha = (1/alpha!) dxi^alpha a . Dx^alpha b
    //            = (-1)^alpha e^{ix} xi^{-1-alpha} (germ part), so
    // a*b = e^{ix}(xi^{-1} - h xi^{-2} + h^2 xi^{-3} - ...) away from the
    // transition region.
    SemiclassicalSymbol a = make_symbol(1, N, {{0, -1, {0, 0}, 1, cplx(1, 0)}});
    SemiclassicalSymbol b = make_symbol(1, N, {{0, 0, {1, 0}, 1, cplx(1, 0)}});
    SemiclassicalSymbol ab = a.star(b);
    for (int j = 0; j < N; ++j) {
        // germ coefficient of e^{ix} xi^{-1-j}; the two factors carry one
        // profile each, so the pure-germ key holds chi^2
        TermKey key;
        key.k = {1, 0};
        key.m = 1;
        key.deg = -1 - j;
        key.chi = ChiProfile{2, {}};
        auto it = ab.at(j).terms().find(key);
        REQUIRE(it != ab.at(j).terms().end());
        CHECK(it->second.real() == doctest::Approx((j % 2) ? -1.0 : 1.0).epsilon(1e-12));
    }
    // b*a has no h-corrections (dxi b = 0): pointwise product only
    SemiclassicalSymbol ba = b.star(a);
    CHECK(ba.at(1).empty());
    CHECK(ba.at(0).terms().size() == 1);

    // zero and order additivity
    SemiclassicalSymbol z = make_symbol(1, N, {});
    CHECK(z.star(a).is_zero());
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        SemiclassicalSymbol u = random_symbol(1, 3, rng, 3, -4, 0);
        SemiclassicalSymbol v = random_symbol(1, 3, rng, 3, -4, 0);
        CHECK(u.star(v).order() <= u.order() + v.order());
    }
}

TEST_CASE("star product: associativity and filtration (n = 1 and n = 2)") {
    std::mt19937_64 rng(23);
    for (int n = 1; n <= 2; ++n) {
        for (int rep = 0; rep < 8; ++rep) {
            SemiclassicalSymbol a = random_symbol(n, 3, rng, 3, -3, 0);
            SemiclassicalSymbol b = random_symbol(n, 3, rng, 3, -3, 0);
            SemiclassicalSymbol c = random_symbol(n, 3, rng, 3, -3, 0);
            double d = coeff_distance(a.star(b).star(c), a.star(b.star(c)));
            CHECK(d < 1e-10);
        }
    }
    // filtration: valuation(a) + valuation(b) <= valuation(a*b)
    std::vector<TermSpec> sp{{1, -1, {1, 0}, 1, cplx(0.5, 0)}};
    SemiclassicalSymbol a = make_symbol(1, 4, sp, 0);
    std::vector<TermSpec> sq{{2, -2, {0, 0}, 1, cplx(0, 1)}};
    SemiclassicalSymbol b = make_symbol(1, 4, sq, 0);
    CHECK(a.star(b).h_valuation() >= 3);
}

TEST_CASE("star product grid check: evaluate matches term-by-term expansion") {
    std::mt19937_64 rng(31);
    const Excision& e = chi();
    for (int n = 1; n <= 2; ++n) {
        SemiclassicalSymbol a = random_symbol(n, 3, rng, 3, -3, 0);
        SemiclassicalSymbol b = random_symbol(n, 3, rng, 3, -3, 0);
        SemiclassicalSymbol ab = a.star(b);
        double h = 0.05;
        // pointwise recomputation of sum_alpha h^{|alpha|}/alpha! dxi^a a Dx^a b
        for (int trial = 0; trial < 6; ++trial) {
            std::array<double, 2> x{0.3 + trial, n == 2 ? 1.1 * trial : 0.0};
            std::array<double, 2> xi{1.1 + 0.2 * trial, n == 2 ? -0.4 : 0.0};
            cplx direct = 0.0;
            for (int a1 = 0; a1 < 3; ++a1)
                for (int a2 = 0; a2 < (n == 2 ? 3 - a1 : 1); ++a2) {
                    if (a1 + a2 >= 3) continue;
                    double fac = 1.0;
                    for (int i = 2; i <= a1; ++i) fac *= i;
                    for (int i = 2; i <= a2; ++i) fac *= i;
                    SemiclassicalSymbol da = a.derive({0, 0}, {a1, a2});
                    SemiclassicalSymbol db = b.derive({a1, a2}, {0, 0}).scaled(
                        std::pow(cplx(0, -1), a1 + a2));
                    // h-grading: entries beyond the window were already dropped in ab,
                    // so truncate the pointwise sum identically.
                    for (int k = 0; k < 3; ++k)
                        for (int l = 0; l + k + a1 + a2 < 3; ++l)
                            direct += std::pow(h, k + l + a1 + a2) / fac *
                                      da.at(k).evaluate(x, xi, e) * db.at(l).evaluate(x, xi, e);
                }
            cplx viastar = ab.evaluate(x, xi, h, e);
            CHECK(std::abs(direct - viastar) < 1e-9);
        }
    }
}

TEST_CASE("pullback: identity, phase shift, reflection, functoriality") {
    // identity
    AffineCanonical id(1, imat_identity(1), {Angle::zero(), Angle::zero()});
    SemiclassicalSymbol a = make_symbol(1, 2, {{0, 0, {1, 0}, 1, cplx(1, 0)}});
    CHECK(coeff_distance(a.pullback(id), a) == 0.0);

    // C(x, xi) = (x + b, xi): e^{ix} -> e^{ib} e^{ix}
    AffineCanonical tr(1, imat_identity(1), {Angle(1, 3), Angle::zero()});
    SemiclassicalSymbol pa = a.pullback(tr);
    auto it = pa.at(0).terms().begin();
    CHECK(it->second.real() == doctest::Approx(std::cos(2 * M_PI / 3)).epsilon(1e-13));
    CHECK(it->second.imag() == doctest::Approx(std::sin(2 * M_PI / 3)).epsilon(1e-13));
    // pullback by the inverse gives e^{-ib} e^{ix}
    SemiclassicalSymbol pb = a.pullback(tr.inverse());
    it = pb.at(0).terms().begin();
    CHECK(it->second.imag() == doctest::Approx(-std::sin(2 * M_PI / 3)).epsilon(1e-13));

    // n=2 reflection (x,y,xi,eta) -> (x,-y,xi,-eta): e^{i(x+y)} e^{im th} ->
    // e^{i(x-y)} e^{-im th}
    IntMat refl{{{1, 0}, {0, -1}}};
    AffineCanonical R(2, refl, {Angle::zero(), Angle::zero()});
    SemiclassicalSymbol s = make_symbol(2, 2, {{0, -1, {1, 1}, 3, cplx(1, 0)}});
    SemiclassicalSymbol ps = s.pullback(R);
    REQUIRE(ps.at(0).terms().size() == 1);
    auto key = ps.at(0).terms().begin()->first;
    CHECK(key.k == std::array<int, 2>{1, -1});
    CHECK(key.m == -3);
    // grid check at a sample point
    std::array<double, 2> x{0.4, 1.3}, xi{1.2, 0.7};
    cplx lhs = ps.evaluate(x, xi, 0.0, chi());
    cplx rhs = s.evaluate(R.apply_base(x), R.apply_fiber(xi), 0.0, chi());
    CHECK(std::abs(lhs - rhs) < 1e-12);

    // functoriality on random symbols and maps
    IntMat rot{{{0, -1}, {1, 0}}};
    AffineCanonical C1(2, rot, {Angle(1, 4), Angle(0, 1)});
    AffineCanonical C2(2, refl, {Angle(1, 2), Angle(2, 5)});
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 6; ++rep) {
        SemiclassicalSymbol u = random_symbol(2, 2, rng);
        SemiclassicalSymbol lhs2 = u.pullback(C1).pullback(C2);
        SemiclassicalSymbol rhs2 = u.pullback(C1.compose(C2));
        CHECK(coeff_distance(lhs2, rhs2) < 1e-12);
    }
}

TEST_CASE("integrate: closed forms, mean-zero modes") {
    const Excision& e = chi();
    // n=1, both rays, degree -3: 2pi * 2 * int chi r^{-3}
    SemiclassicalSymbol a = make_symbol(1, 2, {{0, -3, {0, 0}, 0, cplx(1, 0)}});
    double expect = 2 * M_PI * 2.0 * e.integral(-3, {0});
    CHECK(a.integrate(e)[0].real() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(a.integrate(e)[1]) == 0.0);

    // k != 0 integrates to zero
    SemiclassicalSymbol b = make_symbol(1, 2, {{0, -3, {2, 0}, 1, cplx(1, 0)}});
    CHECK(std::abs(b.integrate(e)[0]) == 0.0);

    // n=2 angular mean-zero mode
    SemiclassicalSymbol c = make_symbol(2, 2, {{0, -4, {0, 0}, 1, cplx(1, 0)}});
    CHECK(std::abs(c.integrate(e)[0]) == 0.0);

    // divergent degree rejected
    SemiclassicalSymbol d = make_symbol(1, 2, {{0, -1, {0, 0}, 1, cplx(1, 0)}});
    CHECK_THROWS_AS(d.integrate(e), std::domain_error);
}

TEST_CASE("evaluate: zero symbol, plain wave, inside the excised region") {
    SemiclassicalSymbol z = make_symbol(1, 2, {});
    CHECK(std::abs(z.evaluate({0.1, 0}, {3.0, 0}, 0.2, chi())) == 0.0);
    SemiclassicalSymbol a = make_symbol(1, 2, {{0, 0, {1, 0}, 1, cplx(1, 0)}});
    CHECK(a.evaluate({0.0, 0}, {2.0, 0}, 0.7, chi()).real() == doctest::Approx(1.0));
    CHECK(std::abs(a.evaluate({0.0, 0}, {0.2, 0}, 0.7, chi())) == 0.0);
}
