#include "gindex/excision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gindex {

namespace {

// binomial(n, k) as double; arguments stay small (< 64).
double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

}  // namespace

const GaussLegendre& GaussLegendre::get() {
    static GaussLegendre rule;
    return rule;
}

GaussLegendre::GaussLegendre() {
    const int n = GL_POINTS;
    node.resize(n);
    weight.resize(n);
    // Newton iteration from the Chebyshev initial guess.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        node[i] = x;
        weight[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
}

Excision::Excision(double lo, double hi, int smoothness)
    : lo_(lo), hi_(hi), q_(smoothness) {
    if (!(0.0 < lo && lo < hi)) throw std::invalid_argument("excision: need 0 < lo < hi");
    if (q_ < 1 || q_ > 12) throw std::invalid_argument("excision: smoothness in [1,12]");
    // Smoothstep of order q: S(t) = t^(q+1) * sum_i C(q+i,i) C(2q+1,q-i) (-t)^i,
    // S(0)=0, S(1)=1, S^(p) = 0 at both ends for 1 <= p <= q.
    const int deg = 2 * q_ + 1;
    std::vector<double> s(deg + 1, 0.0);
    for (int i = 0; i <= q_; ++i)
        s[q_ + 1 + i] = binom(q_ + i, i) * binom(2 * q_ + 1, q_ - i) * ((i % 2) ? -1.0 : 1.0);
    // d/dr = (1/width) d/dt; dpolys_[p] holds the t-polynomial of the p-th
    // r-derivative, scale factors included.
    const double w = hi_ - lo_;
    dpolys_.assign(1, s);
    std::vector<double> tpoly = s;
    double scale = 1.0;
    for (int p = 1; p <= deg + 1; ++p) {
        std::vector<double> nx(1, 0.0);
        if (tpoly.size() > 1) {
            nx.assign(tpoly.size() - 1, 0.0);
            for (size_t j = 1; j < tpoly.size(); ++j) nx[j - 1] = tpoly[j] * double(j);
        }
        tpoly = nx;
        scale /= w;
        std::vector<double> scaled = nx;
        for (double& c : scaled) c *= scale;
        dpolys_.push_back(scaled);
    }
}

double Excision::eval_poly(int p, double t) const {
    if (p >= int(dpolys_.size())) return 0.0;
    const auto& c = dpolys_[p];
    double v = 0.0;
    for (size_t j = c.size(); j-- > 0;) v = v * t + c[j];
    return v;
}

double Excision::deriv(int p, double r) const {
    if (r >= hi_) return p == 0 ? 1.0 : 0.0;
    if (r <= lo_) return 0.0;
    return eval_poly(p, (r - lo_) / (hi_ - lo_));
}

double Excision::tail_integral(int pow) const {
    if (pow >= -1) throw std::domain_error("excision: divergent radial tail");
    return -std::pow(hi_, pow + 1) / double(pow + 1);
}

double Excision::transition_integral(int pow, const std::vector<int>& derivs) const {
    std::vector<int> key = derivs;
    std::sort(key.begin(), key.end());
    auto it = cache_.find({pow, key});
    if (it != cache_.end()) return it->second;

    const auto& gl = GaussLegendre::get();
    const double a = lo_, b = hi_;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < GaussLegendre::GL_POINTS; ++i) {
        double r = mid + half * gl.node[i];
        double v = std::pow(r, double(pow));
        for (int p : key) v *= deriv(p, r);
        acc += gl.weight[i] * v;
    }
    acc *= half;
    cache_[{pow, key}] = acc;
    return acc;
}

double Excision::integral(int pow, const std::vector<int>& derivs) const {
    bool pure_profile = true;
    for (int p : derivs)
        if (p >= 1) pure_profile = false;
    double acc = transition_integral(pow, derivs);
    if (pure_profile) acc += tail_integral(pow);  // profile == 1 beyond hi
    return acc;
}

}  // namespace gindex
