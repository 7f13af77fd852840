#pragma once

#include <complex>
#include <map>

namespace gindex {

// Truncated Laurent polynomial in h: coefficients for exponents in
// [lowest, highest]; used for localized traces and indices.
struct HLaurent {
    std::map<int, std::complex<double>> coeff;

    std::complex<double> at(int j) const {
        auto it = coeff.find(j);
        return it == coeff.end() ? std::complex<double>(0.0) : it->second;
    }
    void add(int j, std::complex<double> c) {
        if (std::abs(c) == 0.0) return;
        coeff[j] += c;
    }
    HLaurent operator+(const HLaurent& o) const {
        HLaurent r = *this;
        for (const auto& [j, c] : o.coeff) r.add(j, c);
        return r;
    }
    HLaurent operator-(const HLaurent& o) const {
        HLaurent r = *this;
        for (const auto& [j, c] : o.coeff) r.add(j, -c);
        return r;
    }
    void prune(double tol = 1e-12) {
        for (auto it = coeff.begin(); it != coeff.end();)
            it = (std::abs(it->second) < tol) ? coeff.erase(it) : std::next(it);
    }
    double max_abs() const {
        double m = 0.0;
        for (const auto& [j, c] : coeff) m = std::max(m, std::abs(c));
        return m;
    }
    // Largest |coefficient| away from exponent 0.
    double max_nonconstant() const {
        double m = 0.0;
        for (const auto& [j, c] : coeff)
            if (j != 0) m = std::max(m, std::abs(c));
        return m;
    }
    std::complex<double> evaluate(double h) const {
        std::complex<double> acc = 0.0;
        for (const auto& [j, c] : coeff) acc += c * std::pow(h, double(j));
        return acc;
    }
};

}  // namespace gindex
