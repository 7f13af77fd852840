#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gindex {

// An angle on the circle, kept as 2*pi*(num/den) + extra so that rational
// rotations compose exactly and irrational ones ride along as a double
// residue.  Comparisons are exact on the rational part and 1e-12 on the rest.
struct Angle {
    long long num = 0;
    long long den = 1;
    double extra = 0.0;

    Angle() = default;
    Angle(long long n, long long d, double e = 0.0) : num(n), den(d), extra(e) { normalize(); }
    static Angle from_radians(double r) { return Angle(0, 1, r); }
    static Angle zero() { return Angle(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("angle: zero denominator");
        if (den < 0) { den = -den; num = -num; }
        long long g = std::gcd(std::llabs(num), den);
        if (g > 1) { num /= g; den /= g; }
        num %= den;
        if (num < 0) num += den;
        extra = std::remainder(extra, 2.0 * M_PI);
    }

    double radians() const { return 2.0 * M_PI * double(num) / double(den) + extra; }
    bool is_rational() const { return extra == 0.0; }

    Angle operator+(const Angle& o) const {
        long long d = std::lcm(den, o.den);
        return Angle(num * (d / den) + o.num * (d / o.den), d, extra + o.extra);
    }
    Angle operator-() const { return Angle(-num, den, -extra); }
    Angle operator-(const Angle& o) const { return *this + (-o); }
    Angle times(long long s) const { return Angle(num * s, den, extra * double(s)); }

    bool near_zero(double tol = 1e-12) const {
        if (num == 0) return std::abs(std::remainder(extra, 2.0 * M_PI)) <= tol;
        return std::abs(std::remainder(radians(), 2.0 * M_PI)) <= tol;
    }
    bool equals(const Angle& o, double tol = 1e-12) const { return (*this - o).near_zero(tol); }

    std::string str() const;
};

inline std::string Angle::str() const {
    std::string s;
    if (num != 0) s += std::to_string(num) + "/" + std::to_string(den) + " of 2pi";
    if (extra != 0.0) {
        if (!s.empty()) s += " + ";
        s += std::to_string(extra) + " rad";
    }
    if (s.empty()) s = "0";
    return s;
}

}  // namespace gindex
