#include "gindex/group.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gindex {

IntMat imat_identity(int n) {
    IntMat m{{{1, 0}, {0, 1}}};
    if (n == 1) m[1][1] = 1;
    return m;
}

IntMat imat_mul(int n, const IntMat& a, const IntMat& b) {
    IntMat r{{{0, 0}, {0, 0}}};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) r[i][j] += a[i][k] * b[k][j];
    if (n == 1) r[1][1] = 1;
    return r;
}

IntMat imat_transpose(int n, const IntMat& a) {
    IntMat r = a;
    if (n == 2) std::swap(r[0][1], r[1][0]);
    return r;
}

int imat_det(int n, const IntMat& a) {
    return (n == 1) ? a[0][0] : a[0][0] * a[1][1] - a[0][1] * a[1][0];
}

bool is_signed_permutation(int n, const IntMat& a) {
    for (int i = 0; i < n; ++i) {
        int nz = 0;
        for (int j = 0; j < n; ++j) {
            int v = a[i][j];
            if (v != 0 && v != 1 && v != -1) return false;
            if (v != 0) ++nz;
        }
        if (nz != 1) return false;
    }
    for (int j = 0; j < n; ++j) {
        int nz = 0;
        for (int i = 0; i < n; ++i)
            if (a[i][j] != 0) ++nz;
        if (nz != 1) return false;
    }
    return true;
}

AffineCanonical::AffineCanonical(int n, const IntMat& A, const std::array<Angle, 2>& b)
    : n_(n), A_(A), b_(b) {
    if (n != 1 && n != 2) throw std::invalid_argument("affine map: n must be 1 or 2");
    if (!is_signed_permutation(n, A))
        throw std::invalid_argument("affine map: linear part must be a signed permutation");
    if (n == 1) b_[1] = Angle::zero();
}

AffineCanonical AffineCanonical::inverse() const {
    IntMat At = imat_transpose(n_, A_);  // = A^{-1}
    std::array<Angle, 2> nb{Angle::zero(), Angle::zero()};
    // -A^{-1} b
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (At[i][j] != 0) nb[i] = nb[i] + b_[j].times(-At[i][j]);
    return AffineCanonical(n_, At, nb);
}

AffineCanonical AffineCanonical::compose(const AffineCanonical& o) const {
    // (this o o)(x) = A (A_o x + b_o) + b
    IntMat A = imat_mul(n_, A_, o.A_);
    std::array<Angle, 2> b{Angle::zero(), Angle::zero()};
    for (int i = 0; i < n_; ++i) {
        b[i] = b_[i];
        for (int j = 0; j < n_; ++j)
            if (A_[i][j] != 0) b[i] = b[i] + o.b_[j].times(A_[i][j]);
    }
    return AffineCanonical(n_, A, b);
}

bool AffineCanonical::equals(const AffineCanonical& o, double tol) const {
    if (n_ != o.n_ || !(A_ == o.A_)) return false;
    for (int i = 0; i < n_; ++i)
        if (!b_[i].equals(o.b_[i], tol)) return false;
    return true;
}

bool AffineCanonical::is_identity(double tol) const {
    return equals(AffineCanonical(n_, imat_identity(n_), {Angle::zero(), Angle::zero()}), tol);
}

std::array<int, 2> AffineCanonical::apply_A_T(const std::array<int, 2>& k) const {
    IntMat At = imat_transpose(n_, A_);
    return {At[0][0] * k[0] + At[0][1] * k[1], n_ == 2 ? At[1][0] * k[0] + At[1][1] * k[1] : 0};
}

std::array<int, 2> AffineCanonical::apply_A_invT(const std::array<int, 2>& k) const {
    // A^{-T} = A for signed permutations.
    return {A_[0][0] * k[0] + A_[0][1] * k[1], n_ == 2 ? A_[1][0] * k[0] + A_[1][1] * k[1] : 0};
}

std::array<double, 2> AffineCanonical::apply_base(const std::array<double, 2>& x) const {
    std::array<double, 2> r{0, 0};
    for (int i = 0; i < n_; ++i) {
        r[i] = b_[i].radians();
        for (int j = 0; j < n_; ++j) r[i] += A_[i][j] * x[j];
        r[i] = std::remainder(r[i], 2.0 * M_PI);
    }
    return r;
}

std::array<double, 2> AffineCanonical::apply_fiber(const std::array<double, 2>& xi) const {
    std::array<double, 2> r{0, 0};
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) r[i] += A_[i][j] * xi[j];  // A^{-T} = A
    return r;
}

Angle AffineCanonical::pairing(const std::array<int, 2>& k) const {
    Angle a = Angle::zero();
    for (int i = 0; i < n_; ++i)
        if (k[i] != 0) a = a + b_[i].times(k[i]);
    return a;
}

std::string AffineCanonical::describe() const {
    std::ostringstream os;
    os << "A=[";
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) os << A_[i][j] << (j + 1 < n_ ? "," : "");
        os << (i + 1 < n_ ? ";" : "");
    }
    os << "] b=(";
    for (int i = 0; i < n_; ++i) os << b_[i].str() << (i + 1 < n_ ? ", " : "");
    os << ")";
    return os.str();
}

namespace {

// Smith-type reduction for the 2x2 (or 1x1) integer system M y = c mod 2pi:
// returns diagonal entries and the transformed right-hand side, with the
// change of basis V such that x = V^{-1} y ... we only need solvability,
// solution count and representative solutions, so we perform integer row
// and column operations tracking the column operations for back-substitution.
struct SnfResult {
    int n;
    std::array<long long, 2> d{0, 0};        // diagonal
    std::array<Angle, 2> c{};                // transformed rhs (row ops applied)
    IntMat colops = imat_identity(2);        // x = colops * y
};

SnfResult smith_solve(int n, const IntMat& Min, const std::array<Angle, 2>& bin) {
    SnfResult r;
    r.n = n;
    long long M[2][2] = {{Min[0][0], Min[0][1]}, {Min[1][0], Min[1][1]}};
    std::array<Angle, 2> c = bin;
    IntMat V = imat_identity(2);
    if (n == 1) {
        r.d[0] = M[0][0];
        r.c = c;
        return r;
    }
    auto row_swap = [&]() { std::swap(M[0][0], M[1][0]); std::swap(M[0][1], M[1][1]); std::swap(c[0], c[1]); };
    auto col_swap = [&]() {
        std::swap(M[0][0], M[0][1]);
        std::swap(M[1][0], M[1][1]);
        std::swap(V[0][0], V[0][1]);
        std::swap(V[1][0], V[1][1]);
    };
    auto row_add = [&](int dst, int src, long long f) {
        M[dst][0] += f * M[src][0];
        M[dst][1] += f * M[src][1];
        c[dst] = c[dst] + c[src].times(f);
    };
    auto col_add = [&](int dst, int src, long long f) {
        M[0][dst] += f * M[0][src];
        M[1][dst] += f * M[1][src];
        V[0][dst] += int(f) * V[0][src];
        V[1][dst] += int(f) * V[1][src];
    };
    // Bring to diagonal form by gcd elimination (entries stay tiny here).
    for (int it = 0; it < 64; ++it) {
        if (M[0][0] == 0) {
            if (M[1][0] != 0) row_swap();
            else if (M[0][1] != 0) col_swap();
            else if (M[1][1] != 0) { row_swap(); col_swap(); }
            else break;
            continue;
        }
        if (M[1][0] % M[0][0] == 0 && M[0][1] % M[0][0] == 0) {
            row_add(1, 0, -M[1][0] / M[0][0]);
            col_add(1, 0, -M[0][1] / M[0][0]);
            if (M[1][0] == 0 && M[0][1] == 0) break;
        } else if (std::llabs(M[1][0]) >= std::llabs(M[0][0]) && M[1][0] != 0) {
            row_add(1, 0, -(M[1][0] / M[0][0]));
        } else if (M[1][0] != 0) {
            row_swap();
        } else if (std::llabs(M[0][1]) >= std::llabs(M[0][0]) && M[0][1] != 0) {
            col_add(1, 0, -(M[0][1] / M[0][0]));
        } else if (M[0][1] != 0) {
            col_swap();
        }
    }
    r.d = {M[0][0], M[1][1]};
    r.c = c;
    r.colops = V;
    return r;
}

}  // namespace

FixedPointSet compute_fixed_point_set(const AffineCanonical& g) {
    FixedPointSet fp;
    const int n = g.dim();
    IntMat M = imat_identity(n);  // I - A
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M[i][j] -= g.A()[i][j];

    // V = ker(I - A) over Q; equals ker(I - A^T) since A is orthogonal.
    int f = 0;
    std::array<int, 2> v{0, 0};
    if (n == 1) {
        f = (M[0][0] == 0) ? 1 : 0;
        v = {1, 0};
    } else {
        bool zero = M[0][0] == 0 && M[0][1] == 0 && M[1][0] == 0 && M[1][1] == 0;
        if (zero) {
            f = 2;
        } else if (imat_det(2, M) != 0) {
            f = 0;
        } else {
            f = 1;
            // nonzero kernel vector of the rank-1 matrix
            if (M[0][0] != 0 || M[0][1] != 0) v = {-M[0][1], M[0][0]};
            else v = {-M[1][1], M[1][0]};
            int gcd = std::gcd(std::abs(v[0]), std::abs(v[1]));
            if (gcd > 1) { v[0] /= gcd; v[1] /= gcd; }
            if (v[0] < 0 || (v[0] == 0 && v[1] < 0)) { v[0] = -v[0]; v[1] = -v[1]; }
        }
    }
    fp.f = f;
    fp.v_primitive = v;
    fp.covol = (f == 1) ? std::hypot(double(v[0]), double(v[1])) : 1.0;

    if (f == 0) {
        // no nonzero fixed covector
        fp.empty = true;
        fp.det_B = std::abs(double(imat_det(n, M)));
        fp.dim_fixed = 0;
        return fp;
    }

    // Solve (I - A) x = b mod 2pi via integer diagonalization.
    SnfResult s = smith_solve(n, M, g.b());
    long long comps = 1;
    bool solvable = true;
    for (int i = 0; i < n; ++i) {
        if (s.d[i] == 0) {
            if (!s.c[i].near_zero()) solvable = false;
        } else {
            comps *= std::llabs(s.d[i]);
        }
    }
    fp.empty = !solvable;
    fp.base_components = solvable ? int(comps) : 0;
    fp.dim_fixed = solvable ? 2 * f : 0;

    if (f < n) {
        // |det B| with B = (I - A) restricted to V-perp.
        if (n == 1) {
            fp.det_B = std::abs(double(M[0][0]));
        } else if (f == 1) {
            // unit normal u = v_perp / |v|
            double vn = std::hypot(double(v[0]), double(v[1]));
            double u0 = -v[1] / vn, u1 = v[0] / vn;
            double Bu0 = M[0][0] * u0 + M[0][1] * u1;
            double Bu1 = M[1][0] * u0 + M[1][1] * u1;
            fp.det_B = std::abs(Bu0 * u0 + Bu1 * u1);
        }
    } else {
        fp.det_B = 1.0;
    }

    if (solvable) {
        // Representative base points: y_i = (c_i + 2pi t)/d_i, x = V y.
        std::vector<std::vector<double>> ycoords(n);
        for (int i = 0; i < n; ++i) {
            if (s.d[i] == 0) {
                ycoords[i] = {0.0};
            } else {
                long long d = s.d[i];
                for (long long t = 0; t < std::llabs(d); ++t)
                    ycoords[i].push_back((s.c[i].radians() + 2.0 * M_PI * double(t)) / double(d));
            }
        }
        for (double y0 : ycoords[0]) {
            if (n == 1) {
                fp.component_basepoints.push_back({std::remainder(y0, 2 * M_PI), 0.0});
            } else {
                for (double y1 : ycoords[1]) {
                    double x0 = s.colops[0][0] * y0 + s.colops[0][1] * y1;
                    double x1 = s.colops[1][0] * y0 + s.colops[1][1] * y1;
                    fp.component_basepoints.push_back(
                        {std::remainder(x0, 2 * M_PI), std::remainder(x1, 2 * M_PI)});
                }
            }
        }
    }

    // Clean-intersection check: dim ker(I - dC) = dim ker(I-A) + dim ker(I-A^T)
    // = 2f must equal the fixed-set dimension when nonempty.
    fp.clean = fp.empty || (fp.dim_fixed == 2 * f);
    return fp;
}

std::optional<std::array<int, 2>> solve_twisted_mode(const AffineCanonical& g,
                                                     const std::array<int, 2>& kappa) {
    const int n = g.dim();
    IntMat At = imat_transpose(n, g.A());
    IntMat M = At;  // A^T - I
    for (int i = 0; i < n; ++i) M[i][i] -= 1;
    // Solve M j = kappa over Z (tiny dimensions, same gcd elimination as above
    // but with an integer right-hand side).
    long long Mv[2][2] = {{M[0][0], M[0][1]}, {M[1][0], M[1][1]}};
    long long c[2] = {kappa[0], kappa[1]};
    long long V[2][2] = {{1, 0}, {0, 1}};
    if (n == 1) {
        if (Mv[0][0] == 0) return (c[0] == 0) ? std::optional<std::array<int, 2>>({0, 0}) : std::nullopt;
        if (c[0] % Mv[0][0] != 0) return std::nullopt;
        return std::optional<std::array<int, 2>>({int(c[0] / Mv[0][0]), 0});
    }
    auto row_swap = [&]() { std::swap(Mv[0][0], Mv[1][0]); std::swap(Mv[0][1], Mv[1][1]); std::swap(c[0], c[1]); };
    auto col_swap = [&]() {
        std::swap(Mv[0][0], Mv[0][1]);
        std::swap(Mv[1][0], Mv[1][1]);
        std::swap(V[0][0], V[0][1]);
        std::swap(V[1][0], V[1][1]);
    };
    auto row_add = [&](int dst, int src, long long fq) {
        Mv[dst][0] += fq * Mv[src][0];
        Mv[dst][1] += fq * Mv[src][1];
        c[dst] += fq * c[src];
    };
    auto col_add = [&](int dst, int src, long long fq) {
        Mv[0][dst] += fq * Mv[0][src];
        Mv[1][dst] += fq * Mv[1][src];
        V[0][dst] += fq * V[0][src];
        V[1][dst] += fq * V[1][src];
    };
    for (int it = 0; it < 64; ++it) {
        if (Mv[0][0] == 0) {
            if (Mv[1][0] != 0) row_swap();
            else if (Mv[0][1] != 0) col_swap();
            else if (Mv[1][1] != 0) { row_swap(); col_swap(); }
            else break;
            continue;
        }
        if (Mv[1][0] % Mv[0][0] == 0 && Mv[0][1] % Mv[0][0] == 0) {
            row_add(1, 0, -Mv[1][0] / Mv[0][0]);
            col_add(1, 0, -Mv[0][1] / Mv[0][0]);
            if (Mv[1][0] == 0 && Mv[0][1] == 0) break;
        } else if (std::llabs(Mv[1][0]) >= std::llabs(Mv[0][0]) && Mv[1][0] != 0) {
            row_add(1, 0, -(Mv[1][0] / Mv[0][0]));
        } else if (Mv[1][0] != 0) {
            row_swap();
        } else if (std::llabs(Mv[0][1]) >= std::llabs(Mv[0][0]) && Mv[0][1] != 0) {
            col_add(1, 0, -(Mv[0][1] / Mv[0][0]));
        } else if (Mv[0][1] != 0) {
            col_swap();
        }
    }
    long long y[2] = {0, 0};
    for (int i = 0; i < 2; ++i) {
        long long d = Mv[i][i];
        if (d == 0) {
            if (c[i] != 0) return std::nullopt;
            y[i] = 0;
        } else {
            if (c[i] % d != 0) return std::nullopt;
            y[i] = c[i] / d;
        }
    }
    return std::optional<std::array<int, 2>>(
        {int(V[0][0] * y[0] + V[0][1] * y[1]), int(V[1][0] * y[0] + V[1][1] * y[1])});
}

GroupStructure::GroupStructure(int n, const std::vector<AffineCanonical>& generators,
                               const std::vector<std::string>& names, int word_radius,
                               int element_cap)
    : n_(n) {
    AffineCanonical id(n, imat_identity(n), {Angle::zero(), Angle::zero()});
    elems_.push_back(id);
    names_.push_back("e");
    wordlen_.push_back(0);

    std::vector<AffineCanonical> gens;
    std::vector<std::string> gnames;
    for (size_t i = 0; i < generators.size(); ++i) {
        gens.push_back(generators[i]);
        gnames.push_back(i < names.size() ? names[i] : "g" + std::to_string(i));
        gens.push_back(generators[i].inverse());
        gnames.push_back(gnames.back() + "^-1");
    }

    std::deque<int> frontier{0};
    while (!frontier.empty()) {
        int cur = frontier.front();
        frontier.pop_front();
        if (wordlen_[cur] >= word_radius) continue;
        for (size_t gi = 0; gi < gens.size(); ++gi) {
            AffineCanonical cand = gens[gi].compose(elems_[cur]);
            bool known = false;
            for (const auto& e : elems_)
                if (e.equals(cand)) { known = true; break; }
            if (known) continue;
            if (int(elems_.size()) >= element_cap)
                throw std::runtime_error(
                    "group ball exceeds element cap; raise the cap or shrink the radius");
            elems_.push_back(cand);
            names_.push_back(wordlen_[cur] == 0 ? gnames[gi] : gnames[gi] + "*" + names_[cur]);
            wordlen_.push_back(wordlen_[cur] + 1);
            frontier.push_back(int(elems_.size()) - 1);
        }
    }
    compute_structure();
}

void GroupStructure::compute_structure() {
    const int m = size();
    mul_.assign(m, std::vector<int>(m, -1));
    inv_.assign(m, -1);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            AffineCanonical p = elems_[i].compose(elems_[j]);
            for (int t = 0; t < m; ++t)
                if (elems_[t].equals(p)) { mul_[i][j] = t; break; }
        }
        AffineCanonical iv = elems_[i].inverse();
        for (int t = 0; t < m; ++t)
            if (elems_[t].equals(iv)) { inv_[i] = t; break; }
        if (inv_[i] < 0)
            throw std::runtime_error("group ball not closed under inverses");
    }

    // conjugacy classes: closure of in-ball conjugation
    class_of_.assign(m, -1);
    for (int i = 0; i < m; ++i) {
        if (class_of_[i] >= 0) continue;
        int cid = int(classes_.size());
        classes_.push_back({});
        std::deque<int> todo{i};
        class_of_[i] = cid;
        while (!todo.empty()) {
            int x = todo.front();
            todo.pop_front();
            classes_[cid].push_back(x);
            for (int h = 0; h < m; ++h) {
                AffineCanonical conj =
                    elems_[h].compose(elems_[x]).compose(elems_[inv_[h]]);
                for (int t = 0; t < m; ++t)
                    if (elems_[t].equals(conj)) {
                        if (class_of_[t] < 0) {
                            class_of_[t] = cid;
                            todo.push_back(t);
                        }
                        break;
                    }
            }
        }
        std::sort(classes_[cid].begin(), classes_[cid].end());
    }

    // torsion: order of A is <= 24 for signed permutations of n <= 2; then the
    // accumulated translation must be a rational angle.
    torsion_.assign(m, false);
    order_.assign(m, -1);
    for (int i = 0; i < m; ++i) {
        AffineCanonical p = elems_[i];
        int r = 1;
        while (!(p.A() == imat_identity(n_)) && r <= 24) {
            p = p.compose(elems_[i]);
            ++r;
        }
        if (!(p.A() == imat_identity(n_))) continue;  // cannot happen for this class
        // p = g^r has A = I and translation t; g torsion iff t is rational.
        bool rational = true;
        long long lcm_den = 1;
        for (int c = 0; c < n_; ++c) {
            const Angle& a = p.b()[c];
            if (std::abs(a.extra) > 1e-12) { rational = false; break; }
            lcm_den = std::lcm(lcm_den, a.num == 0 ? 1 : a.den);
        }
        if (rational) {
            torsion_[i] = true;
            order_[i] = (long long)(r)*lcm_den;
        }
    }
    fp_.assign(m, std::nullopt);
}

std::optional<int> GroupStructure::find(const AffineCanonical& g) const {
    for (int i = 0; i < size(); ++i)
        if (elems_[i].equals(g)) return i;
    return std::nullopt;
}

int GroupStructure::require(const std::string& nm) const {
    for (int i = 0; i < size(); ++i)
        if (names_[i] == nm) return i;
    throw std::invalid_argument("unknown group element name: " + nm);
}

std::optional<long long> GroupStructure::element_order(int i) const {
    if (!torsion_.at(i)) return std::nullopt;
    return order_.at(i);
}

const FixedPointSet& GroupStructure::fixed_point_set(int i) const {
    if (!fp_.at(i)) fp_[i] = compute_fixed_point_set(elems_.at(i));
    return *fp_[i];
}

}  // namespace gindex
