#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gindex/angle.hpp"

namespace gindex {

using IntMat = std::array<std::array<int, 2>, 2>;  // row-major; n = 1 uses [0][0]

IntMat imat_identity(int n);
IntMat imat_mul(int n, const IntMat& a, const IntMat& b);
IntMat imat_transpose(int n, const IntMat& a);
int imat_det(int n, const IntMat& a);
bool is_signed_permutation(int n, const IntMat& a);

// Affine torus map x -> Ax + b with signed-permutation linear part, lifted to
// the homogeneous canonical transformation C(x, xi) = (Ax + b, A^{-T} xi).
class AffineCanonical {
public:
    AffineCanonical() : n_(1), A_(imat_identity(1)) {}
    AffineCanonical(int n, const IntMat& A, const std::array<Angle, 2>& b);

    int dim() const { return n_; }
    const IntMat& A() const { return A_; }
    const std::array<Angle, 2>& b() const { return b_; }

    // A^{-1} = A^T for signed permutations.
    AffineCanonical inverse() const;
    AffineCanonical compose(const AffineCanonical& o) const;  // this after o
    bool equals(const AffineCanonical& o, double tol = 1e-12) const;
    bool is_identity(double tol = 1e-12) const;

    // Apply the linear part / its inverse-transpose to an integer vector.
    std::array<int, 2> apply_A_T(const std::array<int, 2>& k) const;      // A^T k
    std::array<int, 2> apply_A_invT(const std::array<int, 2>& k) const;   // A^{-T} k
    std::array<double, 2> apply_base(const std::array<double, 2>& x) const;
    std::array<double, 2> apply_fiber(const std::array<double, 2>& xi) const;

    // <k, b> as an Angle (k integer).
    Angle pairing(const std::array<int, 2>& k) const;

    std::string describe() const;

private:
    int n_;
    IntMat A_;
    std::array<Angle, 2> b_{Angle::zero(), Angle::zero()};
};

// Fixed-point data of the lifted map on T*_0 T^n.  The fixed covector space
// V = ker(I - A^T) equals ker(I - A) for this map class; the base components
// solve (I - A)x = b mod 2pi.
struct FixedPointSet {
    bool empty = true;               // no nonzero fixed covector or no base point
    int f = 0;                       // dim V (= dim of each base component)
    int dim_fixed = 0;               // 2f when nonempty
    double det_B = 0.0;              // |det (I - A)| restricted to V-perp (1 when f = n)
    // Primitive integer direction(s) of V (f = 1) and its covolume in the
    // integer lattice; for f = n the lattice is Z^n with covolume 1.
    std::array<int, 2> v_primitive{0, 0};
    double covol = 1.0;
    int base_components = 0;
    std::vector<std::array<double, 2>> component_basepoints;
    // Verified clean-intersection identity: dim ker(I - dC) == dim_fixed.
    bool clean = true;
};

class GroupStructure;

// Group element handle: index into the enumerated ball.
struct FPCache;

class GroupStructure {
public:
    // Enumerates the ball of words up to `word_radius` over the generators
    // and their inverses; throws when the ball exceeds `element_cap`.
    GroupStructure(int n, const std::vector<AffineCanonical>& generators,
                   const std::vector<std::string>& names, int word_radius,
                   int element_cap = 4096);

    int dim() const { return n_; }
    int size() const { return int(elems_.size()); }
    int identity() const { return 0; }
    const AffineCanonical& element(int i) const { return elems_.at(i); }
    const std::string& name(int i) const { return names_.at(i); }
    int word_length(int i) const { return wordlen_.at(i); }

    // -1 when the product leaves the ball.
    int mul(int i, int j) const { return mul_.at(i).at(j); }
    int inv(int i) const { return inv_.at(i); }
    std::optional<int> find(const AffineCanonical& g) const;
    int require(const std::string& name) const;  // lookup by name, throws

    // Conjugacy classes within the ball (equivalence closure of in-ball
    // conjugation; exact for the finite/abelian scenarios shipped).
    const std::vector<std::vector<int>>& conjugacy_classes() const { return classes_; }
    int class_of(int i) const { return class_of_.at(i); }
    bool same_class(int i, int j) const { return class_of_.at(i) == class_of_.at(j); }

    bool torsion(int i) const { return torsion_.at(i); }
    // Order when torsion; nullopt otherwise.
    std::optional<long long> element_order(int i) const;

    const FixedPointSet& fixed_point_set(int i) const;

private:
    int n_;
    std::vector<AffineCanonical> elems_;
    std::vector<std::string> names_;
    std::vector<int> wordlen_;
    std::vector<std::vector<int>> mul_;
    std::vector<int> inv_;
    std::vector<std::vector<int>> classes_;
    std::vector<int> class_of_;
    std::vector<bool> torsion_;
    std::vector<long long> order_;
    mutable std::vector<std::optional<FixedPointSet>> fp_;

    void compute_structure();
};

FixedPointSet compute_fixed_point_set(const AffineCanonical& g);

// Solve (A^T - I) j = kappa over the integers. Returns nullopt when
// unsolvable; otherwise one solution j0.
std::optional<std::array<int, 2>> solve_twisted_mode(const AffineCanonical& g,
                                                     const std::array<int, 2>& kappa);

}  // namespace gindex
