#pragma once

#include <Eigen/Sparse>
#include <map>
#include <vector>

#include "gindex/gsymbol.hpp"
#include "gindex/hlaurent.hpp"

namespace gindex {

using SpMat = Eigen::SparseMatrix<cplx>;

// Finite section of mode space: Fourier modes |k|_inf <= K of T^n.
struct ModeSpace {
    int n = 1;
    int K = 16;
    int side() const { return 2 * K + 1; }
    int dimension() const { return n == 1 ? side() : side() * side(); }
    int index(const std::array<int, 2>& k) const {
        return n == 1 ? k[0] + K : (k[0] + K) * side() + (k[1] + K);
    }
    std::array<int, 2> mode(int idx) const {
        if (n == 1) return {idx - K, 0};
        return {idx / side() - K, idx % side() - K};
    }
    bool contains(const std::array<int, 2>& k) const {
        return std::abs(k[0]) <= K && (n == 1 || std::abs(k[1]) <= K);
    }
};

// Torus Kohn-Nirenberg quantization: matrix element (m, k) = sum_j h^j
// a_j^(m-k; hk) with the excision profile evaluated at |hk|.
SpMat quantize(const SemiclassicalSymbol& a, double h, const ModeSpace& ms,
               const Excision& chi);

// Pullback operator (Phi_g u)(x) = u(g^{-1} x): e_k -> phase * e_{A^{-T} k}.
SpMat shift_matrix(const AffineCanonical& g, const ModeSpace& ms);

// Phi_g M Phi_g^{-1} (exact permutation-with-phase conjugation).
SpMat conjugate_by_shift(const AffineCanonical& g, const SpMat& M, const ModeSpace& ms);

// Finitely supported family g -> matrix representing  sum_g M_g Phi_g.
struct GOperator {
    const GroupStructure* grp = nullptr;
    ModeSpace ms;
    std::map<int, SpMat> pieces;

    static GOperator identity(const GroupStructure* grp, const ModeSpace& ms);
    GOperator mul(const GOperator& o) const;
    GOperator sub_from_identity() const;  // 1 - this
};

GOperator quantize_gop(const GSymbol& a, double h, const ModeSpace& ms, const Excision& chi);

// tr(M Phi_l) summed over the window |k|_inf <= Kw, plus the dropped-tail
// magnitude between Kw and the full section.
struct WindowTrace {
    cplx value{0.0};
    double tail = 0.0;
};
WindowTrace trace_with_shift(const SpMat& M, const AffineCanonical& l, const ModeSpace& ms,
                             int Kw);

// Localized operator trace Tr_g of a quantized crossed-product family.
WindowTrace operator_trace_g(const GOperator& P, int g, int Kw);

// Fast path for tr(Op_h(a) Phi_l) without materializing the matrix.
cplx quantized_shift_trace(const SemiclassicalSymbol& a, const AffineCanonical& l, double h,
                           int K, const Excision& chi);

struct AnalyticIndexResult {
    cplx value{0.0};
    double tail = 0.0;  // combined dropped-tail bound of the two traces
};

// ind_g = Tr_g(1 - R D) - Tr_g(1 - D R) on the finite section, windowed.
AnalyticIndexResult analytic_index_g(const GSymbol& a, const GSymbol& r_N, int g, double h,
                                     const ModeSpace& ms, int Kw, const Excision& chi);

// || Phi_g Op(a) Phi_g^{-1} - Op(act(g, a)) ||_F  (upper bound on the
// spectral norm; expected at machine precision for this map class).
double egorov_residual(const GSymbol& ref, int g, const SemiclassicalSymbol& a, double h,
                       const ModeSpace& ms, const Excision& chi);

// Spectral norm via power iteration on the sparse matrix.
double spectral_norm(const SpMat& M, int iters = 60);

// || Op(a) Op(b) - Op(a*b) || at each h (K chosen as coverage/h).
struct CompositionSample {
    double h;
    int K;
    double residual;
};
std::vector<CompositionSample> composition_residual(const SemiclassicalSymbol& a,
                                                    const SemiclassicalSymbol& b,
                                                    const std::vector<double>& hs,
                                                    double coverage, int Kcap,
                                                    const Excision& chi);

struct HFitResult {
    std::vector<double> hs;
    HLaurent fitted;
    double residual_norm = 0.0;
    double slope = 0.0;        // log-log decay slope of the input magnitudes
    double slope_stderr = 0.0;
};

// Least-squares fit of sum_{jmin<=j<=jmax} c_j h^j through the samples.
HFitResult fit_h_expansion(const std::vector<std::pair<double, cplx>>& samples, int jmin,
                           int jmax);

// Log-log slope fit of magnitudes vs h.
HFitResult fit_decay_slope(const std::vector<std::pair<double, double>>& samples);

// Kernel / cokernel counts of the assembled operator via rectangular SVD
// restrictions (secondary cross-check; dense, use at moderate K).
struct SvdIndexResult {
    int dim_ker = 0;
    int dim_coker = 0;
    int index() const { return dim_ker - dim_coker; }
    double gap = 0.0;  // smallest singular value not counted as zero
};
SvdIndexResult svd_index(const GOperator& D, int Kw, double tol = 1e-6);

}  // namespace gindex
