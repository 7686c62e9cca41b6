#pragma once

#include <array>
#include <functional>
#include <numbers>
#include <vector>

#include "egorov/linear_operator.hpp"
#include "egorov/phase_flow.hpp"
#include "egorov/spectral.hpp"

namespace egorov {

/// Position grid x_j = -L + j 2L/N (N a power of two, N >= 64) with the eps-dual momentum
/// grid p_m = m pi eps / L, m in [-N/2, N/2).
struct Grid {
    int N = 256;
    double L = 8.0;
    double eps = 0.1;

    Grid() = default;
    Grid(int n, double l, double e);

    double dx() const { return 2.0 * L / N; }
    double dp() const { return std::numbers::pi * eps / L; }
    double p_max() const { return 0.5 * N * dp(); }
    double x(int j) const { return -L + j * dx(); }
    /// Momentum of FFT index k (signed frequency, Nyquist mapped to -p_max).
    double p_of_fft(int k) const;
    /// Phase grid of the midpoints (2N half-grid positions) times the N dual momenta.
    PhaseGrid dual() const { return {2 * N, N, L, p_max()}; }

    /// Smallest power-of-two grid with box L whose momentum range reaches p_needed.
    static Grid for_support(double L, double p_needed, double eps, int min_n = 64);
};

/// Dense 2N x 2N operator in spin-major layout: index = sigma * N + j.
using GridOperator = CMatrix;

/// Weyl quantization of a scalar symbol sampled on grid.dual(): K[j,k] = (1/N) sum_m f((x_j+x_k)/2, p_m) e^{2 pi i m (j-k)/N}.
CMatrix weyl_quantize_scalar(const Eigen::MatrixXcd& f_dual, const Grid& g);
/// Same with the symbol given as a function of (q, p).
CMatrix weyl_quantize_scalar(const std::function<cplx(double, double)>& f, const Grid& g);

/// Op_Sigma of a C1 field sampled on grid.dual(). Throws DomainError on grid mismatch or support leakage.
GridOperator quantize_sigma(const SymbolField& a, const Grid& g);
GridOperator quantize_sigma(const std::function<SpinSymbol(double, double)>& a, const Grid& g);

/// Left inverse of quantize_sigma for symbols supported in |q| < L/2, |p| < p_max/2.
SymbolField wigner_transform(const GridOperator& A, const Grid& g);

/// Banded quantization of a smooth field given on a coarse PhaseGrid with Lq = grid.L and Lp <= p_max.
/// Kernel entries K[j, j-s] with |s| <= bandwidth; ncomp = 1 (scalar, field comp[0]) or 4 (spin).
class BandedOperator : public LinearOperator {
public:
    BandedOperator(const SymbolField& a, const Grid& g, bool spin = true, double tol = 1e-15);

    Eigen::Index size() const override { return spin_ ? 2 * N_ : N_; }
    void apply(const CVector& x, CVector& y) const override;
    void apply_adjoint(const CVector& x, CVector& y) const override;
    bool hermitian() const override { return herm_; }
    int bandwidth() const { return B_; }
    /// Estimated operator norm of the dropped kernel entries.
    double truncation() const { return trunc_; }
    CMatrix to_dense() const;

private:
    void apply_impl(const CVector& x, CVector& y, bool adjoint) const;
    int N_ = 0;
    int B_ = 0;
    double trunc_ = 0.0;
    bool spin_ = true;
    bool herm_ = false;
    // blocks_[2 r + c](j, s + B) = entry [j, j - s] of spin block (r, c) (block 0 only when scalar)
    std::array<CMatrix, 4> blocks_;
    std::array<bool, 4> nonzero_{};
};

/// Sum / difference of operators applied matrix-free (y = sum_i c_i A_i x).
class SumOperator : public LinearOperator {
public:
    void add(std::shared_ptr<const LinearOperator> op, cplx coeff);
    Eigen::Index size() const override;
    void apply(const CVector& x, CVector& y) const override;
    void apply_adjoint(const CVector& x, CVector& y) const override;
    bool hermitian() const override;

private:
    std::vector<std::pair<std::shared_ptr<const LinearOperator>, cplx>> terms_;
};

/// Pointwise value of the projected bracket P{h, a}_Sigma for a harmonic-linear model (possibly
/// with the anharmonic bump in its classical transport part) from a field and its spectral derivatives.
SymbolField sigma_bracket(const ModelSpec& m, const SymbolField& a);

/// ||(i/eps)[H, A] - Op{h,a}_Sigma|| and the same after adding back the eps Op{h1,(1-P)a} term.
/// Since Op_spin a = Op_spin Pa, the exact correction weight is eps; the eps/2 weighting is kept
/// as a diagnostic (it agrees with eps only when (1-P)a = 0).
struct CommutatorDefect {
    double defect_norm = 0.0;
    double corrected_defect_norm = 0.0;
    double half_corrected_defect_norm = 0.0;
    double reference_norm = 0.0;  ///< ||(i/eps)[H, A]|| for scale
};

/// Observable given as a general function on Sigma (not necessarily C1 in n).
using SigmaFunction = std::function<cplx(double q, double p, const Vec3& n)>;

/// Lemma-level check on a dense grid. `a` may carry arbitrary spin dependence; it is sampled
/// on grid.dual() times the sphere rule and projected.
CommutatorDefect commutator_defect(const ModelSpec& m, const SigmaFunction& a, const Grid& g,
                                   const SphereQuadrature& quad);

/// Scalar Hamiltonian h0(q,p) = p^2/2 + U(q) for the third-order Moyal check.
struct ScalarHamiltonian {
    std::function<double(double)> U;
    std::function<double(double)> dU;
};

/// ||[H0, A] + i eps Op{h0, a}|| for one eps on the given grid (matrix-free for large N).
double moyal_defect(const ScalarHamiltonian& h0, const std::function<double(double, double)>& a,
                    const std::function<double(double, double)>& a_q,
                    const std::function<double(double, double)>& a_p, const Grid& g);

} // namespace egorov
