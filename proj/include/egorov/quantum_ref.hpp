#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "egorov/weyl_grid.hpp"

namespace egorov {

/// Two spin components over the position grid, spin-major (index = sigma * N + j).
using SpinorState = CVector;

/// Full symbol h0 + eps (frak h0 + sqrt3 frak h.n) of a harmonic-linear model as a C1 field.
std::function<SpinSymbol(double, double)> hamiltonian_symbol(const ModelSpec& m);

/// Dense quantize_sigma(h) (no support check: h grows at the box edge by construction).
GridOperator build_hamiltonian(const ModelSpec& m, const Grid& g);

/// Dense spectral factorization H = V diag(E) V*, giving U(t) = e^{-iHt/eps} exactly in time.
class Propagator {
public:
    Propagator(const GridOperator& H, double eps);

    SpinorState propagate(const SpinorState& psi, double t) const;
    /// U(t)* A U(t)
    GridOperator heisenberg(const GridOperator& A, double t) const;
    GridOperator unitary(double t) const;
    const Eigen::VectorXd& eigenvalues() const { return E_; }
    const CMatrix& eigenvectors() const { return V_; }

private:
    Eigen::VectorXd E_;
    CMatrix V_;
    double eps_;
};

SpinorState propagate(const Propagator& P, const SpinorState& psi, double t);
GridOperator heisenberg_evolve(const Propagator& P, const GridOperator& A, double t);

/// Matrix-free H = T(P) + U(x) + c_p eps P + eps (a(x) + P b).sigma with FFT kinetic energy.
/// Agrees entry-wise with the dense Weyl quantization of the same symbol.
class GridHamiltonian : public LinearOperator {
public:
    GridHamiltonian(const Grid& g, std::function<double(double)> U, std::function<Vec3(double)> spin_q,
                    const Vec3& spin_p, double scalar_p, double eps);
    /// Harmonic-linear model (including the anharmonic bump).
    static GridHamiltonian from_model(const ModelSpec& m, const Grid& g);

    Eigen::Index size() const override { return 2 * N_; }
    void apply(const CVector& x, CVector& y) const override;
    void apply_adjoint(const CVector& x, CVector& y) const override { apply(x, y); }
    bool hermitian() const override { return true; }
    /// Guaranteed enclosure [lo, hi] of the spectrum.
    std::pair<double, double> spectral_bounds() const { return {lo_, hi_}; }
    double eps() const { return eps_; }

private:
    int N_;
    Eigen::VectorXd T_, P_, U_;
    Eigen::Matrix3Xd a_;
    Vec3 b_;
    double cp_, eps_;
    double lo_ = 0.0, hi_ = 0.0;
};

/// e^{-iHt/eps} psi by a Chebyshev expansion with Bessel coefficients.
class ChebyshevPropagator {
public:
    ChebyshevPropagator(std::shared_ptr<const LinearOperator> H, double emin, double emax, double eps,
                        double tol = 1e-14);
    explicit ChebyshevPropagator(std::shared_ptr<const GridHamiltonian> H, double tol = 1e-14);

    void apply(const CVector& psi, double t, CVector& out) const;
    SpinorState propagate(const SpinorState& psi, double t) const;
    /// Number of Chebyshev terms needed for time t.
    int terms(double t) const;

private:
    std::shared_ptr<const LinearOperator> H_;
    double centre_, radius_, eps_, tol_;
};

/// Bessel values J_0..J_kmax(z) for z >= 0 by normalized backward recurrence.
std::vector<double> bessel_j_sequence(double z, int kmax);

/// x -> U(t)* A U(t) x - B x (Hermitian when A and B are).
class HeisenbergDifference : public LinearOperator {
public:
    HeisenbergDifference(std::shared_ptr<const ChebyshevPropagator> U, std::shared_ptr<const LinearOperator> A,
                         std::shared_ptr<const LinearOperator> B, double t);
    Eigen::Index size() const override { return A_->size(); }
    void apply(const CVector& x, CVector& y) const override;
    void apply_adjoint(const CVector& x, CVector& y) const override;
    bool hermitian() const override { return A_->hermitian() && (!B_ || B_->hermitian()); }

private:
    std::shared_ptr<const ChebyshevPropagator> U_;
    std::shared_ptr<const LinearOperator> A_, B_;
    double t_;
};

/// Gaussian wave packet of width^2 = eps/2 at (q0, p0) times the spinor with unit Bloch vector s.
SpinorState coherent_state(const Grid& g, double q0, double p0, const Vec3& bloch);

/// <psi| A |psi>
cplx expectation(const LinearOperator& A, const SpinorState& psi);

} // namespace egorov
