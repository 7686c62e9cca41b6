#pragma once

#include <array>
#include <functional>

#include <Eigen/Dense>

#include "egorov/spin_weyl.hpp"

namespace egorov {

/// In-place batched complex FFT (FFTW, cached plans). sign = -1 forward, +1 backward, unnormalized.
void fft_many(cplx* data, int n, int howmany, int stride, int dist, int sign);

/// Periodic tensor grid on [-Lq, Lq) x [-Lp, Lp) with nodes q_i = -Lq + i 2Lq/Nq.
struct PhaseGrid {
    int Nq = 64;
    int Np = 64;
    double Lq = 7.0;
    double Lp = 7.0;

    double dq() const { return 2.0 * Lq / Nq; }
    double dp() const { return 2.0 * Lp / Np; }
    double q(int i) const { return -Lq + i * dq(); }
    double p(int j) const { return -Lp + j * dp(); }
    /// Signed angular wavenumber of FFT index k along q (resp. p).
    double kq(int k) const;
    double kp(int k) const;
    bool same_as(const PhaseGrid& o) const;

    static PhaseGrid square(int n, double L) { return {n, n, L, L}; }
};

/// C1-valued symbol sampled on a PhaseGrid: comp[0] = a0(q,p), comp[1..3] = frak a(q,p).
/// Matrices are indexed (q index, p index).
struct SymbolField {
    PhaseGrid grid;
    std::array<Eigen::MatrixXcd, 4> comp;

    static SymbolField zeros(const PhaseGrid& g);
    static SymbolField sample(const PhaseGrid& g, const std::function<SpinSymbol(double, double)>& f);

    SpinSymbol at(int i, int j) const;
    void set(int i, int j, const SpinSymbol& s);

    SymbolField& operator+=(const SymbolField& o);
    SymbolField& operator-=(const SymbolField& o);
    SymbolField& operator*=(cplx s);
    SymbolField operator+(const SymbolField& o) const { SymbolField r = *this; r += o; return r; }
    SymbolField operator-(const SymbolField& o) const { SymbolField r = *this; r -= o; return r; }
    SymbolField operator*(cplx s) const { SymbolField r = *this; r *= s; return r; }

    /// Largest coefficient modulus over the grid.
    double sup_norm() const;
    /// Largest modulus on the outer rim of width `rim` nodes (support/leakage diagnostic).
    double boundary_mass(int rim = 2) const;
    /// Spectral evaluation of the trigonometric interpolant at an arbitrary point.
    SpinSymbol interpolate(double q, double p) const;
};

/// Spectral derivatives of a periodic grid function.
Eigen::MatrixXcd d_dq(const Eigen::MatrixXcd& f, const PhaseGrid& g);
Eigen::MatrixXcd d_dp(const Eigen::MatrixXcd& f, const PhaseGrid& g);

/// Applies a multiplier m(i, k) in the p-Fourier domain: F_p^{-1}[m(i,k) F_p f(i, .)](j).
Eigen::MatrixXcd apply_p_multiplier(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& mult);

} // namespace egorov
