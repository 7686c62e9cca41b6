#pragma once

#include <vector>

#include "egorov/phase_flow.hpp"
#include "egorov/spectral.hpp"

namespace egorov {

/// Right-hand side of the projected symbol evolution da/dt = P{h, a}_Sigma on a periodic
/// coarse grid. With the anharmonic bump the V part is replaced by its exact Moyal multiplier
/// (i/eps)[V(q - eps k/2) - V(q + eps k/2)] in the p-Fourier variable k, so the evolution stays
/// the exact symbol of the Heisenberg equation.
class SymbolEvolution {
public:
    SymbolEvolution(const ModelSpec& m, const PhaseGrid& g);

    SymbolField rhs(const SymbolField& a) const;
    /// Upper bound for the modulus of the generator's spectrum (used for the step-size check).
    double rate_bound() const { return rate_; }
    const PhaseGrid& grid() const { return grid_; }

private:
    ModelSpec transport_;  // model with the bump removed
    PhaseGrid grid_;
    Eigen::MatrixXcd theta_;
    bool moyal_ = false;
    double rate_ = 0.0;
};

/// a(t) from a(0) with classical RK4 at step <= dt. Throws NumericalError when dt violates the
/// stability bound of the spectral transport and DomainError outside harmonic-linear mode.
SymbolField exact_symbol_evolution(const ModelSpec& m, const SymbolField& a0, double t, double dt);

/// a(t_k) for increasing times t_k >= 0 along one integration.
std::vector<SymbolField> exact_symbol_trajectory(const ModelSpec& m, const SymbolField& a0,
                                                 const std::vector<double>& times, double dt);

} // namespace egorov
