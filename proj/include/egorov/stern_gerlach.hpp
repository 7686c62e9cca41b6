#pragma once

#include <array>

#include "egorov/phase_flow.hpp"
#include "egorov/spin_weyl.hpp"

namespace egorov {

/// Classical deflection and spin-averaged deflection moments in the Stern-Gerlach mode.
///
/// The force on q1 is eps (sqrt3/2) b'(q1) n3, so on the linear part of b the deflection is
/// dq1 = (1/2) eps t^2 (sqrt3/2) b' n3 = c sqrt3 n3 with c = eps t^2 b'/4, and its spin
/// quantization is c sigma3. Moments are Tr(rho (c sigma3)^m): c^m for even m, c^m s3 for odd m.
/// The *_literal fields carry the same quantities with c replaced by eps t^2 b'/2 (constant
/// acceleration without the 1/2 of the kinematics) for comparison.
struct SternGerlachReport {
    double eps = 0.0;
    double t = 0.0;
    double slope = 0.0;                ///< b'(q1(0))
    double deflection_flow = 0.0;      ///< dq1 for n3 = 1 from the flow
    double deflection_closed = 0.0;    ///< (1/2) eps t^2 (sqrt3/2) b'
    double deflection_literal = 0.0;   ///< eps t^2 (sqrt3/2) b'
    std::array<double, 5> moments_flow{};    ///< m = 0..4 from the flow and sphere quadrature
    std::array<double, 5> moments_closed{};
    std::array<double, 5> moments_literal{};
    double weight_plus = 0.0;          ///< inferred from the first moment
    double weight_minus = 0.0;
    double weight_plus_closed = 0.0;   ///< (1 + s3)/2
    double max_rel_error = 0.0;        ///< over deflection, moments and weights
};

/// w_spin = (1, s) is the Bloch state 1/2 (1 + s.sigma). start must have p1 = 0.
SternGerlachReport stern_gerlach_run(const ModelSpec& m, const SpinSymbol& w_spin, const ExtendedState& start,
                                     double t, double dt = 1e-3, const SphereQuadrature& quad = SphereQuadrature::product_rule(4, 8));

/// Effective 1D quantum check: H = P^2/2 - eps (b(x)/2) sigma3 on a grid, started from a Gaussian
/// of width^2 = eps/2 at (q0, p0) with Bloch vector s, against the same mean from the flow
/// averaged over the Wigner symbol of the initial state.
struct SternGerlachQuantumCheck {
    double eps = 0.0;
    double t = 0.0;
    double quantum_mean = 0.0;         ///< <x>(t) - q0 - t p0
    double semiclassical_mean = 0.0;
    double discrepancy = 0.0;
    int grid_N = 0;
};

SternGerlachQuantumCheck stern_gerlach_quantum(const ModelSpec& m, const Vec3& bloch, double q0, double p0,
                                               double t, double L = 4.0, int threads = 0);

} // namespace egorov
