#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "egorov/spin_weyl.hpp"

namespace egorov {

/// Scalar field profile b(q1) for the Stern-Gerlach mode, with derivatives.
struct FieldProfile {
    std::string name;
    std::function<double(double)> b;
    std::function<double(double)> db;

    /// b(q) = slope * q * chi(q): exactly linear for |q| <= plateau, smooth and compactly supported within plateau + ramp.
    static FieldProfile plateau_linear(double slope, double plateau, double ramp);
    /// b(q) = slope * scale * tanh(q / scale): unit-slope at 0 with nonzero third derivative.
    static FieldProfile tanh_profile(double slope, double scale);
};

/// Hamiltonian data h = h0 + eps (frak h0 + sqrt(3) frak h . n).
///
/// Harmonic-linear mode (d = 1): h0 = (p^2 + omega^2 q^2)/2 + V(q) with the optional bounded
/// anharmonic bump V(q) = mu exp(-q^2 / (2 w^2)); frak h = h_c + q h_q + p h_p and
/// frak h0 = h0_offset(0) + q h0_offset(1) + p h0_offset(2).
/// Stern-Gerlach mode (d = 3): h0 = |p|^2/2, frak h = -b(q1) e3 / 2, frak h0 = 0.
struct ModelSpec {
    enum class Mode { HarmonicLinear, SternGerlach };

    Mode mode = Mode::HarmonicLinear;
    double epsilon = 0.01;
    double omega = 1.0;
    Vec3 h_c = Vec3::Zero();
    Vec3 h_q = Vec3::Zero();
    Vec3 h_p = Vec3::Zero();
    Vec3 h0_offset = Vec3::Zero();
    double anharmonic_mu = 0.0;
    double anharmonic_width = 1.0;
    FieldProfile field;

    /// Rabi-type default: omega = 1, h_c = (0,0,1/2), h_q = (1/2,0,0), h_p = 0.
    static ModelSpec rabi(double eps);
    static ModelSpec stern_gerlach(double eps, FieldProfile profile);

    int dim() const { return mode == Mode::SternGerlach ? 3 : 1; }
    /// True when h0 is quadratic and frak h, frak h0 are affine (the exact-evolution class).
    bool harmonic_linear_exact() const { return mode == Mode::HarmonicLinear && anharmonic_mu == 0.0; }

    double V(double q) const;
    double dV(double q) const;
    double d2V(double q) const;
    /// frak h at (q, p); only q(0), p(0) are read in harmonic-linear mode.
    Vec3 spin_field(const Vec3& q, const Vec3& p) const;
    double h0(const Vec3& q, const Vec3& p) const;
    double scalar_sub(const Vec3& q, const Vec3& p) const;
    /// Full symbol h(q, p, n).
    double hamiltonian(const Vec3& q, const Vec3& p, const Vec3& n) const;
    /// Default step min(0.01, 0.01/omega, 0.1 / max|2 frak h|) with frak h sampled near the origin.
    double default_dt(double radius = 6.0) const;
};

/// Point of the extended phase space R^{2d} x S^2. Unused coordinates are zero.
struct ExtendedState {
    Vec3 q = Vec3::Zero();
    Vec3 p = Vec3::Zero();
    Vec3 n = Vec3::UnitZ();

    static ExtendedState hl(double q, double p, const Vec3& n) {
        ExtendedState s;
        s.q(0) = q;
        s.p(0) = p;
        s.n = n;
        return s;
    }
};

struct Tangent {
    Vec3 dq = Vec3::Zero();
    Vec3 dp = Vec3::Zero();
    Vec3 dn = Vec3::Zero();
};

struct FlowResult {
    std::vector<ExtendedState> states;
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> norm_drift;
};

/// Time-stepping scheme. Yoshida4 is the geometric splitting scheme; RK78 is the
/// Runge-Kutta-Fehlberg 7(8) pair used with a fixed step when high accuracy is needed.
enum class Integrator { Yoshida4, RK78 };

Tangent hamiltonian_vector_field(const ModelSpec& m, const ExtendedState& s);

/// Full flow Phi^t_eps from s0; records every step. Negative t integrates backward.
FlowResult integrate_flow(const ModelSpec& m, const ExtendedState& s0, double t, double dt,
                          Integrator scheme = Integrator::Yoshida4);

/// Decoupled flow Phi^t_0: (q,p) under h0 alone, n dragged by 2 frak h(Z0(t)) x n.
FlowResult integrate_decoupled(const ModelSpec& m, const ExtendedState& s0, double t, double dt,
                               Integrator scheme = Integrator::Yoshida4);

/// States at the given times (sorted by absolute value, same sign), without per-step recording.
std::vector<ExtendedState> flow_samples(const ModelSpec& m, const ExtendedState& s0,
                                        const std::vector<double>& times, double dt,
                                        Integrator scheme, bool decoupled = false);

/// Derivatives (dZ = dZ/dz, dN = dN/dz) carried along a harmonic-linear trajectory.
struct VariationalState {
    ExtendedState base;
    Eigen::Matrix2d dZ = Eigen::Matrix2d::Identity();
    Eigen::Matrix<double, 3, 2> dN = Eigen::Matrix<double, 3, 2>::Zero();
};

/// Propagates the variational equations to time t (RK78, fixed step).
VariationalState integrate_variational(const ModelSpec& m, const VariationalState& v0, double t,
                                       double dt, bool decoupled = false);

/// Same, returning the state after every step (times in `times`).
std::vector<VariationalState> variational_trajectory(const ModelSpec& m, const VariationalState& v0,
                                                     double t, double dt, std::vector<double>& times,
                                                     bool decoupled = false);

/// Constants used for the derivative bounds: g = ||G|| with G = sqrt3 [h_p^T; -h_q^T], b = 2 sqrt(|h_q|^2 + |h_p|^2).
struct FlowBoundConstants {
    double b = 0.0;
    double g = 0.0;
    /// Largest |t| with eps b g t^2 <= alpha.
    double window(double eps, double alpha) const;
};
FlowBoundConstants flow_bound_constants(const ModelSpec& m);

} // namespace egorov
