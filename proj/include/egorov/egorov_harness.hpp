#pragma once

#include <string>
#include <vector>

#include "egorov/phase_flow.hpp"
#include "egorov/quantum_ref.hpp"
#include "egorov/spectral.hpp"
#include "egorov/weyl_grid.hpp"

namespace egorov {

/// Observable on Sigma with the metadata the theorems distinguish.
struct Observable {
    std::string name;
    SigmaFunction f;
    bool spin_dependent = false;
    /// Compactly supported up to Gaussian tails (the spin-independent long-time case).
    bool compact = true;
    /// Independent of p: the Weyl quantization is the multiplication operator a(x, n) on the grid.
    bool p_independent = false;

    /// exp(-(q^2 + p^2) / s^2)
    static Observable gaussian(double s = 1.0);
    /// sqrt3 n3 exp(-(q^2 + p^2) / s^2), a C1 observable.
    static Observable sigma3_gaussian(double s = 1.0);
    /// 3 n3^2 exp(-(q^2 + p^2) / s^2), spin-dependent and outside C1.
    static Observable n3sq_gaussian(double s = 1.0);
    /// exp(-q^2) (p-independent position bump).
    static Observable q_bump();
    /// Constant 1.
    static Observable one();
    /// gaussian | sigma3-gaussian | n3sq-gaussian | q-bump | one; the Gaussians accept a width
    /// suffix, e.g. "gaussian:0.5".
    static Observable named(const std::string& spec);
};

/// P a sampled on the phase grid (sphere quadrature for the spin fiber).
SymbolField project_observable(const SigmaFunction& a, const PhaseGrid& g, const SphereQuadrature& quad);

/// Worker count: `requested` if positive, else EGOROV_SPIN_THREADS, else the hardware count.
int resolve_threads(int requested);

/// P(a o Phi^t_eps) at each of the increasing times t >= 0, for several observables at once:
/// out[obs][time]. Each grid node is flowed forward once per sphere node (RK78, fixed step).
std::vector<std::vector<SymbolField>> compose_with_flow(const ModelSpec& m, const std::vector<SigmaFunction>& obs,
                                                        const PhaseGrid& g, const SphereQuadrature& quad,
                                                        const std::vector<double>& times, double dt,
                                                        int threads = 0);

/// Discretization of one error evaluation.
struct EgorovOptions {
    int coarse_n = 64;         ///< coarse symbol grid (Nc x Nc)
    double coarse_L = 7.0;     ///< coarse box [-L, L)^2, also the quantum position box
    int quad_theta = 4;        ///< Gauss-Legendre nodes in cos(theta)
    int quad_phi = 8;
    double flow_dt = 0.01;
    double pde_dt = 0.005;
    double norm_tol = 1e-4;    ///< relative Lanczos tolerance
    int threads = 0;
    bool dt_halving_floor = true;
};

/// One row of a sweep.
struct ErrorSample {
    double eps = 0.0;
    double t = 0.0;
    double gamma = 0.0;
    double error = 0.0;
    double floor = 0.0;
    int grid_N = 0;
    double grid_L = 0.0;
    double runtime_ms = 0.0;
};

/// Quantum grid on which a coarse field with momentum box Lp is representable.
Grid quantum_grid_for(double L, double Lp, double eps);

/// ||Op_Sigma(f)|| on the quantum grid for a coarse field (banded, Lanczos). Kernel entries below
/// 1e-14 scale are dropped (scale = 0 uses the field's own sup norm); the estimated norm of the
/// dropped part is stored in *truncation when given.
double field_operator_norm(const SymbolField& f, const Grid& g, double tol = 1e-6, double scale = 0.0,
                           double* truncation = nullptr);

/// Heisenberg-minus-classical errors at the given times. The Heisenberg side is the exact symbol
/// evolution of the quantum commutator (projected bracket plus the exact Moyal term of the bump);
/// the classical side is P(a o Phi^t). Both are quantized on the quantum grid and compared in
/// operator norm. floor = max(t = 0 residual, time-step halving difference at the last time,
/// band truncation estimate).
std::vector<ErrorSample> egorov_error_samples(const ModelSpec& m, const Observable& a,
                                              const std::vector<double>& times, const EgorovOptions& opt = {});
/// Same for several observables sharing one set of trajectories: out[obs][time].
std::vector<std::vector<ErrorSample>> egorov_error_samples(const ModelSpec& m, const std::vector<Observable>& obs,
                                                           const std::vector<double>& times,
                                                           const EgorovOptions& opt = {});

double egorov_error(const ModelSpec& m, const Observable& a, double t, const EgorovOptions& opt = {});

/// Same error with the Heisenberg side computed directly by Chebyshev propagation on the quantum
/// grid: ||U(t)* Op(Pa) U(t) - Op(P(a o Phi^t))||. Feasible for moderate eps only.
double egorov_error_quantum(const ModelSpec& m, const Observable& a, double t, const EgorovOptions& opt = {});

/// ||U(t)* Op(Pa) U(t) - Op(a(t))|| with a(t) from exact_symbol_evolution: the residual of the exact
/// evolution law, which is pure discretization. Chebyshev propagation on the quantum grid.
double exact_evolution_residual(const ModelSpec& m, const Observable& a, double t, const EgorovOptions& opt = {});

/// Least-squares slope of log e against log eps.
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double lo = 0.0;  ///< 95% interval
    double hi = 0.0;
    int used = 0;
    std::vector<bool> kept;
};

/// Points with e < 10 floor are excluded (floors may be empty). Throws FitError with fewer than
/// three surviving points.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points, const std::vector<double>& floors = {});

struct SweepConfig {
    std::vector<double> eps_list;
    double T = 1.0;
    double gamma = 0.0;
    Observable observable = Observable::gaussian();
    ModelSpec model = ModelSpec::rabi(0.1);
    EgorovOptions grid;
    int samples_per_horizon = 8;
};

struct ScalingReport {
    std::string observable;
    double gamma = 0.0;
    std::vector<ErrorSample> rows;    ///< every (eps, t) sample
    std::vector<ErrorSample> sup;     ///< per eps: largest error over the horizon
    ScalingFit fit;
    bool inconclusive = false;
    std::string note;
    double predicted = 0.0;           ///< exponent the theorem predicts for this case
    bool one_sided = false;
    double margin = 0.0;
    bool pass = false;
};

/// Exponent the theorems predict: 2 (spin-independent) / 1 (spin-dependent) for gamma = 0;
/// 3/2 - 3 gamma and 1 - 4 gamma for the long-time cases.
double predicted_exponent(const Observable& a, double gamma);

/// Sweep over eps with t sampled on (0, T / eps^gamma]. Throws DomainError when gamma is outside
/// the range of the long-time statement for this observable or the eps list is too short.
ScalingReport long_time_sweep(const SweepConfig& cfg);
/// One report per observable; cfg.observable is ignored. Trajectories are shared between observables.
std::vector<ScalingReport> sweep_observables(const SweepConfig& cfg, const std::vector<Observable>& obs);

/// Minimal uncorrelated spin-1/2 Gaussian state: Wigner symbol 2 exp(-|z - z0|^2 / eps) (1/2, s/2),
/// scaled by `trace` (must be 1 for a density operator).
struct GaussianState {
    double q0 = 0.0;
    double p0 = 0.0;
    Vec3 bloch = Vec3::UnitZ();
    double trace = 1.0;

    SpinSymbol wigner(double q, double p, double eps) const;
};

struct ExpectationPair {
    double quantum = 0.0;
    double semiclassical = 0.0;
};

/// Tr(Op(a) rho(t)) by Chebyshev propagation of the state, and the phase-space integral of
/// (a o Phi^t) against the Wigner symbol. Throws DomainError for a non-normalized state.
ExpectationPair state_expectation(const ModelSpec& m, const Observable& a, const GaussianState& w, double t,
                                  const EgorovOptions& opt = {});

} // namespace egorov
