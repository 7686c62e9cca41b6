#include "egorov/stern_gerlach.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <thread>

#include "egorov/egorov_harness.hpp"
#include "egorov/errors.hpp"
#include "egorov/quantum_ref.hpp"

namespace egorov {

namespace {

const double kSqrt3 = std::sqrt(3.0);

double rel(double a, double b, double scale) { return std::abs(a - b) / std::max(scale, 1e-300); }

} // namespace

SternGerlachReport stern_gerlach_run(const ModelSpec& m, const SpinSymbol& w_spin, const ExtendedState& start,
                                     double t, double dt, const SphereQuadrature& quad) {
    if (m.mode != ModelSpec::Mode::SternGerlach) throw DomainError("stern_gerlach_run: Stern-Gerlach mode required");
    if (start.p(0) != 0.0) throw DomainError("stern_gerlach_run: initial momentum must have p1 = 0");
    if (!w_spin.is_real(1e-14) || std::abs(w_spin.a0 - 1.0) > 1e-12)
        throw DomainError("stern_gerlach_run: spin state must be real with s0 = 1");
    const Vec3 s = w_spin.a.real();
    if (s.norm() > 1.0 + 1e-12) throw DomainError("stern_gerlach_run: Bloch vector longer than 1");

    SternGerlachReport r;
    r.eps = m.epsilon;
    r.t = t;
    r.slope = m.field.db(start.q(0));
    const double c = 0.25 * m.epsilon * t * t * r.slope;  // dq1 = c sqrt3 n3
    r.deflection_closed = kSqrt3 * c;
    r.deflection_literal = 2.0 * kSqrt3 * c;

    auto deflection = [&](const Vec3& n) {
        ExtendedState s0 = start;
        s0.n = n;
        const ExtendedState e = flow_samples(m, s0, {t}, dt, Integrator::RK78).front();
        return e.q(0) - start.q(0) - t * start.p(0);
    };
    r.deflection_flow = deflection(Vec3::UnitZ());

    std::vector<cplx> vals(quad.size());
    for (std::size_t k = 0; k < quad.size(); ++k) vals[k] = deflection(quad.nodes[k]);
    const Matrix2 D = quantize_spin(project_C1_values(vals.data(), quad));
    const Matrix2 rho = 0.5 * quantize_spin(w_spin);
    Matrix2 Dm = Matrix2::Identity();
    for (int k = 0; k <= 4; ++k) {
        r.moments_flow[k] = (rho * Dm).trace().real();
        const double ck = std::pow(c, k), lk = std::pow(2.0 * c, k);
        r.moments_closed[k] = k % 2 == 0 ? ck : ck * s(2);
        r.moments_literal[k] = k % 2 == 0 ? lk : lk * s(2);
        Dm = Dm * D;
    }
    r.weight_plus = 0.5 * (1.0 + r.moments_flow[1] / c);
    r.weight_minus = 0.5 * (1.0 - r.moments_flow[1] / c);
    r.weight_plus_closed = 0.5 * (1.0 + s(2));

    double err = rel(r.deflection_flow, r.deflection_closed, std::abs(r.deflection_closed));
    for (int k = 0; k <= 4; ++k) err = std::max(err, rel(r.moments_flow[k], r.moments_closed[k], std::pow(std::abs(c), k)));
    err = std::max(err, std::abs(r.weight_plus - r.weight_plus_closed));
    r.max_rel_error = err;
    return r;
}

SternGerlachQuantumCheck stern_gerlach_quantum(const ModelSpec& m, const Vec3& bloch, double q0, double p0,
                                               double t, double L, int threads) {
    if (m.mode != ModelSpec::Mode::SternGerlach) throw DomainError("stern_gerlach_quantum: Stern-Gerlach mode required");
    if (bloch.norm() > 1.0 + 1e-12) throw DomainError("stern_gerlach_quantum: Bloch vector longer than 1");
    const double eps = m.epsilon;
    SternGerlachQuantumCheck out;
    out.eps = eps;
    out.t = t;

    // Quantum side.
    const Grid g = Grid::for_support(L, std::abs(p0) + 10.0 * std::sqrt(eps) + 0.5, eps, 64);
    out.grid_N = g.N;
    const FieldProfile prof = m.field;
    auto H = std::make_shared<const GridHamiltonian>(
        g, [](double) { return 0.0; }, [prof](double x) { return Vec3(0.0, 0.0, -0.5 * prof.b(x)); },
        Vec3::Zero(), 0.0, eps);
    const ChebyshevPropagator U(H);
    const double sn = bloch.norm();
    const Vec3 axis = sn > 1e-14 ? Vec3(bloch / sn) : Vec3::UnitZ();
    double xq = 0.0;
    for (int sign : {1, -1}) {
        const double lam = 0.5 * (1.0 + sign * sn);
        if (lam == 0.0) continue;
        const SpinorState psi = U.propagate(coherent_state(g, q0, p0, sign * axis), t);
        double v = 0.0;
        for (int j = 0; j < g.N; ++j) v += g.x(j) * (std::norm(psi(j)) + std::norm(psi(g.N + j)));
        xq += lam * v;
    }
    out.quantum_mean = xq - q0 - t * p0;

    // Semiclassical side: Wigner 2 exp(-|z - z0|^2 / eps) (1/2 + (sqrt3/2) s.n), trapezoid on +-6 sqrt(eps).
    const SphereQuadrature quad = SphereQuadrature::product_rule(8, 4);
    const int nl = 48;
    const double R = 6.0 * std::sqrt(eps), h = 2.0 * R / nl;
    const double dt = std::min(0.01, t / 100.0);
    std::vector<double> rows(nl, 0.0);
    const int nthreads = std::max(1, std::min(resolve_threads(threads), nl));
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < nl; i += nthreads) {
                const double q = q0 - R + (i + 0.5) * h;
                double acc = 0.0;
                for (int j = 0; j < nl; ++j) {
                    const double p = p0 - R + (j + 0.5) * h;
                    const double wq = 2.0 * std::exp(-((q - q0) * (q - q0) + (p - p0) * (p - p0)) / eps);
                    for (std::size_t k = 0; k < quad.size(); ++k) {
                        const Vec3& n = quad.nodes[k];
                        ExtendedState s0;
                        s0.q(0) = q;
                        s0.p(0) = p;
                        s0.n = n;
                        const ExtendedState e = flow_samples(m, s0, {t}, dt, Integrator::RK78).front();
                        acc += quad.weights[k] * wq * (0.5 + 0.5 * kSqrt3 * bloch.dot(n)) * e.q(0);
                    }
                }
                rows[i] = acc;
            }
        });
    for (auto& th : pool) th.join();
    double mean = 0.0;
    for (double v : rows) mean += v;
    mean *= h * h / (2.0 * std::numbers::pi * eps) / (2.0 * std::numbers::pi);
    out.semiclassical_mean = mean - q0 - t * p0;
    out.discrepancy = std::abs(out.quantum_mean - out.semiclassical_mean);
    return out;
}

} // namespace egorov
