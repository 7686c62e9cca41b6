#include "egorov/symbol_evolution.hpp"

#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include "egorov/errors.hpp"
#include "egorov/weyl_grid.hpp"

namespace egorov {

namespace {

using State = Eigen::VectorXcd;

// RK4 is stable on the imaginary axis up to 2 sqrt 2.
constexpr double kStableImag = 2.8;

State pack(const SymbolField& a) {
    const Eigen::Index n = a.comp[0].size();
    State x(4 * n);
    for (int c = 0; c < 4; ++c) x.segment(c * n, n) = a.comp[c].reshaped();
    return x;
}

void unpack(const State& x, SymbolField& a) {
    const Eigen::Index n = a.comp[0].size();
    for (int c = 0; c < 4; ++c) a.comp[c].reshaped() = x.segment(c * n, n);
}

} // namespace

SymbolEvolution::SymbolEvolution(const ModelSpec& m, const PhaseGrid& g) : transport_(m), grid_(g) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear)
        throw DomainError("exact_symbol_evolution: harmonic-linear mode only");
    transport_.anharmonic_mu = 0.0;
    const double eps = m.epsilon;
    double dv_max = 0.0;
    if (m.anharmonic_mu != 0.0) {
        moyal_ = true;
        theta_.resize(g.Nq, g.Np);
        for (int k = 0; k < g.Np; ++k) {
            const double kp = (g.Np % 2 == 0 && k == g.Np / 2) ? 0.0 : g.kp(k);
            for (int i = 0; i < g.Nq; ++i) {
                const double q = g.q(i);
                theta_(i, k) = cplx(0, 1.0 / eps) * (m.V(q - 0.5 * eps * kp) - m.V(q + 0.5 * eps * kp));
            }
        }
        // |V'| of the bump peaks at q = w.
        dv_max = std::abs(m.dV(m.anharmonic_width));
    }
    const double kq = std::numbers::pi * g.Nq / (2.0 * g.Lq), kp = std::numbers::pi * g.Np / (2.0 * g.Lp);
    const double w2 = m.omega * m.omega;
    double hmax = 0.0;
    for (double q : {-g.Lq, g.Lq})
        for (double p : {-g.Lp, g.Lp}) hmax = std::max(hmax, (m.h_c + q * m.h_q + p * m.h_p).norm());
    const double c1 = std::abs(m.h0_offset(1)) + std::abs(m.h0_offset(2)) + m.h_q.norm() + m.h_p.norm();
    rate_ = g.Lp * kq + (w2 * g.Lq + dv_max) * kp + 2.0 * hmax + eps * c1 * (kq + kp);
}

SymbolField SymbolEvolution::rhs(const SymbolField& a) const {
    SymbolField out = sigma_bracket(transport_, a);
    if (moyal_)
        for (int c = 0; c < 4; ++c) out.comp[c] += apply_p_multiplier(a.comp[c], theta_);
    return out;
}

std::vector<SymbolField> exact_symbol_trajectory(const ModelSpec& m, const SymbolField& a0,
                                                 const std::vector<double>& times, double dt) {
    if (!(dt > 0.0)) throw DomainError("exact_symbol_evolution: dt must be positive");
    const SymbolEvolution ev(m, a0.grid);
    if (dt * ev.rate_bound() > kStableImag) {
        std::ostringstream os;
        os << "exact_symbol_evolution: dt = " << dt << " exceeds the stability limit "
           << kStableImag / ev.rate_bound();
        throw NumericalError(os.str(), kStableImag / ev.rate_bound());
    }
    SymbolField work = a0, dwork = a0;
    auto sys = [&](const State& x, State& dxdt, double) {
        unpack(x, work);
        dwork = ev.rhs(work);
        dxdt = pack(dwork);
    };
    boost::numeric::odeint::runge_kutta4<State, double, State, double,
                                         boost::numeric::odeint::vector_space_algebra>
        rk;
    State x = pack(a0);
    std::vector<SymbolField> out;
    out.reserve(times.size());
    double t = 0.0;
    for (double target : times) {
        if (target < t) throw DomainError("exact_symbol_trajectory: times must be increasing and >= 0");
        const double span = target - t;
        const int n = static_cast<int>(std::ceil(span / dt - 1e-12));
        const double h = n > 0 ? span / n : 0.0;
        for (int s = 0; s < n; ++s) {
            rk.do_step(sys, x, t, h);
            t += h;
        }
        t = target;
        if (!x.allFinite()) throw NumericalError("exact_symbol_evolution: non-finite field");
        SymbolField f = a0;
        unpack(x, f);
        out.push_back(std::move(f));
    }
    return out;
}

SymbolField exact_symbol_evolution(const ModelSpec& m, const SymbolField& a0, double t, double dt) {
    if (t < 0.0) throw DomainError("exact_symbol_evolution: t must be >= 0");
    return exact_symbol_trajectory(m, a0, {t}, dt).front();
}

} // namespace egorov
