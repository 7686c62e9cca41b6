#include "egorov/phase_flow.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "egorov/errors.hpp"

namespace egorov {

namespace {

const double kSqrt3 = std::sqrt(3.0);

// Smooth step: 0 for x <= 0, 1 for x >= 1, C-infinity in between.
double smooth_step(double x, double* deriv) {
    auto f = [](double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; };
    auto df = [&](double y) { return y > 0.0 ? f(y) / (y * y) : 0.0; };
    const double a = f(x), b = f(1.0 - x);
    const double s = a + b;
    if (deriv) *deriv = (df(x) * b + a * df(1.0 - x)) / (s * s);
    return a / s;
}

using FlowVec = std::array<double, 9>;

FlowVec pack(const ExtendedState& s) {
    return {s.q(0), s.q(1), s.q(2), s.p(0), s.p(1), s.p(2), s.n(0), s.n(1), s.n(2)};
}

ExtendedState unpack(const FlowVec& x) {
    ExtendedState s;
    s.q = Vec3(x[0], x[1], x[2]);
    s.p = Vec3(x[3], x[4], x[5]);
    s.n = Vec3(x[6], x[7], x[8]);
    return s;
}

Tangent vector_field(const ModelSpec& m, const ExtendedState& s, bool decoupled) {
    Tangent t;
    const double eps = decoupled ? 0.0 : m.epsilon;
    const Vec3 h = m.spin_field(s.q, s.p);
    t.dn = 2.0 * h.cross(s.n);
    if (m.mode == ModelSpec::Mode::HarmonicLinear) {
        const double q = s.q(0), p = s.p(0);
        t.dq(0) = p + eps * (m.h0_offset(2) + kSqrt3 * m.h_p.dot(s.n));
        t.dp(0) = -m.omega * m.omega * q - m.dV(q) - eps * (m.h0_offset(1) + kSqrt3 * m.h_q.dot(s.n));
    } else {
        t.dq = s.p;
        t.dp(0) = eps * 0.5 * kSqrt3 * m.field.db(s.q(0)) * s.n(2);
    }
    return t;
}

struct FlowSystem {
    const ModelSpec* m;
    bool decoupled;
    void operator()(const FlowVec& x, FlowVec& dxdt, double) const {
        const Tangent t = vector_field(*m, unpack(x), decoupled);
        for (int j = 0; j < 3; ++j) {
            dxdt[j] = t.dq(j);
            dxdt[3 + j] = t.dp(j);
            dxdt[6 + j] = t.dn(j);
        }
    }
};

Vec3 rodrigues(const Vec3& n, const Vec3& axis_field, double h) {
    const double norm = axis_field.norm();
    if (norm == 0.0) return n;
    const Vec3 k = axis_field / norm;
    const double th = 2.0 * norm * h;
    const double c = std::cos(th), s = std::sin(th);
    return n * c + k.cross(n) * s + k * (k.dot(n)) * (1.0 - c);
}

// One symmetric Strang step A(h/2) K(h/2) B(h/2) C(h) B(h/2) K(h/2) A(h/2).
void strang_step(const ModelSpec& m, ExtendedState& s, double h, bool decoupled) {
    const double eps = decoupled ? 0.0 : m.epsilon;
    const bool hl = m.mode == ModelSpec::Mode::HarmonicLinear;
    auto drift = [&](double tau) {
        if (hl) {
            const double w = m.omega;
            const double c = std::cos(w * tau), sn = std::sin(w * tau);
            const double q = s.q(0), p = s.p(0);
            s.q(0) = q * c + p * sn / w;
            s.p(0) = -w * q * sn + p * c;
        } else {
            s.q += tau * s.p;
        }
    };
    auto kick = [&](double tau) {
        if (hl && m.anharmonic_mu != 0.0) s.p(0) -= tau * m.dV(s.q(0));
    };
    auto shift = [&](double tau) {
        if (eps == 0.0) return;
        if (hl) {
            s.q(0) += tau * eps * (m.h0_offset(2) + kSqrt3 * m.h_p.dot(s.n));
            s.p(0) -= tau * eps * (m.h0_offset(1) + kSqrt3 * m.h_q.dot(s.n));
        } else {
            s.p(0) += tau * eps * 0.5 * kSqrt3 * m.field.db(s.q(0)) * s.n(2);
        }
    };
    drift(0.5 * h);
    kick(0.5 * h);
    shift(0.5 * h);
    s.n = rodrigues(s.n, m.spin_field(s.q, s.p), h);
    shift(0.5 * h);
    kick(0.5 * h);
    drift(0.5 * h);
}

void yoshida_step(const ModelSpec& m, ExtendedState& s, double h, bool decoupled) {
    static const double c = std::cbrt(2.0);
    static const double w1 = 1.0 / (2.0 - c);
    static const double w0 = -c / (2.0 - c);
    strang_step(m, s, w1 * h, decoupled);
    strang_step(m, s, w0 * h, decoupled);
    strang_step(m, s, w1 * h, decoupled);
}

class Stepper {
public:
    Stepper(const ModelSpec& m, Integrator scheme, bool decoupled)
        : m_(m), scheme_(scheme), decoupled_(decoupled), sys_{&m, decoupled} {}

    void step(ExtendedState& s, double h) {
        if (scheme_ == Integrator::Yoshida4) {
            yoshida_step(m_, s, h, decoupled_);
        } else {
            FlowVec x = pack(s);
            rk_.do_step(sys_, x, 0.0, h);
            s = unpack(x);
        }
    }

private:
    const ModelSpec& m_;
    Integrator scheme_;
    bool decoupled_;
    FlowSystem sys_;
    boost::numeric::odeint::runge_kutta_fehlberg78<FlowVec> rk_;
};

void check_finite(const ExtendedState& s, double t) {
    if (!s.q.allFinite() || !s.p.allFinite() || !s.n.allFinite()) {
        std::ostringstream os;
        os << "flow blow-up: non-finite state at t = " << t;
        throw NumericalError(os.str());
    }
}

ExtendedState normalized(const ExtendedState& s0) {
    ExtendedState s = s0;
    const double nn = s.n.norm();
    if (!(nn > 0.0)) throw DomainError("flow: spin direction has zero length");
    s.n /= nn;
    return s;
}

FlowResult run_flow(const ModelSpec& m, const ExtendedState& s0, double t, double dt,
                    Integrator scheme, bool decoupled) {
    if (!(dt > 0.0)) throw DomainError("flow: dt must be positive");
    FlowResult r;
    ExtendedState s = normalized(s0);
    const long steps = t == 0.0 ? 0 : static_cast<long>(std::ceil(std::abs(t) / dt - 1e-12));
    const double h = steps ? t / steps : 0.0;
    Stepper st(m, scheme, decoupled);
    auto record = [&](double time) {
        r.states.push_back(s);
        r.times.push_back(time);
        r.energy.push_back(m.hamiltonian(s.q, s.p, s.n));
        r.norm_drift.push_back(s.n.norm() - 1.0);
    };
    record(0.0);
    for (long k = 1; k <= steps; ++k) {
        st.step(s, h);
        check_finite(s, k * h);
        record(k * h);
    }
    return r;
}

// Variational system: base (q, p, n), dZ (2x2 row-major), dN (3x2 row-major).
using VarVec = std::array<double, 15>;

struct VariationalSystem {
    const ModelSpec* m;
    bool decoupled;
    void operator()(const VarVec& x, VarVec& d, double) const {
        const ModelSpec& M = *m;
        const double eps = decoupled ? 0.0 : M.epsilon;
        const double q = x[0], p = x[1];
        const Vec3 n(x[2], x[3], x[4]);
        const Vec3 h = M.h_c + q * M.h_q + p * M.h_p;
        d[0] = p + eps * (M.h0_offset(2) + kSqrt3 * M.h_p.dot(n));
        d[1] = -M.omega * M.omega * q - M.dV(q) - eps * (M.h0_offset(1) + kSqrt3 * M.h_q.dot(n));
        const Vec3 dn = 2.0 * h.cross(n);
        d[2] = dn(0);
        d[3] = dn(1);
        d[4] = dn(2);
        Eigen::Matrix2d Z;
        Z << x[5], x[6], x[7], x[8];
        Eigen::Matrix<double, 3, 2> N;
        N << x[9], x[10], x[11], x[12], x[13], x[14];
        Eigen::Matrix2d Om;
        Om << 0.0, 1.0, -M.omega * M.omega - M.d2V(q), 0.0;
        Eigen::Matrix<double, 2, 3> G;
        G.row(0) = kSqrt3 * M.h_p.transpose();
        G.row(1) = -kSqrt3 * M.h_q.transpose();
        const Eigen::Matrix2d dZ = Om * Z + eps * G * N;
        Eigen::Matrix<double, 3, 2> dNm;
        for (int j = 0; j < 2; ++j) {
            const Vec3 dh = M.h_q * Z(0, j) + M.h_p * Z(1, j);
            dNm.col(j) = 2.0 * h.cross(Vec3(N.col(j))) + 2.0 * dh.cross(n);
        }
        d[5] = dZ(0, 0);
        d[6] = dZ(0, 1);
        d[7] = dZ(1, 0);
        d[8] = dZ(1, 1);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j) d[9 + 2 * i + j] = dNm(i, j);
    }
};

VarVec pack_var(const VariationalState& v) {
    VarVec x{};
    x[0] = v.base.q(0);
    x[1] = v.base.p(0);
    for (int j = 0; j < 3; ++j) x[2 + j] = v.base.n(j);
    x[5] = v.dZ(0, 0);
    x[6] = v.dZ(0, 1);
    x[7] = v.dZ(1, 0);
    x[8] = v.dZ(1, 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) x[9 + 2 * i + j] = v.dN(i, j);
    return x;
}

VariationalState unpack_var(const VarVec& x) {
    VariationalState v;
    v.base = ExtendedState::hl(x[0], x[1], Vec3(x[2], x[3], x[4]));
    v.dZ << x[5], x[6], x[7], x[8];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) v.dN(i, j) = x[9 + 2 * i + j];
    return v;
}

} // namespace

FieldProfile FieldProfile::plateau_linear(double slope, double plateau, double ramp) {
    FieldProfile f;
    f.name = "plateau_linear";
    auto chi = [plateau, ramp](double q, double* dchi) {
        const double a = std::abs(q);
        if (a <= plateau) {
            if (dchi) *dchi = 0.0;
            return 1.0;
        }
        double ds = 0.0;
        const double v = 1.0 - smooth_step((a - plateau) / ramp, &ds);
        if (dchi) *dchi = -ds / ramp * (q < 0 ? -1.0 : 1.0);
        return v;
    };
    f.b = [slope, chi](double q) { return slope * q * chi(q, nullptr); };
    f.db = [slope, chi](double q) {
        double dc = 0.0;
        const double c = chi(q, &dc);
        return slope * (c + q * dc);
    };
    return f;
}

FieldProfile FieldProfile::tanh_profile(double slope, double scale) {
    FieldProfile f;
    f.name = "tanh";
    f.b = [slope, scale](double q) { return slope * scale * std::tanh(q / scale); };
    f.db = [slope, scale](double q) {
        const double c = std::cosh(q / scale);
        return slope / (c * c);
    };
    return f;
}

ModelSpec ModelSpec::rabi(double eps) {
    ModelSpec m;
    m.epsilon = eps;
    m.omega = 1.0;
    m.h_c = Vec3(0.0, 0.0, 0.5);
    m.h_q = Vec3(0.5, 0.0, 0.0);
    m.h_p = Vec3::Zero();
    return m;
}

ModelSpec ModelSpec::stern_gerlach(double eps, FieldProfile profile) {
    ModelSpec m;
    m.mode = Mode::SternGerlach;
    m.epsilon = eps;
    m.field = std::move(profile);
    return m;
}

double ModelSpec::V(double q) const {
    if (anharmonic_mu == 0.0) return 0.0;
    return anharmonic_mu * std::exp(-q * q / (2.0 * anharmonic_width * anharmonic_width));
}

double ModelSpec::dV(double q) const {
    if (anharmonic_mu == 0.0) return 0.0;
    const double w2 = anharmonic_width * anharmonic_width;
    return -q / w2 * V(q);
}

double ModelSpec::d2V(double q) const {
    if (anharmonic_mu == 0.0) return 0.0;
    const double w2 = anharmonic_width * anharmonic_width;
    return (q * q / (w2 * w2) - 1.0 / w2) * V(q);
}

Vec3 ModelSpec::spin_field(const Vec3& q, const Vec3& p) const {
    if (mode == Mode::SternGerlach) return Vec3(0.0, 0.0, -0.5 * field.b(q(0)));
    return h_c + q(0) * h_q + p(0) * h_p;
}

double ModelSpec::h0(const Vec3& q, const Vec3& p) const {
    if (mode == Mode::SternGerlach) return 0.5 * p.squaredNorm();
    return 0.5 * (p(0) * p(0) + omega * omega * q(0) * q(0)) + V(q(0));
}

double ModelSpec::scalar_sub(const Vec3& q, const Vec3& p) const {
    if (mode == Mode::SternGerlach) return 0.0;
    return h0_offset(0) + q(0) * h0_offset(1) + p(0) * h0_offset(2);
}

double ModelSpec::hamiltonian(const Vec3& q, const Vec3& p, const Vec3& n) const {
    return h0(q, p) + epsilon * (scalar_sub(q, p) + kSqrt3 * spin_field(q, p).dot(n));
}

double ModelSpec::default_dt(double radius) const {
    double hmax = 0.0;
    for (double q : {-radius, 0.0, radius})
        for (double p : {-radius, 0.0, radius})
            hmax = std::max(hmax, 2.0 * spin_field(Vec3(q, 0, 0), Vec3(p, 0, 0)).norm());
    double dt = std::min(0.01, 0.01 / omega);
    if (hmax > 0.0) dt = std::min(dt, 0.1 / hmax);
    return dt;
}

Tangent hamiltonian_vector_field(const ModelSpec& m, const ExtendedState& s) {
    return vector_field(m, s, false);
}

FlowResult integrate_flow(const ModelSpec& m, const ExtendedState& s0, double t, double dt,
                          Integrator scheme) {
    return run_flow(m, s0, t, dt, scheme, false);
}

FlowResult integrate_decoupled(const ModelSpec& m, const ExtendedState& s0, double t, double dt,
                               Integrator scheme) {
    return run_flow(m, s0, t, dt, scheme, true);
}

std::vector<ExtendedState> flow_samples(const ModelSpec& m, const ExtendedState& s0,
                                        const std::vector<double>& times, double dt,
                                        Integrator scheme, bool decoupled) {
    if (!(dt > 0.0)) throw DomainError("flow: dt must be positive");
    std::vector<ExtendedState> out;
    out.reserve(times.size());
    ExtendedState s = normalized(s0);
    Stepper st(m, scheme, decoupled);
    double now = 0.0;
    for (double target : times) {
        const double span = target - now;
        const long steps = span == 0.0 ? 0 : static_cast<long>(std::ceil(std::abs(span) / dt - 1e-12));
        const double h = steps ? span / steps : 0.0;
        for (long k = 0; k < steps; ++k) st.step(s, h);
        check_finite(s, target);
        now = target;
        out.push_back(s);
    }
    return out;
}

std::vector<VariationalState> variational_trajectory(const ModelSpec& m, const VariationalState& v0,
                                                     double t, double dt, std::vector<double>& times,
                                                     bool decoupled) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear)
        throw DomainError("integrate_variational: only the harmonic-linear mode is supported");
    if (!(dt > 0.0)) throw DomainError("integrate_variational: dt must be positive");
    VariationalSystem sys{&m, decoupled};
    boost::numeric::odeint::runge_kutta_fehlberg78<VarVec> rk;
    VarVec x = pack_var(v0);
    const long steps = t == 0.0 ? 0 : static_cast<long>(std::ceil(std::abs(t) / dt - 1e-12));
    const double h = steps ? t / steps : 0.0;
    std::vector<VariationalState> out{unpack_var(x)};
    times.assign(1, 0.0);
    for (long k = 1; k <= steps; ++k) {
        rk.do_step(sys, x, 0.0, h);
        out.push_back(unpack_var(x));
        times.push_back(k * h);
        check_finite(out.back().base, k * h);
    }
    return out;
}

VariationalState integrate_variational(const ModelSpec& m, const VariationalState& v0, double t,
                                       double dt, bool decoupled) {
    std::vector<double> times;
    return variational_trajectory(m, v0, t, dt, times, decoupled).back();
}

double FlowBoundConstants::window(double eps, double alpha) const {
    if (b * g == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(alpha / (eps * b * g));
}

FlowBoundConstants flow_bound_constants(const ModelSpec& m) {
    Eigen::Matrix<double, 2, 3> G;
    G.row(0) = kSqrt3 * m.h_p.transpose();
    G.row(1) = -kSqrt3 * m.h_q.transpose();
    FlowBoundConstants c;
    c.g = Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>>(G).singularValues()(0);
    c.b = 2.0 * std::sqrt(m.h_q.squaredNorm() + m.h_p.squaredNorm());
    return c;
}

} // namespace egorov
