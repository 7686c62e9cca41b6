#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "egorov/errors.hpp"
#include "egorov/phase_flow.hpp"

using namespace egorov;

namespace {

const double kSqrt3 = std::sqrt(3.0);

double state_dist(const ExtendedState& a, const ExtendedState& b) {
    return std::max({(a.q - b.q).norm(), (a.p - b.p).norm(), (a.n - b.n).norm()});
}

} // namespace

TEST_CASE("hamiltonian_vector_field") {
    ModelSpec m = ModelSpec::rabi(0.0);
    m.h_c.setZero();
    m.h_q.setZero();
    Tangent t = hamiltonian_vector_field(m, ExtendedState::hl(1.0, 0.0, Vec3::UnitZ()));
    CHECK(t.dq(0) == 0.0);
    CHECK(t.dp(0) == doctest::Approx(-1.0));

    m.h_c = Vec3(0, 0, 1);
    t = hamiltonian_vector_field(m, ExtendedState::hl(0.0, 0.0, Vec3::UnitX()));
    CHECK((t.dn - Vec3(0, 2, 0)).norm() < 1e-15);

    // Stern-Gerlach: unit slope at the origin, n3 = 1
    const ModelSpec sg = ModelSpec::stern_gerlach(0.01, FieldProfile::plateau_linear(1.0, 1.0, 1.0));
    ExtendedState s;
    s.n = Vec3::UnitZ();
    t = hamiltonian_vector_field(sg, s);
    CHECK(t.dp(0) == doctest::Approx(0.01 * kSqrt3 / 2.0).epsilon(1e-14));
    CHECK(t.dp(1) == 0.0);

    // dn is orthogonal to n
    std::mt19937 rng(5);
    std::normal_distribution<double> nd;
    const ModelSpec r = ModelSpec::rabi(0.1);
    for (int k = 0; k < 20; ++k) {
        const ExtendedState x = ExtendedState::hl(nd(rng), nd(rng), Vec3(nd(rng), nd(rng), nd(rng)).normalized());
        CHECK(std::abs(hamiltonian_vector_field(r, x).dn.dot(x.n)) < 1e-14);
    }
}

TEST_CASE("integrate_flow closed forms") {
    ModelSpec m = ModelSpec::rabi(0.1);
    m.h_q.setZero();
    m.h_c = Vec3(0, 0, 1);
    const ExtendedState s0 = ExtendedState::hl(1.0, 0.0, Vec3::UnitX());
    const FlowResult z = integrate_flow(m, s0, 0.0, 0.01);
    CHECK(state_dist(z.states.back(), s0) == 0.0);

    for (Integrator sc : {Integrator::Yoshida4, Integrator::RK78}) {
        const FlowResult r = integrate_flow(m, s0, std::numbers::pi / 2.0, 0.01, sc);
        const ExtendedState& e = r.states.back();
        CHECK(std::abs(e.q(0)) < 1e-9);
        CHECK(std::abs(e.p(0) + 1.0) < 1e-9);
        CHECK((e.n - Vec3(-1, 0, 0)).norm() < 1e-9);
        CHECK(r.times.size() == r.energy.size());
        for (std::size_t i = 1; i < r.times.size(); ++i) CHECK(r.times[i] > r.times[i - 1]);
    }
}

TEST_CASE("flow invertibility, group law, conservation") {
    const ModelSpec m = ModelSpec::rabi(0.1);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 5; ++k) {
        const ExtendedState s0 = ExtendedState::hl(u(rng), u(rng), Vec3(u(rng), u(rng), u(rng)).normalized());
        const ExtendedState f = integrate_flow(m, s0, 1.0, 0.005).states.back();
        const ExtendedState b = integrate_flow(m, f, -1.0, 0.005).states.back();
        CHECK(state_dist(b, s0) < 1e-8);

        const double s = u(rng), t = u(rng);
        const ExtendedState st = integrate_flow(m, integrate_flow(m, s0, t, 0.005).states.back(), s, 0.005).states.back();
        CHECK(state_dist(st, integrate_flow(m, s0, s + t, 0.005).states.back()) < 1e-8);
    }
    const ExtendedState s0 = ExtendedState::hl(0.7, -0.4, Vec3(0.3, 0.4, 0.5).normalized());
    const FlowResult r = integrate_flow(m, s0, 10.0, 0.01);  // 1000 steps
    double drift = 0.0, de = 0.0;
    for (std::size_t i = 0; i < r.states.size(); ++i) {
        drift = std::max(drift, std::abs(r.norm_drift[i]));
        de = std::max(de, std::abs(r.energy[i] - r.energy[0]));
    }
    CHECK(drift < 1e-10);
    CHECK(de < 1e-7);
    // fourth order: halving dt cuts the energy drift by about 16
    const FlowResult r2 = integrate_flow(m, s0, 10.0, 0.005);
    double de2 = 0.0;
    for (std::size_t i = 0; i < r2.states.size(); ++i) de2 = std::max(de2, std::abs(r2.energy[i] - r2.energy[0]));
    CHECK(de / de2 > 10.0);
}

TEST_CASE("integrate_decoupled") {
    const ExtendedState s0 = ExtendedState::hl(0.0, 1.0, Vec3::UnitZ());
    const ExtendedState a = integrate_decoupled(ModelSpec::rabi(0.1), s0, std::numbers::pi, 0.01).states.back();
    const ExtendedState b = integrate_decoupled(ModelSpec::rabi(0.01), s0, std::numbers::pi, 0.01).states.back();
    CHECK(state_dist(a, b) == 0.0);
    CHECK(std::abs(a.q(0)) < 1e-12);
    CHECK(std::abs(a.p(0) + 1.0) < 1e-12);

    // O(eps) closeness of the coupled and decoupled positions
    auto gap = [&](double eps) {
        const ModelSpec m = ModelSpec::rabi(eps);
        const ExtendedState x = ExtendedState::hl(0.5, 0.2, Vec3(1, 1, 0).normalized());
        const FlowResult f = integrate_flow(m, x, 1.0, 0.001, Integrator::RK78);
        const FlowResult d = integrate_decoupled(m, x, 1.0, 0.001, Integrator::RK78);
        double g = 0.0;
        for (std::size_t i = 0; i < f.states.size(); ++i)
            g = std::max(g, std::hypot(f.states[i].q(0) - d.states[i].q(0), f.states[i].p(0) - d.states[i].p(0)));
        return g;
    };
    const double ratio = gap(1e-2) / gap(1e-3);
    CHECK(ratio == doctest::Approx(10.0).epsilon(0.2));
}

TEST_CASE("variational flow") {
    const ModelSpec m = ModelSpec::rabi(1e-3);
    VariationalState v0;
    v0.base = ExtendedState::hl(0.3, -0.2, Vec3::UnitZ());
    const VariationalState z = integrate_variational(m, v0, 0.0, 0.01);
    CHECK((z.dZ - Eigen::Matrix2d::Identity()).norm() == 0.0);
    CHECK(z.dN.norm() == 0.0);

    ModelSpec sg = ModelSpec::stern_gerlach(0.01, FieldProfile::tanh_profile(1.0, 1.0));
    CHECK_THROWS_AS(integrate_variational(sg, v0, 1.0, 0.01), DomainError);

    SUBCASE("decoupled case is the harmonic rotation") {
        ModelSpec d = ModelSpec::rabi(0.1);
        d.h_q.setZero();
        const double t = 2.3;
        const VariationalState r = integrate_variational(d, v0, t, 0.01);
        Eigen::Matrix2d R;
        R << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
        CHECK((r.dZ - R).norm() < 1e-10);
        CHECK(r.dN.norm() < 1e-12);
    }
    SUBCASE("derivative matches finite differences") {
        const double t = 1.5, h = 1e-6;
        const VariationalState r = integrate_variational(m, v0, t, 0.005);
        auto end = [&](double dq, double dp) {
            VariationalState w;
            w.base = ExtendedState::hl(v0.base.q(0) + dq, v0.base.p(0) + dp, v0.base.n);
            return integrate_variational(m, w, t, 0.005).base;
        };
        const ExtendedState a = end(h, 0), b = end(-h, 0);
        CHECK(std::abs((a.q(0) - b.q(0)) / (2 * h) - r.dZ(0, 0)) < 1e-7);
        CHECK(((a.n - b.n) / (2 * h) - r.dN.col(0)).norm() < 1e-7);
    }
    SUBCASE("phase-space determinant") {
        const VariationalState r = integrate_variational(m, v0, 5.0, 0.01);
        CHECK(std::abs(r.dZ.determinant() - 1.0) < 1e-2);
    }
}

TEST_CASE("flow bound constants") {
    const FlowBoundConstants c = flow_bound_constants(ModelSpec::rabi(1e-3));
    CHECK(c.b == doctest::Approx(1.0));
    CHECK(c.g == doctest::Approx(kSqrt3 / 2.0));
    CHECK(c.window(1e-3, 0.5) == doctest::Approx(std::sqrt(0.5 / (1e-3 * c.b * c.g))));
}

TEST_CASE("non-finite states are reported with the time") {
    ModelSpec m = ModelSpec::rabi(0.1);
    m.omega = std::nan("");
    try {
        integrate_flow(m, ExtendedState::hl(1.0, 0.0, Vec3::UnitZ()), 1.0, 0.1);
        CHECK(false);
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("t = ") != std::string::npos);
    }
}
