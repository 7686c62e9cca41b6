#include "doctest.h"

#include <cmath>
#include <random>

#include "egorov/egorov_harness.hpp"
#include "egorov/errors.hpp"
#include "egorov/stern_gerlach.hpp"
#include "egorov/symbol_evolution.hpp"

using namespace egorov;

namespace {

const double kSqrt3 = std::sqrt(3.0);

std::vector<double> dyadic(int from, int to) {
    std::vector<double> v;
    for (int k = from; k <= to; ++k) v.push_back(std::ldexp(1.0, -k));
    return v;
}

ModelSpec bump_model(double eps) {
    ModelSpec m = ModelSpec::rabi(eps);
    m.anharmonic_mu = 0.5;
    m.anharmonic_width = 1.0;
    return m;
}

} // namespace

TEST_CASE("scaling_fit") {
    std::vector<std::pair<double, double>> sq, lin;
    for (double e : dyadic(2, 9)) {
        sq.emplace_back(e, e * e);
        lin.emplace_back(e, 3.0 * e);
    }
    const ScalingFit f2 = scaling_fit(sq);
    CHECK(std::abs(f2.slope - 2.0) < 1e-12);
    CHECK(f2.used == 8);
    CHECK(std::abs(f2.hi - f2.lo) < 1e-10);
    const ScalingFit f1 = scaling_fit(lin);
    CHECK(std::abs(f1.slope - 1.0) < 1e-12);
    CHECK(std::abs(f1.intercept - std::log(3.0)) < 1e-12);

    // errors flatten onto a floor of 1e-8; points below 10x floor are dropped
    std::vector<std::pair<double, double>> fl;
    std::vector<double> floors;
    for (double e : dyadic(2, 12)) {
        fl.emplace_back(e, e * e + 1e-8);
        floors.push_back(1e-8);
    }
    const ScalingFit ff = scaling_fit(fl, floors);
    CHECK(ff.slope >= 1.9);
    CHECK(ff.slope <= 2.1);
    CHECK(ff.used < static_cast<int>(fl.size()));
    CHECK_FALSE(ff.kept.back());

    std::vector<double> high(fl.size(), 1e-3);
    CHECK_THROWS_AS(scaling_fit(fl, high), FitError);
    CHECK_THROWS_AS(scaling_fit({{0.1, 1.0}, {0.05, 0.5}}), FitError);
}

TEST_CASE("predicted exponents") {
    CHECK(predicted_exponent(Observable::gaussian(), 0.0) == 2.0);
    CHECK(predicted_exponent(Observable::n3sq_gaussian(), 0.0) == 1.0);
    CHECK(predicted_exponent(Observable::gaussian(), 0.125) == doctest::Approx(1.125));
    CHECK(predicted_exponent(Observable::sigma3_gaussian(), 0.125) == doctest::Approx(0.5));
}

TEST_CASE("named observables") {
    CHECK(Observable::named("gaussian").name == "gaussian");
    const Observable w = Observable::named("n3sq-gaussian:0.5");
    CHECK(w.name == "n3sq-gaussian:0.5");
    CHECK(w.spin_dependent);
    CHECK(std::abs(w.f(0.5, 0.0, Vec3::UnitZ()) - 3.0 * std::exp(-1.0)) < 1e-15);
    CHECK(Observable::named("q-bump").p_independent);
    CHECK_THROWS_AS(Observable::named("nope"), DomainError);
    CHECK_THROWS_AS(Observable::named("q-bump:2"), DomainError);
    CHECK_THROWS_AS(Observable::named("gaussian:-1"), DomainError);
}

TEST_CASE("exact_symbol_evolution: identity at t = 0 and spin precession") {
    const PhaseGrid pg = PhaseGrid::square(32, 6.0);
    const SphereQuadrature quad = SphereQuadrature::product_rule(4, 8);
    const ModelSpec m = ModelSpec::rabi(1.0 / 16);
    const SymbolField a0 = project_observable(Observable::n3sq_gaussian().f, pg, quad);
    CHECK((exact_symbol_evolution(m, a0, 0.0, 0.01) - a0).sup_norm() == 0.0);

    // constant field h = (0,0,1), a(0) = sqrt3 n1: frak a(t) = (cos 2t, -sin 2t, 0)
    ModelSpec c = ModelSpec::rabi(0.1);
    c.h_c = Vec3(0.0, 0.0, 1.0);
    c.h_q = Vec3::Zero();
    const SymbolField n1 = SymbolField::sample(pg, [](double, double) { return SpinSymbol::vector(CVec3(1, 0, 0)); });
    const double t = 0.7;
    const SymbolField at = exact_symbol_evolution(c, n1, t, 0.001);
    const SymbolField expect = SymbolField::sample(pg, [t](double, double) {
        return SpinSymbol::vector(CVec3(std::cos(2 * t), -std::sin(2 * t), 0));
    });
    CHECK((at - expect).sup_norm() < 1e-10);

    // the same sign from the characteristic flow
    const ExtendedState e = flow_samples(c, ExtendedState::hl(0.0, 0.0, Vec3::UnitX()), {t}, 1e-3, Integrator::RK78).front();
    // a o Phi^t (n) = sqrt3 Phi(n)_1; for the rotation n -> R n this is sqrt3 (R^T e1).n
    const Vec3 r1 = flow_samples(c, ExtendedState::hl(0.0, 0.0, Vec3::UnitY()), {t}, 1e-3, Integrator::RK78).front().n;
    CHECK(std::abs(e.n(0) - std::cos(2 * t)) < 1e-10);
    CHECK(std::abs(r1(0) + std::sin(2 * t)) < 1e-10);

    CHECK_THROWS_AS(exact_symbol_trajectory(m, a0, {0.5, 0.2}, 0.01), DomainError);
    ModelSpec sg = ModelSpec::stern_gerlach(0.1, FieldProfile::tanh_profile(1.0, 1.0));
    CHECK_THROWS_AS(exact_symbol_evolution(sg, a0, 0.1, 0.01), DomainError);
}

TEST_CASE("exact evolution law holds at the discretization floor") {
    EgorovOptions o;
    o.coarse_L = 3.0;
    o.pde_dt = 0.00125;
    o.norm_tol = 1e-3;
    const double r = exact_evolution_residual(ModelSpec::rabi(1.0 / 32), Observable::named("n3sq-gaussian:0.5"), 1.0, o);
    CHECK(r < 1e-6);
}

TEST_CASE("egorov error at t = 0 sits below the floor") {
    EgorovOptions o;
    o.coarse_n = 48;
    o.norm_tol = 1e-3;
    const ModelSpec m = bump_model(1.0 / 16);
    const auto rows = egorov_error_samples(
        m, std::vector<Observable>{Observable::gaussian(), Observable::n3sq_gaussian(), Observable::sigma3_gaussian()},
        {0.0, 0.5}, o);
    for (const auto& r : rows) {
        CHECK(r[0].error <= r[0].floor * (1.0 + 1e-9));
        CHECK(r[1].error > 10.0 * r[1].floor);
        CHECK(r[0].grid_N > 0);
    }
}

TEST_CASE("symbol evolution and direct Chebyshev evolution agree") {
    EgorovOptions o;
    o.norm_tol = 1e-4;
    const ModelSpec m = bump_model(1.0 / 16);
    for (const Observable& a : {Observable::gaussian(), Observable::n3sq_gaussian()}) {
        const double b = egorov_error(m, a, 1.0, o);
        const double q = egorov_error_quantum(m, a, 1.0, o);
        CHECK(std::abs(b - q) / q < 1e-3);
    }
}

TEST_CASE("long_time_sweep domain checks") {
    SweepConfig c;
    c.eps_list = dyadic(4, 6);
    CHECK_THROWS_AS(long_time_sweep(c), DomainError);
    c.eps_list = {0.0625, 0.125, 0.03125, 0.015625};
    CHECK_THROWS_AS(long_time_sweep(c), DomainError);
    c.eps_list = dyadic(4, 7);
    c.gamma = 0.3;
    c.observable = Observable::n3sq_gaussian();
    CHECK_THROWS_AS(long_time_sweep(c), DomainError);
    c.gamma = 0.5;
    c.observable = Observable::gaussian();
    CHECK_THROWS_AS(long_time_sweep(c), DomainError);
    c.gamma = 0.1;
    c.observable = Observable::q_bump();
    CHECK_THROWS_AS(long_time_sweep(c), DomainError);
    c.gamma = -0.1;
    c.observable = Observable::gaussian();
    CHECK_THROWS_AS(long_time_sweep(c), DomainError);
}

TEST_CASE("state_expectation") {
    EgorovOptions o;
    GaussianState w;
    w.q0 = 0.5;
    w.bloch = Vec3(0.0, 0.6, 0.8);
    const ModelSpec m = bump_model(1.0 / 16);
    const ExpectationPair one = state_expectation(m, Observable::one(), w, 1.3, o);
    CHECK(std::abs(one.quantum - 1.0) < 1e-6);
    CHECK(std::abs(one.semiclassical - 1.0) < 1e-6);
    const ExpectationPair z = state_expectation(m, Observable::sigma3_gaussian(), w, 0.0, o);
    CHECK(std::abs(z.quantum - z.semiclassical) < 1e-8);

    GaussianState bad = w;
    bad.trace = 2.0;
    CHECK_THROWS_AS(state_expectation(m, Observable::one(), bad, 1.0, o), DomainError);
    bad = w;
    bad.bloch = Vec3(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(state_expectation(m, Observable::one(), bad, 1.0, o), DomainError);
}

TEST_CASE("Stern-Gerlach moments") {
    const ModelSpec m = ModelSpec::stern_gerlach(0.01, FieldProfile::plateau_linear(1.0, 1.0, 1.0));
    const ExtendedState start;
    const double t = 2.0;

    SUBCASE("deflection for n3 = 1") {
        const SternGerlachReport r = stern_gerlach_run(m, SpinSymbol(1.0, CVec3(0, 0, 1)), start, t);
        // (1/2) eps t^2 (sqrt3/2) b' with eps t^2 b' = 0.04
        CHECK(std::abs(r.deflection_flow - 0.02 * kSqrt3 / 2.0) < 1e-12);
        CHECK(std::abs(r.deflection_closed - 0.0173205080757) < 1e-12);
        // eps t^2 (sqrt3/2) b' (no 1/2 of the kinematics)
        CHECK(std::abs(r.deflection_literal - 0.034641016151) < 1e-11);
        const double var = r.moments_flow[2] - r.moments_flow[1] * r.moments_flow[1];
        CHECK(std::abs(var) < 1e-12 * r.moments_flow[2]);
        CHECK(std::abs(r.weight_plus - 1.0) < 1e-10);
    }
    SUBCASE("unpolarized") {
        const SternGerlachReport r = stern_gerlach_run(m, SpinSymbol(1.0, CVec3::Zero()), start, t);
        const double c = 0.01;  // eps t^2 b' / 4
        CHECK(std::abs(r.moments_flow[1]) < 1e-14);
        CHECK(std::abs(r.moments_flow[2] - c * c) < 1e-10 * c * c);
        CHECK(std::abs(r.weight_plus - 0.5) < 1e-12);
        CHECK(std::abs(r.weight_minus - 0.5) < 1e-12);
    }
    SUBCASE("random Bloch vectors") {
        std::mt19937_64 g(7);
        std::normal_distribution<double> nd;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const SternGerlachReport ref = stern_gerlach_run(m, SpinSymbol(1.0, CVec3(0, 0, 1)), start, t);
        for (int k = 0; k < 20; ++k) {
            const Vec3 s = Vec3(nd(g), nd(g), nd(g)).normalized() * std::cbrt(u(g));
            const SternGerlachReport r = stern_gerlach_run(m, SpinSymbol(1.0, s.cast<cplx>()), start, t);
            CHECK(r.max_rel_error < 1e-8);
            CHECK(std::abs(r.moments_flow[2] - ref.moments_flow[2]) < 1e-8 * ref.moments_flow[2]);
            CHECK(std::abs(r.moments_flow[4] - ref.moments_flow[4]) < 1e-8 * ref.moments_flow[4]);
            CHECK(std::abs(r.weight_plus - 0.5 * (1.0 + s(2))) < 1e-8);
        }
    }
    SUBCASE("preconditions") {
        ExtendedState moving;
        moving.p(0) = 0.1;
        CHECK_THROWS_AS(stern_gerlach_run(m, SpinSymbol(1.0, CVec3::Zero()), moving, t), DomainError);
        CHECK_THROWS_AS(stern_gerlach_run(m, SpinSymbol(2.0, CVec3::Zero()), start, t), DomainError);
        CHECK_THROWS_AS(stern_gerlach_run(m, SpinSymbol(1.0, CVec3(0, 0, 1.5)), start, t), DomainError);
        CHECK_THROWS_AS(stern_gerlach_run(ModelSpec::rabi(0.01), SpinSymbol(1.0, CVec3::Zero()), start, t), DomainError);
    }
}
