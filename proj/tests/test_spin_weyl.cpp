#include "doctest.h"

#include <cmath>
#include <random>

#include "egorov/errors.hpp"
#include "egorov/spin_weyl.hpp"

using namespace egorov;

namespace {

const double kSqrt3 = std::sqrt(3.0);

struct Rng {
    std::mt19937_64 g{2024};
    std::normal_distribution<double> nd;
    double operator()() { return nd(g); }
    cplx c() { return {nd(g), nd(g)}; }
    SpinSymbol symbol() { return {c(), CVec3(c(), c(), c())}; }
    Vec3 unit() { return Vec3(nd(g), nd(g), nd(g)).normalized(); }
};

double dist(const SpinSymbol& a, const SpinSymbol& b) { return (a - b).max_abs(); }

} // namespace

TEST_CASE("sw_kernel") {
    const Matrix2 k3 = sw_kernel(Vec3(0, 0, 1));
    CHECK(std::abs(k3(0, 0) - (1.0 + kSqrt3) / 2.0) < 1e-15);
    CHECK(std::abs(k3(1, 1) - (1.0 - kSqrt3) / 2.0) < 1e-15);
    CHECK(std::abs(k3(0, 1)) == 0.0);
    const Matrix2 k1 = sw_kernel(Vec3(1, 0, 0));
    CHECK(std::abs(k1(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(k1(0, 1) - kSqrt3 / 2.0) < 1e-15);
    CHECK(std::abs(k1(1, 0) - kSqrt3 / 2.0) < 1e-15);
    Rng r;
    for (int i = 0; i < 20; ++i) {
        const Matrix2 k = sw_kernel(r.unit());
        CHECK(std::abs(k.trace() - 1.0) < 1e-14);
        CHECK((k - k.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    }
    CHECK_THROWS_AS(sw_kernel(Vec3(0, 0, 1.01)), DomainError);
}

TEST_CASE("quantize and dequantize") {
    CHECK((quantize_spin(SpinSymbol::constant(1.0)) - Matrix2::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((quantize_spin(SpinSymbol::vector(CVec3(0, 0, 1))) - pauli(2)).cwiseAbs().maxCoeff() == 0.0);
    const cplx i(0, 1);
    CHECK((quantize_spin(SpinSymbol::vector(CVec3(i, 0, 0))) - i * pauli(0)).cwiseAbs().maxCoeff() == 0.0);

    CHECK(dist(dequantize_spin(pauli(2)), SpinSymbol::vector(CVec3(0, 0, 1))) == 0.0);
    CHECK(dist(dequantize_spin(Matrix2::Identity()), SpinSymbol::constant(1.0)) == 0.0);
    Matrix2 up;
    up << 0, 1, 0, 0;
    CHECK(dist(dequantize_spin(up), SpinSymbol::vector(CVec3(0.5, 0.5 * i, 0))) < 1e-16);

    Rng r;
    for (int k = 0; k < 100; ++k) {
        const SpinSymbol s = r.symbol();
        CHECK(dist(dequantize_spin(quantize_spin(s)), s) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + s.max_abs()));
    }
}

TEST_CASE("projection") {
    const SphereQuadrature q = SphereQuadrature::product_rule(6, 12);
    double wsum = 0.0;
    for (double w : q.weights) wsum += w;
    CHECK(std::abs(wsum - 4.0 * std::numbers::pi) < 1e-12);
    CHECK(q.degree >= 4);

    CHECK(dist(project_C1([](const Vec3&) { return cplx(1.0); }, q), SpinSymbol::constant(1.0)) < 1e-14);
    CHECK(dist(project_C1([](const Vec3& n) { return cplx(kSqrt3 * n(1)); }, q), SpinSymbol::vector(CVec3(0, 1, 0))) < 1e-14);
    CHECK(dist(project_C1([](const Vec3& n) { return cplx(n(2) * n(2)); }, q), SpinSymbol::constant(1.0 / 3.0)) < 1e-14);

    SphereQuadrature bad = q;
    bad.weights[3] = -1.0;
    CHECK_THROWS_AS(project_C1([](const Vec3&) { return cplx(1.0); }, bad), DomainError);

    Rng r;
    for (int k = 0; k < 20; ++k) {
        const Vec3 u = r.unit(), v = r.unit();
        const double c0 = r(), c1 = r();
        auto f = [&](const Vec3& n) { return cplx(c0 * u.dot(n) * v.dot(n) + c1 * std::pow(n(0), 3) + n(1)); };
        const SpinSymbol once = project_C1(f, q);
        const SpinSymbol twice = project_C1([&](const Vec3& n) { return once(n); }, q);
        CHECK(dist(once, twice) < 1e-13);
        // Op_spin P f = (1/2pi) int f Delta
        Matrix2 direct = Matrix2::Zero();
        for (std::size_t i = 0; i < q.size(); ++i) direct += q.weights[i] * f(q.nodes[i]) * sw_kernel(q.nodes[i]);
        direct /= 2.0 * std::numbers::pi;
        CHECK((quantize_spin(once) - direct).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("star product and bracket") {
    const SpinSymbol e1 = SpinSymbol::vector(CVec3(1, 0, 0)), e2 = SpinSymbol::vector(CVec3(0, 1, 0));
    const SpinSymbol e3 = SpinSymbol::vector(CVec3(0, 0, 1));
    CHECK(dist(star_spin(e1, e2), SpinSymbol::vector(CVec3(0, 0, cplx(0, 1)))) == 0.0);
    CHECK(dist(star_spin(e3, e3), SpinSymbol::constant(1.0)) == 0.0);
    CHECK(dist(poisson_s2(e1, e2), SpinSymbol::vector(CVec3(0, 0, -2))) == 0.0);
    CHECK(dist(poisson_s2(SpinSymbol::constant(5.0), e2), SpinSymbol()) == 0.0);

    Rng r;
    for (int k = 0; k < 100; ++k) {
        const SpinSymbol a = r.symbol(), b = r.symbol();
        CHECK(dist(star_spin(a, SpinSymbol::constant(1.0)), a) == 0.0);
        CHECK((quantize_spin(star_spin(a, b)) - quantize_spin(a) * quantize_spin(b)).cwiseAbs().maxCoeff() < 1e-13);
        CHECK(dist(star_spin(a, b) - star_spin(b, a), poisson_s2(a, b) * cplx(0, -1)) < 1e-13);
        CHECK(poisson_s2(a, a).max_abs() < 1e-14);
        // [Op a, Op b] = -i Op {a,b}
        const Matrix2 comm = quantize_spin(a) * quantize_spin(b) - quantize_spin(b) * quantize_spin(a);
        CHECK((comm - cplx(0, -1) * quantize_spin(poisson_s2(a, b))).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("pointwise sphere bracket and the projection lemma") {
    const SphereQuadrature q = SphereQuadrature::product_rule(6, 12);
    Rng r;
    for (int k = 0; k < 20; ++k) {
        // f, g: degree <= 3 polynomials in n
        const Vec3 u = r.unit(), v = r.unit(), w = r.unit();
        const double c = r(), d = r();
        auto f = [&](const Vec3& n) { return cplx(u.dot(n) + c * v.dot(n) * v.dot(n)); };
        auto grad_g = [&](const Vec3& n) -> CVec3 {
            return (w + 3.0 * d * std::pow(u.dot(n), 2) * u).cast<cplx>();
        };
        const SpinSymbol Pf = project_C1(f, q);
        auto gfun = [&](const Vec3& n) { return cplx(w.dot(n) + d * std::pow(u.dot(n), 3)); };
        const SpinSymbol Pg = project_C1(gfun, q);
        const CVec3 grad_pf = kSqrt3 * Pf.a;
        auto br = [&](const Vec3& n) { return poisson_s2_point(grad_pf, grad_g(n), n); };
        CHECK(dist(poisson_s2(Pf, Pg), project_C1(br, q)) < 1e-12);
        // the closed form agrees with the pointwise bracket on C1
        const Vec3 n = r.unit();
        const cplx lhs = poisson_s2(Pf, Pg)(n);
        CHECK(std::abs(lhs - poisson_s2_point(kSqrt3 * Pf.a, kSqrt3 * Pg.a, n)) < 1e-12);
    }
}

TEST_CASE("R(a,b) vanishes for C1 jets") {
    const SphereQuadrature q = SphereQuadrature::product_rule(6, 12);
    Rng r;
    for (int k = 0; k < 100; ++k) {
        const SpinJet a{r.symbol(), r.symbol()}, b{r.symbol(), r.symbol()};
        CHECK(r_defect(a, b, q).cwiseAbs().maxCoeff() < 1e-12);
    }
}
