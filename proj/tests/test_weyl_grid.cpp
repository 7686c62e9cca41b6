#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "egorov/errors.hpp"
#include "egorov/weyl_grid.hpp"

using namespace egorov;

namespace {

const double kSqrt3 = std::sqrt(3.0);

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

SpinSymbol gauss_c1(double q, double p) {
    const double g = std::exp(-q * q - p * p);
    return {0.7 * g, CVec3(0.3 * g * q, -0.2 * g, 0.5 * g * p)};
}

} // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid(100, 8.0, 0.1), DomainError);
    CHECK_THROWS_AS(Grid(64, -1.0, 0.1), DomainError);
    const Grid g = Grid::for_support(7.0, 7.0, 1.0 / 512, 64);
    CHECK(g.p_max() >= 7.0);
    CHECK(g.N == 16384);
}

TEST_CASE("quantize_sigma on trivial symbols") {
    const Grid g(64, 8.0, 0.1);
    const Eigen::Index n = 2 * g.N;
    const CMatrix one = quantize_sigma([](double, double) { return SpinSymbol::constant(1.0); }, g);
    CHECK(max_abs(one - CMatrix::Identity(n, n)) < 1e-13);

    const CMatrix s3 = quantize_sigma([](double, double) { return SpinSymbol::vector(CVec3(0, 0, 1)); }, g);
    CMatrix ref = CMatrix::Zero(n, n);
    ref.topLeftCorner(g.N, g.N).setIdentity();
    ref.bottomRightCorner(g.N, g.N) = -CMatrix::Identity(g.N, g.N);
    CHECK(max_abs(s3 - ref) < 1e-13);

    // q sqrt3 n1 -> sigma_1 (x) diag(x_j)
    const CMatrix qs1 = quantize_sigma([](double q, double) { return SpinSymbol::vector(CVec3(q, 0, 0)); }, g);
    ref.setZero();
    for (int j = 0; j < g.N; ++j) {
        ref(j, g.N + j) = g.x(j);
        ref(g.N + j, j) = g.x(j);
    }
    CHECK(max_abs(qs1 - ref) < 1e-12);
}

TEST_CASE("p symbol quantizes to -i eps d/dx") {
    const Grid g(128, 8.0, 0.2);
    const CMatrix P = weyl_quantize_scalar([](double, double p) { return cplx(p); }, g);
    Eigen::VectorXcd f(g.N), df(g.N);
    for (int j = 0; j < g.N; ++j) {
        const double x = g.x(j);
        f(j) = std::exp(-x * x);
        df(j) = -2.0 * x * std::exp(-x * x);
    }
    const Eigen::VectorXcd lhs = P * f;
    const Eigen::VectorXcd rhs = cplx(0, -g.eps) * df;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("hermiticity and linearity") {
    const Grid g(64, 6.0, 0.3);
    const CMatrix A = quantize_sigma(gauss_c1, g);
    CHECK(max_abs(A - A.adjoint()) < 1e-12);
    auto b = [](double q, double p) { return SpinSymbol(std::cos(q) * std::exp(-p * p), CVec3(0, std::exp(-q * q), 0)); };
    const CMatrix B = quantize_sigma(b, g);
    const cplx c1(0.3, -1.1), c2(2.0, 0.5);
    const CMatrix C = quantize_sigma([&](double q, double p) { return gauss_c1(q, p) * c1 + b(q, p) * c2; }, g);
    CHECK(max_abs(C - (c1 * A + c2 * B)) < 1e-12);
    const SymbolField wa = wigner_transform(A, g), wb = wigner_transform(B, g), wc = wigner_transform(C, g);
    CHECK((wc - (wa * c1 + wb * c2)).sup_norm() < 1e-12);
}

TEST_CASE("wigner_transform inverts quantize_sigma") {
    const Grid g(256, 10.0, 0.3);
    CHECK(g.p_max() > 12.0);
    SUBCASE("identity and sigma_3") {
        const Eigen::Index n = 2 * g.N;
        const SymbolField w = wigner_transform(CMatrix::Identity(n, n), g);
        CHECK((w.comp[0].array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(w.comp[3].cwiseAbs().maxCoeff() < 1e-12);
        CMatrix s3 = CMatrix::Identity(n, n);
        s3.bottomRightCorner(g.N, g.N) *= -1.0;
        const SymbolField w3 = wigner_transform(s3, g);
        CHECK((w3.comp[3].array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(w3.comp[0].cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("gaussian round trip") {
        const SymbolField in = SymbolField::sample(g.dual(), gauss_c1);
        const SymbolField out = wigner_transform(quantize_sigma(in, g), g);
        CHECK((out - in).sup_norm() < 1e-8);
    }
}

TEST_CASE("support leakage is rejected") {
    const Grid g(64, 4.0, 0.2);
    const SymbolField wide = SymbolField::sample(g.dual(), [](double, double) { return SpinSymbol::constant(1.0); });
    CHECK_THROWS_AS(quantize_sigma(wide, g), DomainError);
}

TEST_CASE("trace pairing") {
    const double eps = 0.25;
    const Grid g(256, 10.0, eps);
    auto w = [](double q, double p) {
        const double e = std::exp(-0.5 * ((q - 0.5) * (q - 0.5) + p * p));
        return SpinSymbol(e, CVec3(0.2 * e, 0, -0.4 * e));
    };
    const CMatrix A = quantize_sigma(gauss_c1, g), W = quantize_sigma(w, g);
    const cplx tr = (A * W).trace();
    // (2 pi eps)^-1 (4 pi)^-1 2 int dq dp int dn a w, with (4 pi)^-1 int dn (a0+s3 a.n)(w0+s3 w.n) = a0 w0 + a.w
    const PhaseGrid fine = PhaseGrid::square(256, 8.0);
    cplx integral = 0.0;
    for (int i = 0; i < fine.Nq; ++i)
        for (int j = 0; j < fine.Np; ++j) {
            const SpinSymbol x = gauss_c1(fine.q(i), fine.p(j)), y = w(fine.q(i), fine.p(j));
            integral += (x.a0 * y.a0 + (x.a.transpose() * y.a).value()) * fine.dq() * fine.dp();
        }
    const cplx expected = 2.0 * integral / (2.0 * std::numbers::pi * eps);
    CHECK(std::abs(tr - expected) / std::abs(expected) < 1e-4);
}

TEST_CASE("banded quantization agrees with the dense one") {
    const Grid g(256, 6.0, 0.1);
    const PhaseGrid coarse{48, 48, g.L, 6.0};
    REQUIRE(coarse.Lp <= g.p_max());
    const SymbolField cf = SymbolField::sample(coarse, gauss_c1);
    const BandedOperator B(cf, g, true, 1e-15);
    const CMatrix dense = quantize_sigma(gauss_c1, g);
    CHECK(B.hermitian());
    CHECK(B.bandwidth() < g.N / 2);
    CHECK(max_abs(B.to_dense() - dense) < 1e-10);
    // adjoint consistency on a random vector
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    CVector x(2 * g.N), y(2 * g.N), ax, aty;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = cplx(nd(rng), nd(rng));
        y(i) = cplx(nd(rng), nd(rng));
    }
    B.apply(x, ax);
    B.apply_adjoint(y, aty);
    CHECK(std::abs(y.dot(ax) - aty.dot(x)) < 1e-10 * (1.0 + std::abs(y.dot(ax))));
}

TEST_CASE("operator_norm") {
    CMatrix d = CMatrix::Zero(40, 40);
    for (int i = 0; i < 40; ++i) d(i, i) = i + 1.0;
    CHECK(operator_norm(d, 1e-8) == doctest::Approx(40.0).epsilon(1e-8));

    const Grid g(64, 8.0, 0.1);
    const CMatrix s1 = quantize_sigma([](double, double) { return SpinSymbol::vector(CVec3(1, 0, 0)); }, g);
    CHECK(operator_norm(s1, 1e-8) == doctest::Approx(1.0).epsilon(1e-8));

    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    CMatrix r(64, 64);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) r(i, j) = cplx(nd(rng), nd(rng));
    const double smax = Eigen::JacobiSVD<CMatrix>(r).singularValues()(0);
    CHECK(operator_norm(r, 1e-6) == doctest::Approx(smax).epsilon(2e-6));

    // unitary
    const Eigen::HouseholderQR<CMatrix> qr(r);
    const CMatrix Q = qr.householderQ();
    CHECK(operator_norm(Q, 1e-6) == doctest::Approx(1.0).epsilon(2e-6));
    CHECK_THROWS_AS(operator_norm(r, 0.5), DomainError);
}

TEST_CASE("commutator defect for C1 observables sits at the grid floor") {
    const double eps = 0.2;
    const double L = std::sqrt(402.0 * eps);
    const Grid g(256, L / 1.0, eps);
    const ModelSpec m = ModelSpec::rabi(eps);
    const SphereQuadrature quad = SphereQuadrature::product_rule(4, 8);
    SigmaFunction a = [](double q, double p, const Vec3& n) {
        return cplx(std::exp(-2.0 * (q * q + p * p)) * (1.0 + kSqrt3 * (0.5 * n(0) - n(2))));
    };
    const CommutatorDefect d = commutator_defect(m, a, g, quad);
    CHECK(d.reference_norm > 0.1);
    CHECK(d.defect_norm < 1e-6);
    CHECK(d.corrected_defect_norm < 1e-6);

    // non-C1 fiber: the correction term carries the whole defect
    SigmaFunction b = [](double q, double p, const Vec3& n) {
        return cplx(std::exp(-2.0 * (q * q + p * p)) * 3.0 * n(2) * n(2));
    };
    const CommutatorDefect e = commutator_defect(m, b, g, quad);
    CHECK(e.defect_norm > 1e-3);
    CHECK(e.corrected_defect_norm < 1e-6);
}

TEST_CASE("moyal defect: quadratic potential is exact") {
    const Grid g(256, 6.0, 1.0 / 16);
    ScalarHamiltonian h{[](double q) { return 0.5 * q * q; }, [](double q) { return q; }};
    auto a = [](double q, double p) { return std::exp(-2.0 * (q * q + p * p)); };
    auto aq = [](double q, double p) { return -4.0 * q * std::exp(-2.0 * (q * q + p * p)); };
    auto ap = [](double q, double p) { return -4.0 * p * std::exp(-2.0 * (q * q + p * p)); };
    CHECK(moyal_defect(h, a, aq, ap, g) < 1e-8);
}
