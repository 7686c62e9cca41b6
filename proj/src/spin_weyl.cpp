#include "egorov/spin_weyl.hpp"

#include <cmath>
#include <numbers>

#include "egorov/errors.hpp"

namespace egorov {

namespace {

const double kSqrt3 = std::sqrt(3.0);

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = z; p0 = 1.0; }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

// C1 part of the pointwise product of two C1 functions.
SpinSymbol projected_product(const SpinSymbol& x, const SpinSymbol& y) {
    return {x.a0 * y.a0 + dot3(x.a, y.a), x.a0 * y.a + y.a0 * x.a};
}

} // namespace

cplx SpinSymbol::operator()(const Vec3& n) const {
    return a0 + kSqrt3 * (a(0) * n(0) + a(1) * n(1) + a(2) * n(2));
}

bool SpinSymbol::is_real(double tol) const {
    if (std::abs(a0.imag()) > tol) return false;
    for (int j = 0; j < 3; ++j)
        if (std::abs(a(j).imag()) > tol) return false;
    return true;
}

double SpinSymbol::max_abs() const {
    double m = std::abs(a0);
    for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a(j)));
    return m;
}

const Matrix2& pauli(int j) {
    static const Matrix2 s[3] = {
        (Matrix2() << 0.0, 1.0, 1.0, 0.0).finished(),
        (Matrix2() << 0.0, cplx(0, -1), cplx(0, 1), 0.0).finished(),
        (Matrix2() << 1.0, 0.0, 0.0, -1.0).finished(),
    };
    return s[j];
}

Matrix2 sw_kernel(const Vec3& n) {
    if (std::abs(n.norm() - 1.0) > 1e-10) throw DomainError("sw_kernel: n is not a unit vector");
    Matrix2 k = Matrix2::Identity();
    for (int j = 0; j < 3; ++j) k += kSqrt3 * n(j) * pauli(j);
    return 0.5 * k;
}

Matrix2 quantize_spin(const SpinSymbol& s) {
    Matrix2 m;
    m << s.a0 + s.a(2), s.a(0) - cplx(0, 1) * s.a(1),
         s.a(0) + cplx(0, 1) * s.a(1), s.a0 - s.a(2);
    return m;
}

SpinSymbol dequantize_spin(const Matrix2& m) {
    SpinSymbol s;
    s.a0 = 0.5 * (m(0, 0) + m(1, 1));
    s.a(0) = 0.5 * (m(0, 1) + m(1, 0));
    s.a(1) = 0.5 * cplx(0, 1) * (m(0, 1) - m(1, 0));
    s.a(2) = 0.5 * (m(0, 0) - m(1, 1));
    return s;
}

SphereQuadrature SphereQuadrature::product_rule(int n_theta, int n_phi) {
    if (n_theta < 1 || n_phi < 1) throw DomainError("SphereQuadrature: empty rule");
    std::vector<double> x, w;
    gauss_legendre(n_theta, x, w);
    SphereQuadrature q;
    q.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    const double dphi = 2.0 * std::numbers::pi / n_phi;
    for (int i = 0; i < n_theta; ++i) {
        const double st = std::sqrt(std::max(0.0, 1.0 - x[i] * x[i]));
        for (int k = 0; k < n_phi; ++k) {
            const double phi = (k + 0.5) * dphi;
            q.nodes.emplace_back(st * std::cos(phi), st * std::sin(phi), x[i]);
            q.weights.push_back(w[i] * dphi);
        }
    }
    q.degree = std::min(2 * n_theta - 1, n_phi - 1);
    return q;
}

cplx SphereQuadrature::integrate(const std::function<cplx(const Vec3&)>& f) const {
    cplx s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f(nodes[k]);
    return s;
}

SpinSymbol project_C1_values(const cplx* values, const SphereQuadrature& quad) {
    SpinSymbol out;
    for (std::size_t k = 0; k < quad.size(); ++k) {
        if (!(quad.weights[k] > 0.0)) throw DomainError("project_C1: non-positive quadrature weight");
        out.a0 += quad.weights[k] * values[k];
        for (int j = 0; j < 3; ++j) out.a(j) += quad.weights[k] * quad.nodes[k](j) * values[k];
    }
    const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
    out.a0 *= inv4pi;
    out.a *= kSqrt3 * inv4pi;
    return out;
}

SpinSymbol project_C1(const std::function<cplx(const Vec3&)>& f, const SphereQuadrature& quad) {
    std::vector<cplx> v(quad.size());
    for (std::size_t k = 0; k < quad.size(); ++k) v[k] = f(quad.nodes[k]);
    return project_C1_values(v.data(), quad);
}

SpinSymbol star_spin(const SpinSymbol& a, const SpinSymbol& b) {
    return {a.a0 * b.a0 + dot3(a.a, b.a),
            a.a0 * b.a + b.a0 * a.a + cplx(0, 1) * cross3(a.a, b.a)};
}

SpinSymbol poisson_s2(const SpinSymbol& a, const SpinSymbol& b) {
    return {0.0, -2.0 * cross3(a.a, b.a)};
}

cplx poisson_s2_point(const CVec3& grad_a, const CVec3& grad_b, const Vec3& n) {
    return -(2.0 / kSqrt3) * dot3(cross3(grad_a, grad_b), n.cast<cplx>());
}

SpinSymbol projected_phase_bracket(const SpinJet& a, const SpinJet& b) {
    return projected_product(a.dp, b.dq) - projected_product(a.dq, b.dp);
}

Matrix2 r_defect(const SpinJet& a, const SpinJet& b, const SphereQuadrature& quad) {
    const Matrix2 Aq = quantize_spin(a.dq), Ap = quantize_spin(a.dp);
    const Matrix2 Bq = quantize_spin(b.dq), Bp = quantize_spin(b.dp);
    const Matrix2 AB = Ap * Bq - Aq * Bp;
    const Matrix2 BA = Bp * Aq - Bq * Ap;
    auto bracket = [&](const Vec3& n) { return a.dp(n) * b.dq(n) - a.dq(n) * b.dp(n); };
    return AB - BA - 2.0 * quantize_spin(project_C1(bracket, quad));
}

} // namespace egorov
