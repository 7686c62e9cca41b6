#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace egorov {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Matrix2 = Eigen::Matrix2cd;

/// Bilinear products on complex 3-vectors (Eigen's dot and cross conjugate complex operands).
inline cplx dot3(const CVec3& a, const CVec3& b) { return a(0) * b(0) + a(1) * b(1) + a(2) * b(2); }
inline CVec3 cross3(const CVec3& a, const CVec3& b) {
    return {a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0)};
}

/// Element of C1(S^2): the function n -> a0 + sqrt(3) a.n on the unit sphere.
struct SpinSymbol {
    cplx a0{0.0, 0.0};
    CVec3 a{CVec3::Zero()};

    SpinSymbol() = default;
    SpinSymbol(cplx scalar, const CVec3& vec) : a0(scalar), a(vec) {}

    static SpinSymbol constant(cplx c) { return {c, CVec3::Zero()}; }
    static SpinSymbol vector(const CVec3& v) { return {0.0, v}; }

    /// Value of the sphere function at unit vector n.
    cplx operator()(const Vec3& n) const;

    bool is_real(double tol = 0.0) const;

    SpinSymbol operator+(const SpinSymbol& o) const { return {a0 + o.a0, a + o.a}; }
    SpinSymbol operator-(const SpinSymbol& o) const { return {a0 - o.a0, a - o.a}; }
    SpinSymbol operator*(cplx s) const { return {a0 * s, a * s}; }
    bool operator==(const SpinSymbol& o) const { return a0 == o.a0 && a == o.a; }
    double max_abs() const;
};

/// Pauli matrix sigma_j, j in {0,1,2}.
const Matrix2& pauli(int j);

/// Stratonovich-Weyl kernel 1/2 (1 + sqrt(3) n.sigma). Throws DomainError if |n| != 1 within 1e-10.
Matrix2 sw_kernel(const Vec3& n);

/// Closed-form quantization a0 1 + a.sigma.
Matrix2 quantize_spin(const SpinSymbol& s);

/// Inverse of quantize_spin by trace pairing.
SpinSymbol dequantize_spin(const Matrix2& m);

/// Product rule on the sphere: Gauss-Legendre in cos(theta) times the trapezoid rule in phi.
struct SphereQuadrature {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    int degree = 0;  ///< polynomials in n up to this total degree are integrated exactly

    static SphereQuadrature product_rule(int n_theta, int n_phi);
    std::size_t size() const { return nodes.size(); }
    /// Weighted sum of f over the nodes (approximates the surface integral).
    cplx integrate(const std::function<cplx(const Vec3&)>& f) const;
};

/// Projection onto C1 via quadrature. Throws DomainError on non-positive weights.
SpinSymbol project_C1(const std::function<cplx(const Vec3&)>& f, const SphereQuadrature& quad);

/// Projection from precomputed values f(n_k) at the quadrature nodes.
SpinSymbol project_C1_values(const cplx* values, const SphereQuadrature& quad);

/// Stratonovich-Weyl star product on C1, closed form.
SpinSymbol star_spin(const SpinSymbol& a, const SpinSymbol& b);

/// Sphere Poisson bracket of two C1 symbols: -2 sqrt(3) (a x b).n, returned as (0, -2 a x b).
SpinSymbol poisson_s2(const SpinSymbol& a, const SpinSymbol& b);

/// Pointwise sphere bracket -(2/sqrt 3)(grad a x grad b).n from ambient gradients at n.
cplx poisson_s2_point(const CVec3& grad_a, const CVec3& grad_b, const Vec3& n);

/// First-order jet of a C1-valued phase-space symbol at one point (d = 1).
struct SpinJet {
    SpinSymbol dq;
    SpinSymbol dp;
};

/// Phase-space bracket {a,b}_{R^2} of two C1 jets as a sphere function, projected to C1 exactly.
SpinSymbol projected_phase_bracket(const SpinJet& a, const SpinJet& b);

/// R(a,b) = {A,B} - {B,A} - 2 Op_spin{a,b}_{R^2} for C1 jets; vanishes identically.
Matrix2 r_defect(const SpinJet& a, const SpinJet& b, const SphereQuadrature& quad);

} // namespace egorov
