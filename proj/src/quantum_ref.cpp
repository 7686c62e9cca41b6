#include "egorov/quantum_ref.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fftw3.h>

#include "egorov/errors.hpp"

namespace egorov {

namespace {
const cplx kI(0.0, 1.0);
}

std::function<SpinSymbol(double, double)> hamiltonian_symbol(const ModelSpec& m) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear) throw DomainError("hamiltonian_symbol: harmonic-linear mode only");
    return [m](double q, double p) {
        const double w2 = m.omega * m.omega;
        const double e = m.epsilon;
        SpinSymbol s;
        s.a0 = 0.5 * (p * p + w2 * q * q) + m.V(q) + e * (m.h0_offset(0) + m.h0_offset(1) * q + m.h0_offset(2) * p);
        s.a = (e * (m.h_c + q * m.h_q + p * m.h_p)).cast<cplx>();
        return s;
    };
}

GridOperator build_hamiltonian(const ModelSpec& m, const Grid& g) {
    if (std::abs(m.epsilon - g.eps) > 1e-14 * g.eps) throw DomainError("build_hamiltonian: grid eps differs from model eps");
    return quantize_sigma(hamiltonian_symbol(m), g);
}

Propagator::Propagator(const GridOperator& H, double eps) : eps_(eps) {
    if (!(eps > 0.0)) throw DomainError("Propagator: eps must be positive");
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + H.cwiseAbs().maxCoeff()))
        throw DomainError("Propagator: Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    if (es.info() != Eigen::Success) throw NumericalError("Propagator: eigen-decomposition failed");
    E_ = es.eigenvalues();
    V_ = es.eigenvectors();
}

SpinorState Propagator::propagate(const SpinorState& psi, double t) const {
    CVector c = V_.adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(-kI * (E_(k) * t / eps_));
    return V_ * c;
}

GridOperator Propagator::unitary(double t) const {
    Eigen::VectorXcd ph(E_.size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(-kI * (E_(k) * t / eps_));
    return V_ * ph.asDiagonal() * V_.adjoint();
}

GridOperator Propagator::heisenberg(const GridOperator& A, double t) const {
    Eigen::VectorXcd ph(E_.size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(-kI * (E_(k) * t / eps_));
    // In the eigenbasis: (U* A U)_{kl} = conj(ph_k) A'_{kl} ph_l
    CMatrix Ap = V_.adjoint() * A * V_;
    Ap = ph.conjugate().asDiagonal() * Ap * ph.asDiagonal();
    return V_ * Ap * V_.adjoint();
}

SpinorState propagate(const Propagator& P, const SpinorState& psi, double t) { return P.propagate(psi, t); }
GridOperator heisenberg_evolve(const Propagator& P, const GridOperator& A, double t) { return P.heisenberg(A, t); }

GridHamiltonian::GridHamiltonian(const Grid& g, std::function<double(double)> U,
                                 std::function<Vec3(double)> spin_q, const Vec3& spin_p, double scalar_p,
                                 double eps)
    : N_(g.N), b_(spin_p), cp_(scalar_p), eps_(eps) {
    T_.resize(N_);
    P_.resize(N_);
    U_.resize(N_);
    a_.resize(3, N_);
    double amax = 0.0;
    for (int j = 0; j < N_; ++j) {
        P_(j) = g.p_of_fft(j);
        T_(j) = 0.5 * P_(j) * P_(j);
        U_(j) = U(g.x(j));
        a_.col(j) = spin_q(g.x(j));
        amax = std::max(amax, a_.col(j).norm());
    }
    const double pm = g.p_max();
    const double spin = eps * (amax + b_.norm() * pm) + eps * std::abs(cp_) * pm;
    lo_ = U_.minCoeff() - spin;
    hi_ = T_.maxCoeff() + U_.maxCoeff() + spin;
}

GridHamiltonian GridHamiltonian::from_model(const ModelSpec& m, const Grid& g) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear) throw DomainError("GridHamiltonian: harmonic-linear mode only");
    const double e = m.epsilon;
    auto U = [m, e](double q) {
        return 0.5 * m.omega * m.omega * q * q + m.V(q) + e * (m.h0_offset(0) + m.h0_offset(1) * q);
    };
    auto a = [m](double q) -> Vec3 { return m.h_c + q * m.h_q; };
    return GridHamiltonian(g, U, a, m.h_p, m.h0_offset(2), e);
}

void GridHamiltonian::apply(const CVector& x, CVector& y) const {
    const int N = N_;
    CMatrix f(N, 2);
    f.col(0) = x.head(N);
    f.col(1) = x.tail(N);
    fft_many(f.data(), N, 2, 1, N, FFTW_FORWARD);
    CMatrix tk(N, 2), pk(N, 2);
    for (int c = 0; c < 2; ++c) {
        tk.col(c) = f.col(c).cwiseProduct(T_.cast<cplx>()) / double(N);
        pk.col(c) = f.col(c).cwiseProduct(P_.cast<cplx>()) / double(N);
    }
    fft_many(tk.data(), N, 2, 1, N, FFTW_BACKWARD);
    fft_many(pk.data(), N, 2, 1, N, FFTW_BACKWARD);
    y.resize(2 * N);
    const cplx bm = b_(0) - kI * b_(1), bp = b_(0) + kI * b_(1);
    for (int j = 0; j < N; ++j) {
        const cplx u = x(j), d = x(N + j);
        const cplx pu = pk(j, 0), pd = pk(j, 1);
        const cplx am(a_(0, j), -a_(1, j)), ap(a_(0, j), a_(1, j));
        y(j) = tk(j, 0) + U_(j) * u + eps_ * cp_ * pu +
               eps_ * (a_(2, j) * u + am * d + b_(2) * pu + bm * pd);
        y(N + j) = tk(j, 1) + U_(j) * d + eps_ * cp_ * pd +
                   eps_ * (ap * u - a_(2, j) * d + bp * pu - b_(2) * pd);
    }
}

std::vector<double> bessel_j_sequence(double z, int kmax) {
    if (z < 0.0) throw DomainError("bessel_j_sequence: z must be non-negative");
    std::vector<double> J(kmax + 1, 0.0);
    if (z < 1e-300) {
        J[0] = 1.0;
        return J;
    }
    const int start = std::max(kmax, static_cast<int>(z)) + 40 + static_cast<int>(10.0 * std::cbrt(z));
    std::vector<double> w(start + 2, 0.0);
    w[start + 1] = 0.0;
    w[start] = 1e-250;
    for (int k = start; k >= 1; --k) {
        w[k - 1] = (2.0 * k / z) * w[k] - w[k + 1];
        if (std::abs(w[k - 1]) > 1e250) {
            for (int i = k - 1; i <= start + 1; ++i) w[i] *= 1e-250;
        }
    }
    double norm = w[0];
    for (int k = 2; k <= start; k += 2) norm += 2.0 * w[k];
    for (int k = 0; k <= kmax; ++k) J[k] = w[k] / norm;
    return J;
}

ChebyshevPropagator::ChebyshevPropagator(std::shared_ptr<const LinearOperator> H, double emin, double emax,
                                         double eps, double tol)
    : H_(std::move(H)), eps_(eps), tol_(tol) {
    if (!(emax > emin)) throw DomainError("ChebyshevPropagator: empty spectral interval");
    if (!H_->hermitian()) throw DomainError("ChebyshevPropagator: Hamiltonian must be Hermitian");
    centre_ = 0.5 * (emax + emin);
    radius_ = 0.5 * (emax - emin) * 1.01;
}

ChebyshevPropagator::ChebyshevPropagator(std::shared_ptr<const GridHamiltonian> H, double tol)
    : ChebyshevPropagator(H, H->spectral_bounds().first, H->spectral_bounds().second, H->eps(), tol) {}

int ChebyshevPropagator::terms(double t) const {
    const double z = radius_ * std::abs(t) / eps_;
    return static_cast<int>(z + 20.0 + 8.0 * std::cbrt(z));
}

void ChebyshevPropagator::apply(const CVector& psi, double t, CVector& out) const {
    if (t == 0.0) {
        out = psi;
        return;
    }
    const double z = radius_ * std::abs(t) / eps_;
    const double sgn = t > 0.0 ? 1.0 : -1.0;
    int K = terms(t);
    const std::vector<double> J = bessel_j_sequence(z, K);
    // trim the tail
    while (K > static_cast<int>(z) + 1 && std::abs(J[K]) < tol_ * 1e-2) --K;

    auto Hs = [&](const CVector& v, CVector& w) {
        H_->apply(v, w);
        w = (w - centre_ * v) / radius_;
    };
    CVector phi_prev = psi, phi, phi_next;
    Hs(phi_prev, phi);
    // coefficient (2 - delta_k0) (-i sgn)^k J_k(z)
    cplx ik(1.0, 0.0);
    const cplx step(0.0, -sgn);
    out = J[0] * phi_prev;
    ik *= step;
    out += 2.0 * ik * J[1] * phi;
    for (int k = 2; k <= K; ++k) {
        Hs(phi, phi_next);
        phi_next = 2.0 * phi_next - phi_prev;
        ik *= step;
        out += 2.0 * ik * J[k] * phi_next;
        phi_prev.swap(phi);
        phi.swap(phi_next);
    }
    out *= std::exp(-kI * (centre_ * t / eps_));
}

SpinorState ChebyshevPropagator::propagate(const SpinorState& psi, double t) const {
    CVector out;
    apply(psi, t, out);
    return out;
}

HeisenbergDifference::HeisenbergDifference(std::shared_ptr<const ChebyshevPropagator> U,
                                           std::shared_ptr<const LinearOperator> A,
                                           std::shared_ptr<const LinearOperator> B, double t)
    : U_(std::move(U)), A_(std::move(A)), B_(std::move(B)), t_(t) {
    if (B_ && B_->size() != A_->size()) throw DomainError("HeisenbergDifference: size mismatch");
}

void HeisenbergDifference::apply(const CVector& x, CVector& y) const {
    CVector u, au;
    U_->apply(x, t_, u);
    A_->apply(u, au);
    U_->apply(au, -t_, y);
    if (B_) {
        CVector bx;
        B_->apply(x, bx);
        y -= bx;
    }
}

void HeisenbergDifference::apply_adjoint(const CVector& x, CVector& y) const {
    CVector u, au;
    U_->apply(x, t_, u);
    A_->apply_adjoint(u, au);
    U_->apply(au, -t_, y);
    if (B_) {
        CVector bx;
        B_->apply_adjoint(x, bx);
        y -= bx;
    }
}

SpinorState coherent_state(const Grid& g, double q0, double p0, const Vec3& bloch) {
    if (std::abs(bloch.norm() - 1.0) > 1e-10) throw DomainError("coherent_state: Bloch vector must be a unit vector");
    const double th = std::acos(std::clamp(bloch(2), -1.0, 1.0));
    const double ph = std::atan2(bloch(1), bloch(0));
    const cplx up = std::cos(0.5 * th), dn = std::exp(kI * ph) * std::sin(0.5 * th);
    SpinorState psi(2 * g.N);
    for (int j = 0; j < g.N; ++j) {
        const double x = g.x(j);
        const cplx f = std::exp(-(x - q0) * (x - q0) / (2.0 * g.eps) + kI * (p0 * x / g.eps));
        psi(j) = up * f;
        psi(g.N + j) = dn * f;
    }
    psi.normalize();
    return psi;
}

cplx expectation(const LinearOperator& A, const SpinorState& psi) {
    CVector y;
    A.apply(psi, y);
    return psi.dot(y);
}

} // namespace egorov
