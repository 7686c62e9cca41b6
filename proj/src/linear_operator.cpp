#include "egorov/linear_operator.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "egorov/errors.hpp"

namespace egorov {

NormResult operator_norm_ex(const LinearOperator& A, const NormOptions& opt) {
    if (!(opt.tol > 0.0) || opt.tol > 1e-2) throw DomainError("operator_norm: tol must lie in (0, 1e-2]");
    const Eigen::Index n = A.size();
    NormResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    const bool herm = A.hermitian();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
    v.normalize();

    const int kmax = static_cast<int>(std::min<Eigen::Index>(opt.max_iter, n));
    std::vector<CVector> basis;
    basis.reserve(kmax + 1);
    basis.push_back(v);
    std::vector<double> alpha, beta;
    CVector w(n), tmp(n);
    double prev = -1.0, est = 0.0;
    int stable = 0;
    for (int k = 0; k < kmax; ++k) {
        if (herm) {
            A.apply(basis[k], w);
        } else {
            A.apply(basis[k], tmp);
            A.apply_adjoint(tmp, w);
        }
        const double a = basis[k].dot(w).real();
        alpha.push_back(a);
        // Full reorthogonalization (two passes) keeps the Ritz values clean.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) w -= b * b.dot(w);
        const double bnorm = w.norm();

        const int m = static_cast<int>(alpha.size());
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub(std::max(m - 1, 0));
        for (int i = 0; i + 1 < m; ++i) sub(i) = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const Eigen::VectorXd& ev = es.eigenvalues();
        int idx = 0;
        for (int i = 1; i < m; ++i)
            if (std::abs(ev(i)) > std::abs(ev(idx))) idx = i;
        const double theta = std::abs(ev(idx));
        const double resid = bnorm * std::abs(es.eigenvectors()(m - 1, idx));
        est = herm ? theta : std::sqrt(std::max(theta, 0.0));
        res.iterations = k + 1;
        res.value = est;

        const double rel_resid = theta > 0.0 ? resid / theta : 0.0;
        const double change = prev >= 0.0 ? std::abs(est - prev) / std::max(est, 1e-300) : 1.0;
        stable = (change < 0.1 * opt.tol) ? stable + 1 : 0;
        if (theta == 0.0 || bnorm < 1e-14 * std::max(theta, 1e-300) || rel_resid < opt.tol || stable >= 3) {
            res.converged = true;
            return res;
        }
        prev = est;
        beta.push_back(bnorm);
        basis.push_back(w / bnorm);
    }
    if (kmax >= n) {
        res.converged = true;
        return res;
    }
    throw NumericalError("operator_norm: Lanczos did not converge", est);
}

double operator_norm(const LinearOperator& A, double tol) {
    NormOptions o;
    o.tol = tol;
    return operator_norm_ex(A, o).value;
}

double operator_norm(const CMatrix& A, double tol) {
    const bool herm = A.rows() == A.cols() && (A - A.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + A.cwiseAbs().maxCoeff());
    DenseOperator op(A, herm);
    return operator_norm(op, tol);
}

} // namespace egorov
