#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "egorov/spin_weyl.hpp"

namespace egorov {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Square linear map on C^n applied matrix-free.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual Eigen::Index size() const = 0;
    virtual void apply(const CVector& x, CVector& y) const = 0;
    virtual void apply_adjoint(const CVector& x, CVector& y) const = 0;
    /// True if the operator is known to be Hermitian (enables plain Lanczos).
    virtual bool hermitian() const { return false; }
};

class DenseOperator : public LinearOperator {
public:
    explicit DenseOperator(CMatrix m, bool herm = false) : m_(std::move(m)), herm_(herm) {}
    Eigen::Index size() const override { return m_.rows(); }
    void apply(const CVector& x, CVector& y) const override { y.noalias() = m_ * x; }
    void apply_adjoint(const CVector& x, CVector& y) const override { y.noalias() = m_.adjoint() * x; }
    bool hermitian() const override { return herm_; }
    const CMatrix& matrix() const { return m_; }

private:
    CMatrix m_;
    bool herm_;
};

/// Operator given by closures.
class FunctionOperator : public LinearOperator {
public:
    using Fn = std::function<void(const CVector&, CVector&)>;
    FunctionOperator(Eigen::Index n, Fn apply, Fn adjoint, bool herm)
        : n_(n), f_(std::move(apply)), fa_(std::move(adjoint)), herm_(herm) {}
    Eigen::Index size() const override { return n_; }
    void apply(const CVector& x, CVector& y) const override { f_(x, y); }
    void apply_adjoint(const CVector& x, CVector& y) const override { fa_(x, y); }
    bool hermitian() const override { return herm_; }

private:
    Eigen::Index n_;
    Fn f_, fa_;
    bool herm_;
};

struct NormOptions {
    double tol = 1e-6;
    int max_iter = 200;
    std::uint64_t seed = 12345;
};

struct NormResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Largest singular value by Lanczos with full reorthogonalization, on A itself when A is
/// Hermitian and on A*A otherwise. Throws NumericalError (with best estimate) on non-convergence.
NormResult operator_norm_ex(const LinearOperator& A, const NormOptions& opt = {});
double operator_norm(const LinearOperator& A, double tol = 1e-6);
double operator_norm(const CMatrix& A, double tol = 1e-6);

} // namespace egorov
