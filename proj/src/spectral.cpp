#include "egorov/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

#include "egorov/errors.hpp"

namespace egorov {

namespace {

using PlanKey = std::tuple<int, int, int, int, int>;

fftw_plan get_plan(int n, int howmany, int stride, int dist, int sign) {
    static std::mutex mu;
    static std::map<PlanKey, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mu);
    const PlanKey key{n, howmany, stride, dist, sign};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    // Planning buffer only; execution uses the new-array interface.
    const std::size_t len = static_cast<std::size_t>((n - 1) * stride + (howmany - 1) * dist + 1);
    fftw_complex* buf = fftw_alloc_complex(len);
    int dims[1] = {n};
    fftw_plan p = fftw_plan_many_dft(1, dims, howmany, buf, nullptr, stride, dist, buf, nullptr, stride,
                                     dist, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw NumericalError("FFTW planning failed");
    cache.emplace(key, p);
    return p;
}

double wavenumber(int k, int n, double L) {
    const int ks = k < n / 2 ? k : k - n;
    return std::numbers::pi * ks / L;
}

} // namespace

void fft_many(cplx* data, int n, int howmany, int stride, int dist, int sign) {
    fftw_plan p = get_plan(n, howmany, stride, dist, sign);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, d, d);
}

double PhaseGrid::kq(int k) const { return wavenumber(k, Nq, Lq); }
double PhaseGrid::kp(int k) const { return wavenumber(k, Np, Lp); }

bool PhaseGrid::same_as(const PhaseGrid& o) const {
    return Nq == o.Nq && Np == o.Np && std::abs(Lq - o.Lq) < 1e-12 * Lq && std::abs(Lp - o.Lp) < 1e-12 * Lp;
}

SymbolField SymbolField::zeros(const PhaseGrid& g) {
    SymbolField f;
    f.grid = g;
    for (auto& c : f.comp) c = Eigen::MatrixXcd::Zero(g.Nq, g.Np);
    return f;
}

SymbolField SymbolField::sample(const PhaseGrid& g, const std::function<SpinSymbol(double, double)>& fn) {
    SymbolField f = zeros(g);
    for (int j = 0; j < g.Np; ++j)
        for (int i = 0; i < g.Nq; ++i) f.set(i, j, fn(g.q(i), g.p(j)));
    return f;
}

SpinSymbol SymbolField::at(int i, int j) const {
    return {comp[0](i, j), CVec3(comp[1](i, j), comp[2](i, j), comp[3](i, j))};
}

void SymbolField::set(int i, int j, const SpinSymbol& s) {
    comp[0](i, j) = s.a0;
    for (int c = 0; c < 3; ++c) comp[c + 1](i, j) = s.a(c);
}

SymbolField& SymbolField::operator+=(const SymbolField& o) {
    for (int c = 0; c < 4; ++c) comp[c] += o.comp[c];
    return *this;
}

SymbolField& SymbolField::operator-=(const SymbolField& o) {
    for (int c = 0; c < 4; ++c) comp[c] -= o.comp[c];
    return *this;
}

SymbolField& SymbolField::operator*=(cplx s) {
    for (auto& c : comp) c *= s;
    return *this;
}

double SymbolField::sup_norm() const {
    double m = 0.0;
    for (const auto& c : comp) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
}

double SymbolField::boundary_mass(int rim) const {
    double m = 0.0;
    for (const auto& c : comp) {
        const int nq = static_cast<int>(c.rows()), np = static_cast<int>(c.cols());
        for (int j = 0; j < np; ++j)
            for (int i = 0; i < nq; ++i)
                if (i < rim || i >= nq - rim || j < rim || j >= np - rim) m = std::max(m, std::abs(c(i, j)));
    }
    return m;
}

SpinSymbol SymbolField::interpolate(double q, double p) const {
    const PhaseGrid& g = grid;
    SpinSymbol out;
    Eigen::VectorXcd eq(g.Nq), ep(g.Np);
    for (int k = 0; k < g.Nq; ++k) eq(k) = std::exp(cplx(0, g.kq(k) * (q + g.Lq)));
    for (int k = 0; k < g.Np; ++k) ep(k) = std::exp(cplx(0, g.kp(k) * (p + g.Lp)));
    // Nyquist modes are split symmetrically so real data interpolate to real values.
    if (g.Nq % 2 == 0) eq(g.Nq / 2) = std::cos(std::numbers::pi * g.Nq / 2 * (q + g.Lq) / g.Lq);
    if (g.Np % 2 == 0) ep(g.Np / 2) = std::cos(std::numbers::pi * g.Np / 2 * (p + g.Lp) / g.Lp);
    for (int c = 0; c < 4; ++c) {
        Eigen::MatrixXcd C = comp[c];
        fft_many(C.data(), g.Nq, g.Np, 1, g.Nq, FFTW_FORWARD);
        fft_many(C.data(), g.Np, g.Nq, g.Nq, 1, FFTW_FORWARD);
        const cplx v = (eq.transpose() * C * ep).value() / static_cast<double>(g.Nq * g.Np);
        if (c == 0) out.a0 = v;
        else out.a(c - 1) = v;
    }
    return out;
}

Eigen::MatrixXcd d_dq(const Eigen::MatrixXcd& f, const PhaseGrid& g) {
    Eigen::MatrixXcd F = f;
    fft_many(F.data(), g.Nq, g.Np, 1, g.Nq, FFTW_FORWARD);
    for (int k = 0; k < g.Nq; ++k) {
        const cplx m = (g.Nq % 2 == 0 && k == g.Nq / 2) ? cplx(0) : cplx(0, g.kq(k) / g.Nq);
        F.row(k) *= m;
    }
    fft_many(F.data(), g.Nq, g.Np, 1, g.Nq, FFTW_BACKWARD);
    return F;
}

Eigen::MatrixXcd d_dp(const Eigen::MatrixXcd& f, const PhaseGrid& g) {
    Eigen::MatrixXcd F = f;
    fft_many(F.data(), g.Np, g.Nq, g.Nq, 1, FFTW_FORWARD);
    for (int k = 0; k < g.Np; ++k) {
        const cplx m = (g.Np % 2 == 0 && k == g.Np / 2) ? cplx(0) : cplx(0, g.kp(k) / g.Np);
        F.col(k) *= m;
    }
    fft_many(F.data(), g.Np, g.Nq, g.Nq, 1, FFTW_BACKWARD);
    return F;
}

Eigen::MatrixXcd apply_p_multiplier(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& mult) {
    const int nq = static_cast<int>(f.rows()), np = static_cast<int>(f.cols());
    Eigen::MatrixXcd F = f;
    fft_many(F.data(), np, nq, nq, 1, FFTW_FORWARD);
    F = F.cwiseProduct(mult) / static_cast<double>(np);
    fft_many(F.data(), np, nq, nq, 1, FFTW_BACKWARD);
    return F;
}

} // namespace egorov
