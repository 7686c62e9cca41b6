#include "egorov/weyl_grid.hpp"

#include <cmath>
#include <numbers>

#include <fftw3.h>

#include "egorov/errors.hpp"

namespace egorov {

namespace {

const double kSqrt3 = std::sqrt(3.0);
const cplx kI(0.0, 1.0);

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int wrap_sep(int s, int N) {
    s %= N;
    if (s > N / 2) s -= N;
    if (s <= -N / 2) s += N;
    return s;
}

int mod(int a, int n) {
    int r = a % n;
    return r < 0 ? r + n : r;
}

// F(r, s mod N) = (1/N) sum_m f(X_r, p_m) e^{2 pi i m s / N} for every half-grid row r.
CMatrix kernel_table(const Eigen::MatrixXcd& f_dual, int N) {
    CMatrix F = f_dual;  // (2N) x N
    const int R = static_cast<int>(F.rows());
    fft_many(F.data(), N, R, R, 1, FFTW_BACKWARD);
    for (int s = 0; s < N; ++s) F.col(s) *= ((s % 2) ? -1.0 : 1.0) / N;
    return F;
}

CMatrix assemble_spin(const std::array<CMatrix, 4>& K) {
    const Eigen::Index N = K[0].rows();
    CMatrix A(2 * N, 2 * N);
    A.topLeftCorner(N, N) = K[0] + K[3];
    A.topRightCorner(N, N) = K[1] - kI * K[2];
    A.bottomLeftCorner(N, N) = K[1] + kI * K[2];
    A.bottomRightCorner(N, N) = K[0] - K[3];
    return A;
}

void check_support(const SymbolField& a, double tol) {
    const double mx = a.sup_norm();
    if (mx > 0.0 && a.boundary_mass() > tol * std::max(1.0, mx))
        throw DomainError("quantize: symbol support exceeds the box (boundary mass above 1e-8)");
}

} // namespace

Grid::Grid(int n, double l, double e) : N(n), L(l), eps(e) {
    if (!is_pow2(N) || N < 4) throw DomainError("Grid: N must be a power of two");
    if (!(L > 0.0) || !(eps > 0.0)) throw DomainError("Grid: L and eps must be positive");
}

double Grid::p_of_fft(int k) const {
    const int ks = k < N / 2 ? k : k - N;
    return ks * dp();
}

Grid Grid::for_support(double L, double p_needed, double eps, int min_n) {
    const double need = 2.0 * L * p_needed / (std::numbers::pi * eps);
    int n = min_n;
    while (n < need) n *= 2;
    return Grid(n, L, eps);
}

CMatrix weyl_quantize_scalar(const Eigen::MatrixXcd& f_dual, const Grid& g) {
    const int N = g.N;
    if (f_dual.rows() != 2 * N || f_dual.cols() != N)
        throw DomainError("weyl_quantize_scalar: symbol is not sampled on the dual grid");
    const CMatrix F = kernel_table(f_dual, N);
    CMatrix K(N, N);
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j) {
            const int s = wrap_sep(j - k, N);
            K(j, k) = F(mod(2 * k + s, 2 * N), mod(s, N));
        }
    return K;
}

CMatrix weyl_quantize_scalar(const std::function<cplx(double, double)>& f, const Grid& g) {
    const PhaseGrid d = g.dual();
    Eigen::MatrixXcd v(d.Nq, d.Np);
    for (int j = 0; j < d.Np; ++j)
        for (int i = 0; i < d.Nq; ++i) v(i, j) = f(d.q(i), d.p(j));
    return weyl_quantize_scalar(v, g);
}

GridOperator quantize_sigma(const SymbolField& a, const Grid& g) {
    if (!a.grid.same_as(g.dual())) throw DomainError("quantize_sigma: field is not on the dual grid");
    check_support(a, 1e-8);
    std::array<CMatrix, 4> K;
    for (int c = 0; c < 4; ++c) K[c] = weyl_quantize_scalar(a.comp[c], g);
    return assemble_spin(K);
}

GridOperator quantize_sigma(const std::function<SpinSymbol(double, double)>& a, const Grid& g) {
    const SymbolField f = SymbolField::sample(g.dual(), a);
    std::array<CMatrix, 4> K;
    for (int c = 0; c < 4; ++c) K[c] = weyl_quantize_scalar(f.comp[c], g);
    return assemble_spin(K);
}

SymbolField wigner_transform(const GridOperator& A, const Grid& g) {
    const int N = g.N;
    if (A.rows() != 2 * N || A.cols() != 2 * N) throw DomainError("wigner_transform: size mismatch");
    const CMatrix B00 = A.topLeftCorner(N, N), B01 = A.topRightCorner(N, N);
    const CMatrix B10 = A.bottomLeftCorner(N, N), B11 = A.bottomRightCorner(N, N);
    const std::array<CMatrix, 4> K = {0.5 * (B00 + B11), 0.5 * (B01 + B10), 0.5 * kI * (B01 - B10),
                                      0.5 * (B00 - B11)};
    // Even separations at x_j give f(p) + f(p + p_max); odd separations at the midpoints give the
    // half-shifted f(p) - f(p + p_max). Undoing the half shift in q separates the two.
    Eigen::VectorXcd shift(N);
    for (int k = 0; k < N; ++k) {
        const int ks = k < N / 2 ? k : k - N;
        shift(k) = (k == N / 2) ? cplx(0.0) : std::exp(kI * (std::numbers::pi * ks / N));
    }
    SymbolField out = SymbolField::zeros(g.dual());
    CMatrix even(N, N), odd(N, N);
    for (int c = 0; c < 4; ++c) {
        even.setZero();
        odd.setZero();
        for (int j = 0; j < N; ++j)
            for (int s = -N / 2 + 1; s <= N / 2; ++s) {
                const double sg = (mod(s, 2)) ? -1.0 : 1.0;
                if (mod(s, 2) == 0) {
                    even(j, mod(s, N)) = sg * K[c](mod(j + s / 2, N), mod(j - s / 2, N));
                } else {
                    const int r = 2 * j + 1;
                    odd(j, mod(s, N)) = sg * K[c](mod((r + s) / 2, N), mod((r - s) / 2, N));
                }
            }
        fft_many(even.data(), N, N, N, 1, FFTW_FORWARD);
        fft_many(odd.data(), N, N, N, 1, FFTW_FORWARD);
        // odd rows sit at x_j + dx/2: shift back to x_j
        fft_many(odd.data(), N, N, 1, N, FFTW_FORWARD);
        for (int k = 0; k < N; ++k) odd.row(k) *= (k == N / 2) ? cplx(0.0) : 1.0 / (shift(k) * double(N));
        fft_many(odd.data(), N, N, 1, N, FFTW_BACKWARD);
        CMatrix f = even + odd;
        CMatrix half = f;
        fft_many(half.data(), N, N, 1, N, FFTW_FORWARD);
        for (int k = 0; k < N; ++k) half.row(k) *= shift(k) / double(N);
        fft_many(half.data(), N, N, 1, N, FFTW_BACKWARD);
        for (int j = 0; j < N; ++j) {
            out.comp[c].row(2 * j) = f.row(j);
            out.comp[c].row(2 * j + 1) = half.row(j);
        }
    }
    return out;
}

BandedOperator::BandedOperator(const SymbolField& a, const Grid& g, bool spin, double tol)
    : N_(g.N), spin_(spin) {
    const PhaseGrid& pg = a.grid;
    if (std::abs(pg.Lq - g.L) > 1e-12 * g.L) throw DomainError("BandedOperator: field box differs from grid box");
    if (pg.Lp > g.p_max() * (1.0 + 1e-12)) throw DomainError("BandedOperator: grid momentum range too small");
    if (2 * N_ < pg.Nq) throw DomainError("BandedOperator: position grid coarser than the field");
    const int ncomp = spin ? 4 : 1;
    const int Nq = pg.Nq, Np = pg.Np;

    std::array<CMatrix, 4> C;
    herm_ = true;
    for (int c = 0; c < ncomp; ++c) {
        C[c] = a.comp[c];
        if (C[c].imag().cwiseAbs().maxCoeff() > 1e-14 * (1.0 + C[c].cwiseAbs().maxCoeff())) herm_ = false;
        fft_many(C[c].data(), Nq, Np, 1, Nq, FFTW_FORWARD);
        fft_many(C[c].data(), Np, Nq, Nq, 1, FFTW_FORWARD);
        C[c] /= static_cast<double>(Nq) * Np;
    }

    const double dpg = g.dp();
    const int m_lo = static_cast<int>(std::ceil(-pg.Lp / dpg - 1e-9));
    const int m_hi = static_cast<int>(std::ceil(pg.Lp / dpg - 1e-9)) - 1;
    const int M = m_hi - m_lo + 1;
    int smax = static_cast<int>(std::ceil(0.5 * Np * g.p_max() / pg.Lp)) + 64;
    smax = std::min(smax, N_ / 2 - 1);

    // Psi(l, s) = (1/N) sum_{m in window} e^{i pi l (p_m + Lp)/Lp} e^{2 pi i m s / N}
    CMatrix Psi(Np, 2 * smax + 1);
    for (int li = 0; li < Np; ++li) {
        const int l = li < Np / 2 ? li : li - Np;
        const cplx pre = std::exp(kI * (std::numbers::pi * l));
        for (int s = -smax; s <= smax; ++s) {
            const double th = std::numbers::pi * l * dpg / pg.Lp + 2.0 * std::numbers::pi * s / N_;
            const cplx r = std::exp(kI * th);
            cplx sum;
            if (std::abs(1.0 - r) < 1e-6) {
                sum = 0.0;
                for (int m = m_lo; m <= m_hi; ++m) sum += std::exp(kI * (th * m));
            } else {
                sum = std::exp(kI * (th * m_lo)) * (1.0 - std::exp(kI * (th * M))) / (1.0 - r);
            }
            Psi(li, s + smax) = pre * sum / static_cast<double>(N_);
        }
    }

    std::array<CMatrix, 4> G;
    double gmax = 0.0;
    for (int c = 0; c < ncomp; ++c) {
        G[c] = C[c] * Psi;  // Nq x (2 smax + 1)
        gmax = std::max(gmax, G[c].cwiseAbs().maxCoeff());
    }
    B_ = 0;
    std::vector<double> col(2 * smax + 1, 0.0);
    for (int c = 0; c < ncomp; ++c)
        for (int s = -smax; s <= smax; ++s) {
            const double v = G[c].col(s + smax).cwiseAbs().maxCoeff();
            col[s + smax] = std::max(col[s + smax], v);
            if (v > tol * gmax) B_ = std::max(B_, std::abs(s));
        }
    // Slow (1/s) tails come from the momentum window cutting a field that is not exactly zero at
    // its edge. They are dropped when small and their norm is estimated instead.
    const double edge = std::max(col.front(), col.back());
    if (B_ >= smax && smax < N_ / 2 - 1 && edge > 1e-3 * gmax)
        throw NumericalError("BandedOperator: kernel does not decay within the band estimate");
    B_ = std::min(B_, smax);
    trunc_ = 0.0;
    for (int s = B_ + 1; s <= smax; ++s) trunc_ += col[s + smax] + col[smax - s];
    if (smax < N_ / 2 - 1) trunc_ += 2.0 * edge * smax * std::log(0.5 * N_ / smax);
    trunc_ *= spin_ ? 2.0 : 1.0;

    Eigen::VectorXcd buf(2 * N_);
    std::array<CMatrix, 4> K;
    for (int c = 0; c < ncomp; ++c) {
        K[c] = CMatrix::Zero(N_, 2 * B_ + 1);
        if (G[c].cwiseAbs().maxCoeff() == 0.0) continue;
        for (int s = -B_; s <= B_; ++s) {
            buf.setZero();
            for (int ki = 0; ki < Nq; ++ki) {
                const int k = ki < Nq / 2 ? ki : ki - Nq;
                buf(mod(k, 2 * N_)) += G[c](ki, s + smax);
            }
            fft_many(buf.data(), 2 * N_, 1, 1, 2 * N_, FFTW_BACKWARD);
            for (int j = 0; j < N_; ++j) K[c](j, s + B_) = buf(mod(2 * j - s, 2 * N_));
        }
    }
    // Spin blocks [[K0 + K3, K1 - i K2], [K1 + i K2, K0 - K3]]; all-zero blocks are skipped.
    if (!spin_) {
        blocks_[0] = std::move(K[0]);
    } else {
        blocks_[0] = K[0] + K[3];
        blocks_[1] = K[1] - kI * K[2];
        blocks_[2] = K[1] + kI * K[2];
        blocks_[3] = K[0] - K[3];
    }
    for (int b = 0; b < 4; ++b) nonzero_[b] = blocks_[b].size() > 0 && blocks_[b].cwiseAbs().maxCoeff() > 0.0;
}

namespace {

// out += D x with D[j, j - s] = band(j, s + B) (periodic indices).
void band_mv(const CMatrix& band, int B, const cplx* in, cplx* out, int N) {
    for (int s = -B; s <= B; ++s) {
        const cplx* d = band.data() + static_cast<Eigen::Index>(s + B) * N;
        // j - s in [0, N) for j in [lo, hi)
        const int lo = std::max(0, s), hi = std::min(N, N + s);
        for (int j = lo; j < hi; ++j) out[j] += d[j] * in[j - s];
        for (int j = 0; j < lo; ++j) out[j] += d[j] * in[j - s + N];
        for (int j = hi; j < N; ++j) out[j] += d[j] * in[j - s - N];
    }
}

// out += D* x
void band_mv_adjoint(const CMatrix& band, int B, const cplx* in, cplx* out, int N) {
    for (int s = -B; s <= B; ++s) {
        const cplx* d = band.data() + static_cast<Eigen::Index>(s + B) * N;
        const int lo = std::max(0, s), hi = std::min(N, N + s);
        for (int j = lo; j < hi; ++j) out[j - s] += std::conj(d[j]) * in[j];
        for (int j = 0; j < lo; ++j) out[j - s + N] += std::conj(d[j]) * in[j];
        for (int j = hi; j < N; ++j) out[j - s - N] += std::conj(d[j]) * in[j];
    }
}

} // namespace

void BandedOperator::apply_impl(const CVector& x, CVector& y, bool adjoint) const {
    const int N = N_;
    auto mv = adjoint ? band_mv_adjoint : band_mv;
    y = CVector::Zero(size());
    if (!spin_) {
        mv(blocks_[0], B_, x.data(), y.data(), N);
        return;
    }
    // Block (r, c) maps component c to component r; the adjoint swaps the roles.
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            const int b = 2 * r + c;
            if (!nonzero_[b]) continue;
            if (!adjoint)
                mv(blocks_[b], B_, x.data() + c * N, y.data() + r * N, N);
            else
                mv(blocks_[b], B_, x.data() + r * N, y.data() + c * N, N);
        }
}

void BandedOperator::apply(const CVector& x, CVector& y) const { apply_impl(x, y, false); }
void BandedOperator::apply_adjoint(const CVector& x, CVector& y) const { apply_impl(x, y, true); }

CMatrix BandedOperator::to_dense() const {
    const Eigen::Index n = size();
    CMatrix D(n, n);
    CVector e = CVector::Zero(n), col;
    for (Eigen::Index k = 0; k < n; ++k) {
        e(k) = 1.0;
        apply(e, col);
        D.col(k) = col;
        e(k) = 0.0;
    }
    return D;
}

void SumOperator::add(std::shared_ptr<const LinearOperator> op, cplx coeff) {
    if (!terms_.empty() && op->size() != terms_.front().first->size())
        throw DomainError("SumOperator: size mismatch");
    terms_.emplace_back(std::move(op), coeff);
}

Eigen::Index SumOperator::size() const { return terms_.empty() ? 0 : terms_.front().first->size(); }

void SumOperator::apply(const CVector& x, CVector& y) const {
    y = CVector::Zero(size());
    CVector t;
    for (const auto& [op, c] : terms_) {
        op->apply(x, t);
        y += c * t;
    }
}

void SumOperator::apply_adjoint(const CVector& x, CVector& y) const {
    y = CVector::Zero(size());
    CVector t;
    for (const auto& [op, c] : terms_) {
        op->apply_adjoint(x, t);
        y += std::conj(c) * t;
    }
}

bool SumOperator::hermitian() const {
    for (const auto& [op, c] : terms_)
        if (!op->hermitian() || std::abs(c.imag()) > 0.0) return false;
    return true;
}

SymbolField sigma_bracket(const ModelSpec& m, const SymbolField& a) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear) throw DomainError("sigma_bracket: harmonic-linear mode only");
    const PhaseGrid& g = a.grid;
    std::array<CMatrix, 4> dq, dp;
    for (int c = 0; c < 4; ++c) {
        dq[c] = d_dq(a.comp[c], g);
        dp[c] = d_dp(a.comp[c], g);
    }
    const double eps = m.epsilon, w2 = m.omega * m.omega;
    const double cq = m.h0_offset(1), cp = m.h0_offset(2);
    SymbolField out = SymbolField::zeros(g);
    for (int j = 0; j < g.Np; ++j) {
        const double p = g.p(j);
        for (int i = 0; i < g.Nq; ++i) {
            const double q = g.q(i);
            const double fq = w2 * q + m.dV(q);
            const Vec3 h = m.h_c + q * m.h_q + p * m.h_p;
            CVec3 dqa(dq[1](i, j), dq[2](i, j), dq[3](i, j));
            CVec3 dpa(dp[1](i, j), dp[2](i, j), dp[3](i, j));
            CVec3 av(a.comp[1](i, j), a.comp[2](i, j), a.comp[3](i, j));
            out.comp[0](i, j) = p * dq[0](i, j) - fq * dp[0](i, j) +
                                eps * (cp * dq[0](i, j) - cq * dp[0](i, j) + m.h_p.cast<cplx>().cwiseProduct(dqa).sum() -
                                       m.h_q.cast<cplx>().cwiseProduct(dpa).sum());
            const CVec3 v = p * dqa - fq * dpa +
                            eps * (cp * dqa - cq * dpa + m.h_p.cast<cplx>() * dq[0](i, j) -
                                   m.h_q.cast<cplx>() * dp[0](i, j)) -
                            2.0 * cross3(h.cast<cplx>(), av);
            for (int c = 0; c < 3; ++c) out.comp[c + 1](i, j) = v(c);
        }
    }
    return out;
}

CommutatorDefect commutator_defect(const ModelSpec& m, const SigmaFunction& a, const Grid& g,
                                   const SphereQuadrature& quad) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear) throw DomainError("commutator_defect: harmonic-linear mode only");
    const PhaseGrid d = g.dual();
    const std::size_t M = quad.size();
    const double eps = m.epsilon, w2 = m.omega * m.omega;
    const double cq = m.h0_offset(1), cp = m.h0_offset(2);

    // Node-wise samples and derivatives of a.
    std::vector<CMatrix> vals(M), aq(M), ap(M);
    for (std::size_t k = 0; k < M; ++k) {
        vals[k].resize(d.Nq, d.Np);
        for (int j = 0; j < d.Np; ++j)
            for (int i = 0; i < d.Nq; ++i) vals[k](i, j) = a(d.q(i), d.p(j), quad.nodes[k]);
        aq[k] = d_dq(vals[k], d);
        ap[k] = d_dp(vals[k], d);
    }
    SymbolField Pa = SymbolField::zeros(d), bracket = SymbolField::zeros(d), corr = SymbolField::zeros(d);
    std::vector<cplx> nv(M), nb(M), nc(M);
    for (int j = 0; j < d.Np; ++j) {
        const double p = d.p(j);
        for (int i = 0; i < d.Nq; ++i) {
            const double q = d.q(i);
            for (std::size_t k = 0; k < M; ++k) nv[k] = vals[k](i, j);
            const SpinSymbol pa = project_C1_values(nv.data(), quad);
            Pa.set(i, j, pa);
            // (1 - P)a derivatives node-wise: derivatives of P a follow from projecting the derivatives.
            for (std::size_t k = 0; k < M; ++k) nv[k] = aq[k](i, j);
            const SpinSymbol paq = project_C1_values(nv.data(), quad);
            for (std::size_t k = 0; k < M; ++k) nv[k] = ap[k](i, j);
            const SpinSymbol pap = project_C1_values(nv.data(), quad);
            for (std::size_t k = 0; k < M; ++k) {
                const Vec3& n = quad.nodes[k];
                const double h1p = cp + kSqrt3 * m.h_p.dot(n);
                const double h1q = cq + kSqrt3 * m.h_q.dot(n);
                const cplx dqa = aq[k](i, j), dpa = ap[k](i, j);
                nb[k] = p * dqa - (w2 * q + m.dV(q)) * dpa + eps * (h1p * dqa - h1q * dpa);
                const cplx dqr = dqa - paq(n), dpr = dpa - pap(n);
                nc[k] = h1p * dqr - h1q * dpr;
            }
            SpinSymbol br = project_C1_values(nb.data(), quad);
            const Vec3 h = m.h_c + q * m.h_q + p * m.h_p;
            br.a += -2.0 * cross3(h.cast<cplx>(), pa.a);
            bracket.set(i, j, br);
            corr.set(i, j, project_C1_values(nc.data(), quad));
        }
    }
    auto hsym = [&](double q, double p) {
        SpinSymbol s;
        s.a0 = 0.5 * (p * p + w2 * q * q) + m.V(q) + eps * (m.h0_offset(0) + cq * q + cp * p);
        s.a = (eps * (m.h_c + q * m.h_q + p * m.h_p)).cast<cplx>();
        return s;
    };
    const GridOperator H = quantize_sigma(hsym, g);
    const GridOperator A = quantize_sigma(Pa, g);
    const GridOperator Br = quantize_sigma(bracket, g);
    const GridOperator Co = quantize_sigma(corr, g);
    const GridOperator C = (kI / eps) * (H * A - A * H);
    CommutatorDefect out;
    out.reference_norm = operator_norm(C, 1e-8);
    out.defect_norm = operator_norm(CMatrix(C - Br), 1e-6);
    out.corrected_defect_norm = operator_norm(CMatrix(C - Br + eps * Co), 1e-6);
    out.half_corrected_defect_norm = operator_norm(CMatrix(C - Br + 0.5 * eps * Co), 1e-6);
    return out;
}

double moyal_defect(const ScalarHamiltonian& h0, const std::function<double(double, double)>& a,
                    const std::function<double(double, double)>& a_q,
                    const std::function<double(double, double)>& a_p, const Grid& g) {
    const int N = g.N;
    const double eps = g.eps;
    const double Lp = std::min(g.p_max(), g.L);
    const int nc = std::min(2 * N, 128);
    const PhaseGrid pg{nc, nc, g.L, Lp};
    auto Afield = SymbolField::sample(pg, [&](double q, double p) { return SpinSymbol::constant(a(q, p)); });
    auto Bfield = SymbolField::sample(pg, [&](double q, double p) {
        return SpinSymbol::constant(p * a_q(q, p) - h0.dU(q) * a_p(q, p));
    });
    auto A = std::make_shared<BandedOperator>(Afield, g, false, 1e-14);
    auto Bop = std::make_shared<BandedOperator>(Bfield, g, false, 1e-14);
    Eigen::VectorXd U(N), T(N);
    for (int j = 0; j < N; ++j) {
        U(j) = h0.U(g.x(j));
        const double pk = g.p_of_fft(j);
        T(j) = 0.5 * pk * pk;
    }
    auto applyH = [&, N](const CVector& x, CVector& y) {
        CVector f = x;
        fft_many(f.data(), N, 1, 1, N, FFTW_FORWARD);
        for (int j = 0; j < N; ++j) f(j) *= T(j) / N;
        fft_many(f.data(), N, 1, 1, N, FFTW_BACKWARD);
        y = f + U.cast<cplx>().cwiseProduct(x);
    };
    // D = i([H, A] + i eps B) is Hermitian.
    auto applyD = [&](const CVector& x, CVector& y) {
        CVector t1, t2, t3, t4;
        A->apply(x, t1);
        applyH(t1, t2);
        applyH(x, t3);
        A->apply(t3, t4);
        Bop->apply(x, t1);
        y = kI * (t2 - t4) - eps * t1;
    };
    FunctionOperator D(N, applyD, applyD, true);
    return operator_norm(D, 1e-6);
}

} // namespace egorov
