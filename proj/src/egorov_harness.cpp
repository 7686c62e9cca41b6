#include "egorov/egorov_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "egorov/errors.hpp"
#include "egorov/symbol_evolution.hpp"

namespace egorov {

namespace {

const double kSqrt3 = std::sqrt(3.0);

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first exception.
template <class F>
void parallel_for(int n, int threads, F&& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += threads) body(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

std::string with_width(const char* base, double s) {
    if (s == 1.0) return base;
    std::ostringstream os;
    os << base << ':' << s;
    return os.str();
}

} // namespace

Observable Observable::gaussian(double s) {
    const double s2 = s * s;
    return {with_width("gaussian", s),
            [s2](double q, double p, const Vec3&) { return cplx(std::exp(-(q * q + p * p) / s2)); }, false, true};
}

Observable Observable::sigma3_gaussian(double s) {
    const double s2 = s * s;
    return {with_width("sigma3-gaussian", s),
            [s2](double q, double p, const Vec3& n) { return cplx(kSqrt3 * n(2) * std::exp(-(q * q + p * p) / s2)); },
            true, true};
}

Observable Observable::n3sq_gaussian(double s) {
    const double s2 = s * s;
    return {with_width("n3sq-gaussian", s),
            [s2](double q, double p, const Vec3& n) { return cplx(3.0 * n(2) * n(2) * std::exp(-(q * q + p * p) / s2)); },
            true, true};
}

Observable Observable::q_bump() {
    return {"q-bump", [](double q, double, const Vec3&) { return cplx(std::exp(-q * q)); }, false, false, true};
}

Observable Observable::one() {
    return {"one", [](double, double, const Vec3&) { return cplx(1.0); }, false, false, true};
}

Observable Observable::named(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    double s = 1.0;
    if (colon != std::string::npos) {
        std::size_t pos = 0;
        const std::string w = spec.substr(colon + 1);
        try {
            s = std::stod(w, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != w.size() || !(s > 0.0) || !std::isfinite(s))
            throw DomainError("observable '" + spec + "': width must be a positive number");
        if (name != "gaussian" && name != "sigma3-gaussian" && name != "n3sq-gaussian")
            throw DomainError("observable '" + name + "' takes no width");
    }
    if (name == "gaussian") return gaussian(s);
    if (name == "sigma3-gaussian") return sigma3_gaussian(s);
    if (name == "n3sq-gaussian") return n3sq_gaussian(s);
    if (name == "q-bump") return q_bump();
    if (name == "one") return one();
    throw DomainError("unknown observable '" + spec + "'");
}

SymbolField project_observable(const SigmaFunction& a, const PhaseGrid& g, const SphereQuadrature& quad) {
    SymbolField out = SymbolField::zeros(g);
    std::vector<cplx> v(quad.size());
    for (int j = 0; j < g.Np; ++j)
        for (int i = 0; i < g.Nq; ++i) {
            for (std::size_t k = 0; k < quad.size(); ++k) v[k] = a(g.q(i), g.p(j), quad.nodes[k]);
            out.set(i, j, project_C1_values(v.data(), quad));
        }
    return out;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("EGOROV_SPIN_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::vector<SymbolField>> compose_with_flow(const ModelSpec& m, const std::vector<SigmaFunction>& obs,
                                                        const PhaseGrid& g, const SphereQuadrature& quad,
                                                        const std::vector<double>& times, double dt, int threads) {
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] < 0.0 || (k > 0 && times[k] < times[k - 1]))
            throw DomainError("compose_with_flow: times must be increasing and >= 0");
    const std::size_t M = quad.size(), nt = times.size(), no = obs.size();
    std::vector<std::vector<SymbolField>> out(no, std::vector<SymbolField>(nt, SymbolField::zeros(g)));
    parallel_for(g.Nq, resolve_threads(threads), [&](int i) {
        // vals[(o * nt + tau) * M + k]
        std::vector<cplx> vals(no * nt * M);
        for (int j = 0; j < g.Np; ++j) {
            for (std::size_t k = 0; k < M; ++k) {
                const auto s = flow_samples(m, ExtendedState::hl(g.q(i), g.p(j), quad.nodes[k]), times, dt,
                                            Integrator::RK78);
                for (std::size_t o = 0; o < no; ++o)
                    for (std::size_t tau = 0; tau < nt; ++tau)
                        vals[(o * nt + tau) * M + k] = obs[o](s[tau].q(0), s[tau].p(0), s[tau].n);
            }
            for (std::size_t o = 0; o < no; ++o)
                for (std::size_t tau = 0; tau < nt; ++tau)
                    out[o][tau].set(i, j, project_C1_values(vals.data() + (o * nt + tau) * M, quad));
        }
    });
    return out;
}

Grid quantum_grid_for(double L, double Lp, double eps) { return Grid::for_support(L, Lp, eps, 64); }

double field_operator_norm(const SymbolField& f, const Grid& g, double tol, double scale, double* truncation) {
    if (truncation) *truncation = 0.0;
    const double sup = f.sup_norm();
    if (sup == 0.0) return 0.0;
    const double band_tol = scale > 0.0 ? std::min(1e-6, 1e-14 * scale / sup) : 1e-14;
    const BandedOperator op(f, g, true, band_tol);
    if (truncation) *truncation = op.truncation();
    return operator_norm(op, tol);
}

std::vector<std::vector<ErrorSample>> egorov_error_samples(const ModelSpec& m, const std::vector<Observable>& obs,
                                                           const std::vector<double>& times,
                                                           const EgorovOptions& opt) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear) throw DomainError("egorov_error: harmonic-linear mode only");
    std::vector<std::vector<ErrorSample>> out(obs.size());
    if (times.empty() || obs.empty()) return out;
    const auto t0 = Clock::now();
    const PhaseGrid pg = PhaseGrid::square(opt.coarse_n, opt.coarse_L);
    const SphereQuadrature quad = SphereQuadrature::product_rule(opt.quad_theta, opt.quad_phi);
    std::vector<double> ct{0.0};
    ct.insert(ct.end(), times.begin(), times.end());
    std::vector<SigmaFunction> fs;
    for (const auto& o : obs) fs.push_back(o.f);
    const auto cls = compose_with_flow(m, fs, pg, quad, ct, opt.flow_dt, opt.threads);
    const double shared_ms = ms_since(t0) / static_cast<double>(obs.size() * times.size());
    const Grid g = quantum_grid_for(opt.coarse_L, opt.coarse_L, m.epsilon);

    for (std::size_t o = 0; o < obs.size(); ++o) {
        const auto t1 = Clock::now();
        const SymbolField a0 = project_observable(obs[o].f, pg, quad);
        const auto heis = exact_symbol_trajectory(m, a0, times, opt.pde_dt);
        const double scale = std::max(a0.sup_norm(), 1e-300);
        double floor = field_operator_norm(a0 - cls[o][0], g, opt.norm_tol, scale);
        if (opt.dt_halving_floor) {
            const SymbolField fine = exact_symbol_evolution(m, a0, times.back(), 0.5 * opt.pde_dt);
            floor = std::max(floor, field_operator_norm(heis.back() - fine, g, opt.norm_tol, scale));
        }
        const double setup_ms = shared_ms + ms_since(t1) / static_cast<double>(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            const auto t2 = Clock::now();
            ErrorSample r;
            r.eps = m.epsilon;
            r.t = times[k];
            double trunc = 0.0;
            r.error = field_operator_norm(heis[k] - cls[o][k + 1], g, opt.norm_tol, scale, &trunc);
            floor = std::max(floor, trunc);
            r.grid_N = g.N;
            r.grid_L = g.L;
            r.runtime_ms = setup_ms + ms_since(t2);
            out[o].push_back(r);
        }
        for (auto& r : out[o]) r.floor = floor;
    }
    return out;
}

std::vector<ErrorSample> egorov_error_samples(const ModelSpec& m, const Observable& a,
                                              const std::vector<double>& times, const EgorovOptions& opt) {
    return egorov_error_samples(m, std::vector<Observable>{a}, times, opt).front();
}

double egorov_error(const ModelSpec& m, const Observable& a, double t, const EgorovOptions& opt) {
    if (t == 0.0) {
        const PhaseGrid pg = PhaseGrid::square(opt.coarse_n, opt.coarse_L);
        const SphereQuadrature quad = SphereQuadrature::product_rule(opt.quad_theta, opt.quad_phi);
        const SymbolField a0 = project_observable(a.f, pg, quad);
        const auto c = compose_with_flow(m, {a.f}, pg, quad, {0.0}, opt.flow_dt, opt.threads);
        return field_operator_norm(a0 - c[0][0], quantum_grid_for(opt.coarse_L, opt.coarse_L, m.epsilon), opt.norm_tol,
                                   a0.sup_norm());
    }
    EgorovOptions o = opt;
    o.dt_halving_floor = false;
    return egorov_error_samples(m, a, {t}, o).front().error;
}

double egorov_error_quantum(const ModelSpec& m, const Observable& a, double t, const EgorovOptions& opt) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear) throw DomainError("egorov_error: harmonic-linear mode only");
    const PhaseGrid pg = PhaseGrid::square(opt.coarse_n, opt.coarse_L);
    const SphereQuadrature quad = SphereQuadrature::product_rule(opt.quad_theta, opt.quad_phi);
    const Grid g = quantum_grid_for(opt.coarse_L, opt.coarse_L, m.epsilon);
    const SymbolField a0 = project_observable(a.f, pg, quad);
    const SymbolField at = compose_with_flow(m, {a.f}, pg, quad, {t}, opt.flow_dt, opt.threads)[0][0];
    auto H = std::make_shared<const GridHamiltonian>(GridHamiltonian::from_model(m, g));
    auto U = std::make_shared<const ChebyshevPropagator>(H);
    auto A = std::make_shared<const BandedOperator>(a0, g, true, 1e-14);
    auto B = std::make_shared<const BandedOperator>(at, g, true, 1e-14);
    const HeisenbergDifference D(U, A, B, t);
    return operator_norm(D, opt.norm_tol);
}

double exact_evolution_residual(const ModelSpec& m, const Observable& a, double t, const EgorovOptions& opt) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear) throw DomainError("exact_evolution_residual: harmonic-linear mode only");
    const PhaseGrid pg = PhaseGrid::square(opt.coarse_n, opt.coarse_L);
    const SphereQuadrature quad = SphereQuadrature::product_rule(opt.quad_theta, opt.quad_phi);
    const Grid g = quantum_grid_for(opt.coarse_L, opt.coarse_L, m.epsilon);
    const SymbolField a0 = project_observable(a.f, pg, quad);
    const SymbolField at = exact_symbol_evolution(m, a0, t, opt.pde_dt);
    const double scale = std::max(a0.sup_norm(), 1e-300);
    const double band_tol = 1e-14 * scale;
    auto H = std::make_shared<const GridHamiltonian>(GridHamiltonian::from_model(m, g));
    auto U = std::make_shared<const ChebyshevPropagator>(H);
    auto A = std::make_shared<const BandedOperator>(a0, g, true, band_tol / std::max(a0.sup_norm(), 1e-300));
    auto B = std::make_shared<const BandedOperator>(at, g, true, band_tol / std::max(at.sup_norm(), 1e-300));
    const HeisenbergDifference D(U, A, B, t);
    return operator_norm(D, opt.norm_tol);
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points, const std::vector<double>& floors) {
    if (!floors.empty() && floors.size() != points.size()) throw DomainError("scaling_fit: floors size mismatch");
    ScalingFit fit;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [eps, e] = points[i];
        const double fl = floors.empty() ? 0.0 : floors[i];
        const bool keep = eps > 0.0 && e > 0.0 && std::isfinite(e) && e >= 10.0 * fl;
        fit.kept.push_back(keep);
        if (keep) {
            x.push_back(std::log(eps));
            y.push_back(std::log(e));
        }
    }
    const int n = static_cast<int>(x.size());
    fit.used = n;
    if (n < 3) {
        std::ostringstream os;
        os << "scaling_fit: " << n << " points above 10x floor, need at least 3";
        throw FitError(os.str());
    }
    const Eigen::Map<const Eigen::VectorXd> X(x.data(), n), Y(y.data(), n);
    const double mx = X.mean(), my = Y.mean();
    const double sxx = (X.array() - mx).square().sum();
    if (sxx == 0.0) throw FitError("scaling_fit: all eps values coincide");
    fit.slope = ((X.array() - mx) * (Y.array() - my)).sum() / sxx;
    fit.intercept = my - fit.slope * mx;
    const double rss = (Y.array() - fit.intercept - fit.slope * X.array()).square().sum();
    double half = 0.0;
    if (n > 2) {
        const double se = std::sqrt(rss / (n - 2) / sxx);
        const boost::math::students_t dist(n - 2);
        half = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
    }
    fit.lo = fit.slope - half;
    fit.hi = fit.slope + half;
    return fit;
}

double predicted_exponent(const Observable& a, double gamma) {
    if (gamma == 0.0) return a.spin_dependent ? 1.0 : 2.0;
    return a.spin_dependent ? 1.0 - 4.0 * gamma : 1.5 - 3.0 * gamma;
}

std::vector<ScalingReport> sweep_observables(const SweepConfig& cfg, const std::vector<Observable>& obs) {
    if (cfg.eps_list.size() < 4) throw DomainError("sweep: at least 4 eps values are required for a fit");
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i)
        if (!(cfg.eps_list[i] > 0.0) || (i > 0 && cfg.eps_list[i] >= cfg.eps_list[i - 1]))
            throw DomainError("sweep: eps_list must be positive and strictly decreasing");
    if (cfg.gamma < 0.0) throw DomainError("sweep: gamma must be >= 0");
    for (const auto& a : obs) {
        if (a.spin_dependent && cfg.gamma >= 0.25)
            throw DomainError("sweep: gamma must be < 1/4 for spin-dependent observables");
        if (!a.spin_dependent && cfg.gamma >= 0.5)
            throw DomainError("sweep: gamma must be < 1/2 for spin-independent observables");
        if (!a.spin_dependent && cfg.gamma > 0.0 && !a.compact)
            throw DomainError("sweep: the long-time spin-independent case needs a compactly supported observable");
    }
    if (cfg.samples_per_horizon < 1) throw DomainError("sweep: samples_per_horizon must be >= 1");

    std::vector<ScalingReport> reps(obs.size());
    std::vector<std::vector<std::pair<double, double>>> pts(obs.size());
    std::vector<std::vector<double>> floors(obs.size());
    for (std::size_t o = 0; o < obs.size(); ++o) {
        reps[o].observable = obs[o].name;
        reps[o].gamma = cfg.gamma;
        reps[o].predicted = predicted_exponent(obs[o], cfg.gamma);
        reps[o].one_sided = cfg.gamma > 0.0;
        reps[o].margin = reps[o].one_sided ? 0.1 : 0.3;
    }
    for (double eps : cfg.eps_list) {
        ModelSpec m = cfg.model;
        m.epsilon = eps;
        const double horizon = cfg.T / std::pow(eps, cfg.gamma);
        std::vector<double> times;
        for (int k = 1; k <= cfg.samples_per_horizon; ++k) times.push_back(horizon * k / cfg.samples_per_horizon);
        auto all = egorov_error_samples(m, obs, times, cfg.grid);
        for (std::size_t o = 0; o < obs.size(); ++o) {
            ErrorSample best = all[o].front();
            double total_ms = 0.0;
            for (auto& r : all[o]) {
                r.gamma = cfg.gamma;
                total_ms += r.runtime_ms;
                if (r.error > best.error) best = r;
                reps[o].rows.push_back(r);
            }
            best.runtime_ms = total_ms;
            reps[o].sup.push_back(best);
            pts[o].emplace_back(eps, best.error);
            floors[o].push_back(best.floor);
        }
    }
    for (std::size_t o = 0; o < obs.size(); ++o) {
        auto& rep = reps[o];
        try {
            rep.fit = scaling_fit(pts[o], floors[o]);
            rep.pass = rep.one_sided ? rep.fit.slope >= rep.predicted - rep.margin
                                     : std::abs(rep.fit.slope - rep.predicted) <= rep.margin;
        } catch (const FitError& e) {
            rep.inconclusive = true;
            rep.pass = false;
            rep.note = e.what();
        }
    }
    return reps;
}

ScalingReport long_time_sweep(const SweepConfig& cfg) { return sweep_observables(cfg, {cfg.observable}).front(); }

SpinSymbol GaussianState::wigner(double q, double p, double eps) const {
    const double w = trace * 2.0 * std::exp(-((q - q0) * (q - q0) + (p - p0) * (p - p0)) / eps);
    return {0.5 * w, (0.5 * w) * bloch.cast<cplx>()};
}

ExpectationPair state_expectation(const ModelSpec& m, const Observable& a, const GaussianState& w, double t,
                                  const EgorovOptions& opt) {
    if (m.mode != ModelSpec::Mode::HarmonicLinear) throw DomainError("state_expectation: harmonic-linear mode only");
    if (w.bloch.norm() > 1.0 + 1e-12) throw DomainError("state_expectation: Bloch vector longer than 1");
    const double eps = m.epsilon;
    const SphereQuadrature quad = SphereQuadrature::product_rule(opt.quad_theta, opt.quad_phi);

    // Phase-space quadrature over the Gaussian: trapezoid on +-6 sqrt(eps).
    const int nl = 48;
    const double R = 6.0 * std::sqrt(eps), h = 2.0 * R / nl;
    const PhaseGrid local{nl, nl, R, R};
    auto node = [&](int i, double c) { return c + local.q(i); };
    double trace = 0.0;
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) trace += 2.0 * w.wigner(node(i, w.q0), node(j, w.p0), eps).a0.real();
    trace *= h * h / (2.0 * std::numbers::pi * eps);
    if (std::abs(trace - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "state_expectation: state symbol has trace " << trace << ", not 1";
        throw DomainError(os.str());
    }

    ExpectationPair out;
    std::vector<double> rows(nl, 0.0);
    parallel_for(nl, resolve_threads(opt.threads), [&](int i) {
        const double q = node(i, w.q0);
        double s = 0.0;
        for (int j = 0; j < nl; ++j) {
            const double p = node(j, w.p0);
            const SpinSymbol ws = w.wigner(q, p, eps);
            for (std::size_t k = 0; k < quad.size(); ++k) {
                const Vec3& n = quad.nodes[k];
                const ExtendedState e = flow_samples(m, ExtendedState::hl(q, p, n), {t}, opt.flow_dt, Integrator::RK78).front();
                s += quad.weights[k] * (a.f(e.q(0), e.p(0), e.n) * ws(n)).real();
            }
        }
        rows[i] = s;
    });
    for (double r : rows) out.semiclassical += r;
    out.semiclassical *= h * h / (2.0 * std::numbers::pi * eps) / (2.0 * std::numbers::pi);

    // Quantum side: the spin density 1/2 (1 + s.sigma) as a mixture of two pure Bloch states.
    const PhaseGrid pg = PhaseGrid::square(opt.coarse_n, opt.coarse_L);
    const Grid g = quantum_grid_for(opt.coarse_L, opt.coarse_L, eps);
    std::unique_ptr<LinearOperator> A;
    std::vector<Matrix2> mult;
    if (a.p_independent) {
        for (int j = 0; j < g.N; ++j)
            mult.push_back(quantize_spin(project_C1([&](const Vec3& n) { return a.f(g.x(j), 0.0, n); }, quad)));
    } else {
        A = std::make_unique<BandedOperator>(project_observable(a.f, pg, quad), g, true, 1e-14);
    }
    auto H = std::make_shared<const GridHamiltonian>(GridHamiltonian::from_model(m, g));
    const ChebyshevPropagator U(H);
    const double s = w.bloch.norm();
    const Vec3 axis = s > 1e-14 ? Vec3(w.bloch / s) : Vec3::UnitZ();
    for (int sign : {1, -1}) {
        const double lam = 0.5 * (1.0 + sign * s);
        if (lam == 0.0) continue;
        const SpinorState psi = U.propagate(coherent_state(g, w.q0, w.p0, sign * axis), t);
        double v = 0.0;
        if (A) {
            v = expectation(*A, psi).real();
        } else {
            for (int j = 0; j < g.N; ++j) {
                const Eigen::Vector2cd u(psi(j), psi(g.N + j));
                v += u.dot(mult[j] * u).real();
            }
        }
        out.quantum += lam * v;
    }
    return out;
}

} // namespace egorov
