#include "egorov/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "egorov/errors.hpp"
#include "egorov/experiments.hpp"
#include "egorov/report.hpp"

namespace egorov {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// Real number, also accepting `b^e` (e.g. 2^-4).
double parse_real(const std::string& key, const std::string& tok) {
    auto one = [&](const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.empty() || !std::isfinite(v))
            throw ParseError("invalid number '" + tok + "' for key '" + key + "'");
        return v;
    };
    const auto caret = tok.find('^');
    if (caret != std::string::npos) return std::pow(one(tok.substr(0, caret)), one(tok.substr(caret + 1)));
    return one(tok);
}

long long parse_int(const std::string& key, const std::string& tok) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != tok.size() || tok.empty()) throw ParseError("invalid integer '" + tok + "' for key '" + key + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& tok) {
    if (tok == "true" || tok == "1" || tok == "yes" || tok == "on") return true;
    if (tok == "false" || tok == "0" || tok == "no" || tok == "off") return false;
    throw ParseError("invalid boolean '" + tok + "' for key '" + key + "'");
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
    const auto t = tokens(value);
    if (t.size() != 3) throw ParseError("key '" + key + "' needs three numbers");
    return Vec3(parse_real(key, t[0]), parse_real(key, t[1]), parse_real(key, t[2]));
}

std::string single(const std::string& key, const std::string& value) {
    const auto t = tokens(value);
    if (t.size() != 1) throw ParseError("key '" + key + "' needs exactly one value");
    return t[0];
}

using Setter = void (*)(RunConfig&, const std::string&, const std::string&);

const std::map<std::string, std::pair<Setter, const char*>>& setters() {
    static const std::map<std::string, std::pair<Setter, const char*>> table = {
        {"experiment", {[](RunConfig& c, const std::string& k, const std::string& v) { c.experiment = single(k, v); },
                        "experiment name (or the positional argument)"}},
        {"omega", {[](RunConfig& c, const std::string& k, const std::string& v) { c.omega = parse_real(k, single(k, v)); },
                   "oscillator frequency (1)"}},
        {"h_c", {[](RunConfig& c, const std::string& k, const std::string& v) { c.h_c = parse_vec3(k, v); },
                 "constant spin field (0, 0, 0.5)"}},
        {"h_q", {[](RunConfig& c, const std::string& k, const std::string& v) { c.h_q = parse_vec3(k, v); },
                 "spin field coefficient of q (0.5, 0, 0)"}},
        {"h_p", {[](RunConfig& c, const std::string& k, const std::string& v) { c.h_p = parse_vec3(k, v); },
                 "spin field coefficient of p (0, 0, 0)"}},
        {"mu", {[](RunConfig& c, const std::string& k, const std::string& v) { c.mu = parse_real(k, single(k, v)); },
                "anharmonic bump height (0.5 for sweeps and state-corollary, else 0)"}},
        {"bump_width", {[](RunConfig& c, const std::string& k, const std::string& v) {
                            c.bump_width = parse_real(k, single(k, v));
                        },
                        "anharmonic bump width (1)"}},
        {"b_profile", {[](RunConfig& c, const std::string& k, const std::string& v) { c.b_profile = single(k, v); },
                       "Stern-Gerlach field profile: plateau | tanh (plateau; the quantum check uses tanh)"}},
        {"b_slope", {[](RunConfig& c, const std::string& k, const std::string& v) {
                         c.b_slope = parse_real(k, single(k, v));
                     },
                     "Stern-Gerlach field slope b'(0) (1)"}},
        {"eps_list", {[](RunConfig& c, const std::string& k, const std::string& v) {
                          c.eps_list.clear();
                          for (const auto& t : tokens(v)) c.eps_list.push_back(parse_real(k, t));
                      },
                      "eps values, decreasing; 2^-4 syntax accepted"}},
        {"T", {[](RunConfig& c, const std::string& k, const std::string& v) { c.T = parse_real(k, single(k, v)); },
               "horizon scale; sweeps sample (0, T/eps^gamma] (1)"}},
        {"gamma", {[](RunConfig& c, const std::string& k, const std::string& v) { c.gamma = parse_real(k, single(k, v)); },
                   "long-time exponent (0; egorov-longtime 1/8)"}},
        {"t", {[](RunConfig& c, const std::string& k, const std::string& v) { c.t = parse_real(k, single(k, v)); },
               "evaluation time (1; stern-gerlach 2)"}},
        {"grid_N", {[](RunConfig& c, const std::string& k, const std::string& v) {
                        c.grid_N = static_cast<int>(parse_int(k, single(k, v)));
                    },
                    "coarse symbol grid size (64; egorov-longtime 96) or minimum quantum grid (moyal-order3 256)"}},
        {"grid_L", {[](RunConfig& c, const std::string& k, const std::string& v) { c.grid_L = parse_real(k, single(k, v)); },
                    "half-width of the phase-space box (7; exact-symbol 3; moyal-order3 6)"}},
        {"observable", {[](RunConfig& c, const std::string&, const std::string& v) {
                            std::string s;
                            for (const auto& t : tokens(v)) s += (s.empty() ? "" : ",") + t;
                            c.observable = s;
                        },
                        "comma-separated: gaussian, sigma3-gaussian, n3sq-gaussian (optional width suffix :s), q-bump, one"}},
        {"samples", {[](RunConfig& c, const std::string& k, const std::string& v) {
                         c.samples = static_cast<int>(parse_int(k, single(k, v)));
                     },
                     "time samples per horizon (8)"}},
        {"norm_tol", {[](RunConfig& c, const std::string& k, const std::string& v) {
                          c.norm_tol = parse_real(k, single(k, v));
                      },
                      "relative Lanczos tolerance (1e-3)"}},
        {"pde_dt", {[](RunConfig& c, const std::string& k, const std::string& v) { c.pde_dt = parse_real(k, single(k, v)); },
                    "RK4 step of the exact symbol evolution (0.005; exact-symbol 0.00125)"}},
        {"diagnostics", {[](RunConfig& c, const std::string& k, const std::string& v) {
                             c.diagnostics = parse_bool(k, single(k, v));
                         },
                         "extra diagnostic sweeps in egorov-order1 (true)"}},
        {"count", {[](RunConfig& c, const std::string& k, const std::string& v) {
                       c.count = static_cast<int>(parse_int(k, single(k, v)));
                   },
                   "random symbols (100), Bloch vectors (20), flow starts = count/10 (100)"}},
        {"alpha", {[](RunConfig& c, const std::string& k, const std::string& v) { c.alpha = parse_real(k, single(k, v)); },
                   "flow-bounds alpha (0.5)"}},
        {"out", {[](RunConfig& c, const std::string& k, const std::string& v) { c.out = single(k, v); },
                 "output directory (egorov_out)"}},
        {"seed", {[](RunConfig& c, const std::string& k, const std::string& v) {
                      const long long s = parse_int(k, single(k, v));
                      if (s < 0) throw ParseError("seed must be non-negative");
                      c.seed = static_cast<std::uint64_t>(s);
                  },
                  "random seed (1)"}},
        {"threads", {[](RunConfig& c, const std::string& k, const std::string& v) {
                         c.threads = static_cast<int>(parse_int(k, single(k, v)));
                     },
                     "worker threads; 0 = EGOROV_SPIN_THREADS or hardware (0)"}},
        {"record_runtime", {[](RunConfig& c, const std::string& k, const std::string& v) {
                                c.record_runtime = parse_bool(k, single(k, v));
                            },
                            "write measured runtime_ms; false writes 0 for byte-identical CSV (true)"}},
    };
    return table;
}

bool is_scaling(const std::string& e) { return e == "egorov-order1" || e == "egorov-longtime" || e == "moyal-order3"; }

std::vector<double> powers_of_two(int from, int to) {
    std::vector<double> v;
    for (int k = from; k <= to; ++k) v.push_back(std::ldexp(1.0, -k));
    return v;
}

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"spin-algebra-check", "flow-bounds",     "egorov-order1",
                                                   "egorov-longtime",    "exact-symbol",    "state-corollary",
                                                   "stern-gerlach",      "moyal-order3"};
    return names;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& t = setters();
    const auto it = t.find(key);
    if (it == t.end()) throw ParseError("unknown key '" + key + "'");
    it->second.first(cfg, key, value);
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ParseError(where + "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (value.empty()) throw ParseError(where + "missing value for key '" + key + "'");
        try {
            set_config_value(cfg, key, value);
        } catch (const ParseError& e) {
            throw ParseError(where + e.what());
        }
    }
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

void apply_defaults(RunConfig& c) {
    const std::string& e = c.experiment;
    auto eps = [&](std::vector<double> v) {
        if (c.eps_list.empty()) c.eps_list = std::move(v);
    };
    auto obs = [&](const char* v) {
        if (c.observable.empty()) c.observable = v;
    };
    if (e == "flow-bounds") {
        eps({1e-3});
    } else if (e == "egorov-order1") {
        eps(powers_of_two(4, 9));
        obs("gaussian,n3sq-gaussian");
        if (!c.mu) c.mu = 0.5;
        if (!c.gamma) c.gamma = 0.0;
    } else if (e == "egorov-longtime") {
        eps(powers_of_two(4, 9));
        obs("gaussian,sigma3-gaussian");
        if (!c.mu) c.mu = 0.5;
        if (!c.gamma) c.gamma = 0.125;
        if (!c.grid_N) c.grid_N = 96;
    } else if (e == "exact-symbol") {
        eps({std::ldexp(1.0, -4), std::ldexp(1.0, -6), std::ldexp(1.0, -8)});
        obs("n3sq-gaussian:0.5");
        if (!c.grid_L) c.grid_L = 3.0;
        if (!c.pde_dt) c.pde_dt = 0.00125;
    } else if (e == "state-corollary") {
        eps({std::ldexp(1.0, -5), std::ldexp(1.0, -7)});
        obs("q-bump");
        if (!c.mu) c.mu = 0.5;
    } else if (e == "stern-gerlach") {
        eps({0.02, 0.01});
        if (!c.t) c.t = 2.0;
        if (!c.count) c.count = 20;
    } else if (e == "moyal-order3") {
        eps(powers_of_two(4, 8));
        if (!c.grid_L) c.grid_L = 6.0;
        if (!c.grid_N) c.grid_N = 256;
    }
    if (!c.mu) c.mu = 0.0;
    if (!c.gamma) c.gamma = 0.0;
    if (!c.T) c.T = 1.0;
    if (!c.t) c.t = 1.0;
    if (!c.grid_N) c.grid_N = 64;
    if (!c.grid_L) c.grid_L = 7.0;
    if (!c.pde_dt) c.pde_dt = 0.005;
    if (!c.count) c.count = 100;
}

void validate(const RunConfig& c) {
    const auto& names = experiment_names();
    if (c.experiment.empty()) throw ParseError("no experiment given");
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw ParseError("unknown experiment '" + c.experiment + "'");
    const std::string& e = c.experiment;

    if (c.eps_list.empty() && e != "spin-algebra-check") throw ParseError("eps_list is empty");
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] > 0.0) || c.eps_list[i] >= 1.0) throw ParseError("eps_list: values must lie in (0, 1)");
        if (i > 0 && c.eps_list[i] >= c.eps_list[i - 1]) throw ParseError("eps_list: values must be strictly decreasing");
    }
    if (is_scaling(e) && c.eps_list.size() < 4)
        throw ParseError("eps_list: a scaling experiment needs at least 4 eps values, got " +
                         std::to_string(c.eps_list.size()));
    if ((e == "state-corollary" || e == "stern-gerlach" || e == "exact-symbol") && c.eps_list.size() < 2)
        throw ParseError("eps_list: " + e + " compares at least 2 eps values");

    if (!(c.omega > 0.0)) throw ParseError("omega must be positive");
    if (!(c.bump_width > 0.0)) throw ParseError("bump_width must be positive");
    if (c.b_profile != "plateau" && c.b_profile != "tanh") throw ParseError("b_profile must be plateau or tanh");
    if (!(c.b_slope != 0.0)) throw ParseError("b_slope must be nonzero");
    if (c.T && !(*c.T > 0.0)) throw ParseError("T must be positive");
    if (c.t && !(*c.t >= 0.0)) throw ParseError("t must be non-negative");
    if (e == "stern-gerlach" && c.t && !(*c.t > 0.0)) throw ParseError("t must be positive for stern-gerlach");
    if (c.grid_N && *c.grid_N < 8) throw ParseError("grid_N must be at least 8");
    if (c.grid_N && *c.grid_N % 2 != 0) throw ParseError("grid_N must be even");
    if (c.grid_L && !(*c.grid_L > 0.0)) throw ParseError("grid_L must be positive");
    if (c.samples < 1) throw ParseError("samples must be at least 1");
    if (!(c.norm_tol > 0.0 && c.norm_tol <= 1e-2)) throw ParseError("norm_tol must lie in (0, 0.01]");
    if (c.pde_dt && !(*c.pde_dt > 0.0 && *c.pde_dt <= 0.1)) throw ParseError("pde_dt must lie in (0, 0.1]");
    if (c.count && *c.count < 1) throw ParseError("count must be at least 1");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ParseError("alpha must lie in (0, 1)");
    if (c.threads < 0) throw ParseError("threads must be non-negative");
    if (c.out.empty()) throw ParseError("out must not be empty");

    std::vector<Observable> obs;
    {
        std::stringstream ss(c.observable);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            try {
                obs.push_back(Observable::named(item));
            } catch (const DomainError& err) {
                throw ParseError("observable: " + std::string(err.what()));
            }
        }
    }
    const bool uses_obs = e == "egorov-order1" || e == "egorov-longtime" || e == "exact-symbol" || e == "state-corollary";
    if (uses_obs && obs.empty()) throw ParseError("observable is empty");

    const double g = c.gamma.value_or(0.0);
    if (g < 0.0) throw ParseError("gamma must be non-negative");
    if (e == "egorov-order1" && g != 0.0) throw ParseError("gamma must be 0 for egorov-order1 (use egorov-longtime)");
    if (e == "egorov-longtime") {
        if (!(g > 0.0)) throw ParseError("gamma must be positive for egorov-longtime");
        for (const auto& a : obs) {
            if (a.spin_dependent && g >= 0.25)
                throw ParseError("gamma = " + std::to_string(g) + " is outside the long-time range gamma < 1/4 for the spin-dependent observable '" + a.name + "'");
            if (!a.spin_dependent && g >= 0.5)
                throw ParseError("gamma = " + std::to_string(g) + " is outside the long-time range gamma < 1/2 for '" + a.name + "'");
            if (!a.spin_dependent && !a.compact)
                throw ParseError("observable '" + a.name + "' is not compactly supported; the spin-independent long-time case needs one");
        }
    }
    if (e == "state-corollary" && obs.size() != 1) throw ParseError("state-corollary takes exactly one observable");
}

std::string config_help() {
    std::ostringstream os;
    os << "Experiments:";
    for (const auto& n : experiment_names()) os << ' ' << n;
    os << "\n\nConfig file: one 'key = value' per line, '#' starts a comment. Command-line flags override the file.\n"
          "Keys (default):\n";
    for (const auto& [k, v] : setters()) os << "  " << k << ": " << v.second << '\n';
    os << "\nPer-experiment eps defaults: flow-bounds 1e-3; egorov-order1, egorov-longtime 2^-4..2^-9;\n"
          "exact-symbol 2^-4, 2^-6, 2^-8; state-corollary 2^-5, 2^-7; stern-gerlach 0.02, 0.01;\n"
          "moyal-order3 2^-4..2^-8.\n"
          "Exit codes: 0 all checks pass, 1 a check failed, 2 parse/config error, 3 numerical error.\n";
    return os.str();
}

int run(const RunConfig& cfg, std::ostream& log) {
    const ExperimentResult r = run_experiment(cfg);
    const auto files = write_artifacts(cfg.out, r, cfg.seed, cfg.record_runtime);
    log << summary_text(r);
    for (const auto& f : files) log << "wrote: " << f << '\n';
    return r.pass() ? 0 : 1;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Numerical checks of Egorov-type theorems for spin-1/2 systems"};
    app.footer(config_help());
    std::string experiment, config_path, out;
    std::vector<std::string> eps, sets;
    std::string gamma, seed, threads;
    app.add_option("experiment", experiment, "experiment to run");
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--eps", eps, "eps values (comma or space separated, 2^-k accepted)")->delimiter(',');
    app.add_option("--gamma", gamma, "long-time exponent");
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--set", sets, "any config key as key=value (repeatable)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config(config_path);
        if (!experiment.empty()) cfg.experiment = experiment;
        if (!eps.empty()) {
            std::string joined;
            for (const auto& s : eps) joined += s + ",";
            set_config_value(cfg, "eps_list", joined);
        }
        if (!gamma.empty()) set_config_value(cfg, "gamma", gamma);
        if (!out.empty()) set_config_value(cfg, "out", out);
        if (!seed.empty()) set_config_value(cfg, "seed", seed);
        if (!threads.empty()) set_config_value(cfg, "threads", threads);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + s + "'");
            set_config_value(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        }
        apply_defaults(cfg);
        validate(cfg);
        return run(cfg, std::cout);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace egorov
