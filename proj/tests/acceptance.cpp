// Acceptance checks 1-8. `acceptance --criterion N` runs one; without arguments all run.
// Each prints one "criterion N: PASS|FAIL" line followed by indented details.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "egorov/cli.hpp"
#include "egorov/errors.hpp"
#include "egorov/experiments.hpp"

using namespace egorov;

namespace {

struct Criterion {
    const char* title;
    const char* experiment;  ///< config defaults to start from ("" for the lemma check)
    double budget_s;
    ExperimentResult (*run)(const RunConfig&);
    void (*tune)(RunConfig&);
};

RunConfig config_for(const Criterion& c) {
    RunConfig cfg;
    cfg.experiment = c.experiment;
    if (c.tune) c.tune(cfg);
    apply_defaults(cfg);
    return cfg;
}

const std::map<int, Criterion>& criteria() {
    static const std::map<int, Criterion> table = {
        {1, {"spin calculus identities on random C1 symbols", "spin-algebra-check", 1.0, spin_algebra_check,
             [](RunConfig& c) { c.count = 200; }}},
        {2, {"corrected commutator defect at the grid floor", "", 4 * 30.0, commutator_lemma_check,
             [](RunConfig& c) {
                 c.eps_list = {0.44, 0.2, 0.1, 0.044};
                 c.grid_N = 256;
             }}},
        {3, {"order-1 Egorov slopes", "egorov-order1", 600.0, egorov_order1, nullptr}},
        {4, {"long-time Egorov slopes, gamma = 1/8", "egorov-longtime", 1200.0, egorov_longtime, nullptr}},
        {5, {"exact symbol evolution residual", "exact-symbol", 300.0, exact_symbol_check, nullptr}},
        {6, {"flow derivative bounds", "flow-bounds", 60.0, flow_bounds_check, nullptr}},
        {7, {"Stern-Gerlach deflection, moments, quantum mean", "stern-gerlach", 300.0, stern_gerlach_check, nullptr}},
        {8, {"third-order Moyal remainder", "moyal-order3", 300.0, moyal_order3, nullptr}},
    };
    return table;
}

bool run_one(int id) {
    const Criterion& c = criteria().at(id);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult r;
    std::string failure;
    try {
        r = c.run(config_for(c));
    } catch (const std::exception& e) {
        failure = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (failure.empty()) r.checks.push_back(Check::below("runtime [s]", secs, c.budget_s));
    const bool pass = failure.empty() && r.pass();

    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.title << '\n';
    if (!failure.empty()) std::cout << "  error: " << failure << '\n';
    for (const auto& k : r.checks)
        std::cout << "  " << (k.pass ? "ok   " : "FAIL ") << k.name << " = " << std::setprecision(6) << k.value
                  << "  [" << k.lo << ", " << k.hi << "]\n";
    for (const auto& s : r.info) std::cout << "  info: " << s << '\n';
    std::cout.flush();
    return pass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int which = 0;
    app.add_option("--criterion", which, "criterion number 1-8 (default: all)")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);
    bool ok = true;
    if (which)
        ok = run_one(which);
    else
        for (const auto& [id, c] : criteria()) ok = run_one(id) && ok;
    return ok ? 0 : 1;
}
