#pragma once

#include <string>
#include <vector>

#include "egorov/cli.hpp"
#include "egorov/egorov_harness.hpp"

namespace egorov {

/// One pass/fail comparison: pass iff lo <= value <= hi (NaN fails).
struct Check {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;

    static Check within(std::string name, double value, double lo, double hi);
    static Check below(std::string name, double value, double hi);
    static Check above(std::string name, double value, double lo);
};

/// Outcome of one experiment. `rows` holds per-eps samples for experiments that are not sweeps.
struct ExperimentResult {
    std::string experiment;
    std::vector<Check> checks;
    std::vector<ScalingReport> sweeps;
    std::vector<ErrorSample> rows;
    std::vector<std::string> info;   ///< diagnostics without a verdict

    bool pass() const;
};

/// Model for one eps from the config fields (harmonic-linear unless the experiment is stern-gerlach).
ModelSpec model_from(const RunConfig& cfg, double eps);

ExperimentResult spin_algebra_check(const RunConfig& cfg);
/// Corrected commutator defect for C1 observables on a dense grid (one decade of eps).
ExperimentResult commutator_lemma_check(const RunConfig& cfg);
ExperimentResult flow_bounds_check(const RunConfig& cfg);
ExperimentResult egorov_order1(const RunConfig& cfg);
ExperimentResult egorov_longtime(const RunConfig& cfg);
ExperimentResult exact_symbol_check(const RunConfig& cfg);
ExperimentResult state_corollary(const RunConfig& cfg);
ExperimentResult stern_gerlach_check(const RunConfig& cfg);
ExperimentResult moyal_order3(const RunConfig& cfg);

/// Dispatch on cfg.experiment (which must have defaults applied).
ExperimentResult run_experiment(const RunConfig& cfg);

} // namespace egorov
