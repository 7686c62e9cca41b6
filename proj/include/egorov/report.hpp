#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "egorov/experiments.hpp"

namespace egorov {

/// Fixed CSV columns of every sweep file.
inline constexpr const char* kCsvColumns = "eps,t,gamma,error,floor,grid_N,grid_L,runtime_ms";

/// Shortest round-trip decimal form of v (17 significant digits, fixed layout).
std::string format_number(double v);

/// "# egorov-spin <experiment> seed=<seed> written <UTC time>": the only line that differs
/// between two runs of the same config.
std::string timestamp_line(const std::string& experiment, unsigned long long seed);

/// Header line, column line, one line per row. runtime_ms is written as 0 unless record_runtime.
void write_rows_csv(std::ostream& os, const std::string& header, const std::vector<ErrorSample>& rows,
                    bool record_runtime);

/// name,value,lo,hi,pass
void write_checks_csv(std::ostream& os, const std::string& header, const std::vector<Check>& checks);

/// Structured text: checks with verdicts, sweep fits, diagnostics.
std::string summary_text(const ExperimentResult& r);

/// gnuplot script plotting error (and floor) against eps on log axes.
std::string gnuplot_stub(const std::string& csv_file, const std::string& title);

/// Writes <experiment>[_<observable>].csv, .plt, <experiment>_checks.csv and <experiment>_summary.txt
/// under dir (created if needed). Returns the written paths.
std::vector<std::string> write_artifacts(const std::string& dir, const ExperimentResult& r, unsigned long long seed,
                                         bool record_runtime);

} // namespace egorov
