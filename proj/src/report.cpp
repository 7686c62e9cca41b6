#include "egorov/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "egorov/errors.hpp"

namespace egorov {

namespace {

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-')
            out += c;
        else if (!out.empty() && out.back() != '_')
            out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

void write_file(const std::filesystem::path& p, const std::string& text, std::vector<std::string>& written) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
    written.push_back(p.string());
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string timestamp_line(const std::string& experiment, unsigned long long seed) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << "# egorov-spin " << experiment << " seed=" << seed << " written " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_rows_csv(std::ostream& os, const std::string& header, const std::vector<ErrorSample>& rows,
                    bool record_runtime) {
    os << header << '\n' << kCsvColumns << '\n';
    for (const auto& r : rows)
        os << format_number(r.eps) << ',' << format_number(r.t) << ',' << format_number(r.gamma) << ','
           << format_number(r.error) << ',' << format_number(r.floor) << ',' << r.grid_N << ','
           << format_number(r.grid_L) << ',' << (record_runtime ? format_number(std::round(r.runtime_ms)) : "0")
           << '\n';
}

void write_checks_csv(std::ostream& os, const std::string& header, const std::vector<Check>& checks) {
    os << header << '\n' << "name,value,lo,hi,pass\n";
    for (const auto& c : checks)
        os << '"' << c.name << "\"," << format_number(c.value) << ',' << format_number(c.lo) << ','
           << format_number(c.hi) << ',' << (c.pass ? 1 : 0) << '\n';
}

std::string summary_text(const ExperimentResult& r) {
    std::ostringstream os;
    os << "experiment: " << r.experiment << '\n';
    os << "result: " << (r.pass() ? "PASS" : "FAIL") << '\n';
    for (const auto& c : r.checks) {
        os << "check: " << c.name << " = " << std::setprecision(6) << c.value << " in [" << c.lo << ", " << c.hi
           << "] " << (c.pass ? "PASS" : "FAIL") << '\n';
    }
    for (const auto& s : r.sweeps) {
        os << "sweep: " << s.observable << " gamma=" << s.gamma << " predicted=" << s.predicted;
        if (s.inconclusive)
            os << " inconclusive (" << s.note << ")";
        else
            os << " slope=" << s.fit.slope << " ci95=[" << s.fit.lo << ", " << s.fit.hi << "] used=" << s.fit.used
               << "/" << s.sup.size();
        os << '\n';
    }
    for (const auto& i : r.info) os << "info: " << i << '\n';
    return os.str();
}

std::string gnuplot_stub(const std::string& csv_file, const std::string& title) {
    std::ostringstream os;
    os << "# gnuplot script for " << csv_file << "\n"
       << "set datafile separator ','\n"
       << "set logscale xy\n"
       << "set xlabel 'eps'\n"
       << "set ylabel 'operator-norm error'\n"
       << "set key top left\n"
       << "set title '" << title << "'\n"
       << "plot '" << csv_file << "' every ::1 using 1:4 with points pt 7 title 'error', \\\n"
       << "     '" << csv_file << "' every ::1 using 1:5 with lines dt 2 title 'floor'\n";
    return os.str();
}

std::vector<std::string> write_artifacts(const std::string& dir, const ExperimentResult& r, unsigned long long seed,
                                         bool record_runtime) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    const std::string header = timestamp_line(r.experiment, seed);
    auto emit_rows = [&](const std::string& stem, const std::vector<ErrorSample>& rows, const std::string& title) {
        std::ostringstream csv;
        write_rows_csv(csv, header, rows, record_runtime);
        write_file(fs::path(dir) / (stem + ".csv"), csv.str(), written);
        write_file(fs::path(dir) / (stem + ".plt"), gnuplot_stub(stem + ".csv", title), written);
    };
    for (const auto& s : r.sweeps) emit_rows(r.experiment + "_" + slug(s.observable), s.rows, r.experiment + " " + s.observable);
    if (!r.rows.empty()) emit_rows(r.experiment, r.rows, r.experiment);
    std::ostringstream checks;
    write_checks_csv(checks, header, r.checks);
    write_file(fs::path(dir) / (r.experiment + "_checks.csv"), checks.str(), written);
    write_file(fs::path(dir) / (r.experiment + "_summary.txt"), summary_text(r), written);
    return written;
}

} // namespace egorov
