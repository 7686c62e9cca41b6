#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "egorov/cli.hpp"
#include "egorov/errors.hpp"
#include "egorov/report.hpp"

using namespace egorov;

namespace {

int call(std::vector<std::string> args) {
    args.insert(args.begin(), "egorov-spin");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string without_first_line(const std::string& s) { return s.substr(s.find('\n') + 1); }

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("egorov_cli_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("minimal config takes the documented defaults") {
    RunConfig c = parse_config_text("experiment = egorov-order1\n");
    apply_defaults(c);
    CHECK_NOTHROW(validate(c));
    CHECK(c.eps_list.size() == 6);
    CHECK(c.eps_list.front() == 0.0625);
    CHECK(c.eps_list.back() == std::ldexp(1.0, -9));
    CHECK(*c.mu == 0.5);
    CHECK(*c.gamma == 0.0);
    CHECK(*c.T == 1.0);
    CHECK(*c.grid_N == 64);
    CHECK(c.observable == "gaussian,n3sq-gaussian");
    CHECK(c.omega == 1.0);
    CHECK(c.h_c == Vec3(0, 0, 0.5));
    CHECK(c.h_q == Vec3(0.5, 0, 0));

    RunConfig l = parse_config_text("experiment = egorov-longtime");
    apply_defaults(l);
    CHECK(*l.gamma == 0.125);
    CHECK(*l.grid_N == 96);
    RunConfig s = parse_config_text("experiment = stern-gerlach");
    apply_defaults(s);
    CHECK(*s.count == 20);
    CHECK(*s.t == 2.0);
}

TEST_CASE("config syntax") {
    const RunConfig c = parse_config_text("# comment\n\nexperiment = moyal-order3  # trailing\n"
                                          "eps_list = 2^-4, 2^-5 2^-6,0.01\nh_p = 0.1 0.2 0.3\ndiagnostics = false\n");
    CHECK(c.experiment == "moyal-order3");
    REQUIRE(c.eps_list.size() == 4);
    CHECK(c.eps_list[2] == 1.0 / 64);
    CHECK(c.eps_list[3] == 0.01);
    CHECK(c.h_p == Vec3(0.1, 0.2, 0.3));
    CHECK_FALSE(c.diagnostics);

    auto message = [](const std::string& text) {
        try {
            parse_config_text(text, "f.cfg");
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const std::string unknown = message("experiment = egorov-order1\n\nfoo = 1\n");
    CHECK(unknown.find("f.cfg:3") != std::string::npos);
    CHECK(unknown.find("'foo'") != std::string::npos);
    CHECK(message("T = abc\n").find("'T'") != std::string::npos);
    CHECK(message("h_c = 1 2\n").find("h_c") != std::string::npos);
    CHECK(message("grid_N = 6.5\n").find("grid_N") != std::string::npos);
    CHECK(message("no equals sign\n").find("f.cfg:1") != std::string::npos);
    CHECK(message("gamma =\n").find("gamma") != std::string::npos);
    CHECK_THROWS_AS(parse_config("/nonexistent/file.cfg"), ParseError);
}

TEST_CASE("validation rejects configs outside the theorem ranges") {
    auto rejected = [](const std::string& text) {
        RunConfig c = parse_config_text(text);
        apply_defaults(c);
        try {
            validate(c);
        } catch (const ParseError&) {
            return true;
        }
        return false;
    };
    CHECK(rejected("experiment = egorov-longtime\nobservable = n3sq-gaussian\ngamma = 0.3\n"));
    CHECK_FALSE(rejected("experiment = egorov-longtime\nobservable = n3sq-gaussian\ngamma = 0.2\n"));
    CHECK(rejected("experiment = egorov-longtime\nobservable = gaussian\ngamma = 0.5\n"));
    CHECK(rejected("experiment = egorov-order1\neps_list = 0.1, 0.05\n"));
    CHECK(rejected("experiment = moyal-order3\neps_list = 0.1, 0.05, 0.02\n"));
    CHECK(rejected("experiment = egorov-order1\neps_list = 0.05, 0.1, 0.02, 0.01\n"));
    CHECK(rejected("experiment = egorov-order1\ngamma = 0.1\n"));
    CHECK(rejected("experiment = egorov-order1\nobservable = bogus\n"));
    CHECK(rejected("experiment = stern-gerlach\nb_profile = cubic\n"));
    CHECK(rejected("experiment = nonsense\n"));
    CHECK(rejected("eps_list = 0.1\n"));
    CHECK(rejected("experiment = flow-bounds\nalpha = 1.5\n"));
    CHECK_FALSE(rejected("experiment = spin-algebra-check\n"));
}

TEST_CASE("exit codes") {
    const auto out = scratch("exit");
    CHECK(call({"spin-algebra-check", "--out", out.string()}) == 0);
    CHECK(std::filesystem::exists(out / "spin-algebra-check_summary.txt"));
    CHECK(call({"unknown-experiment", "--out", out.string()}) == 2);
    CHECK(call({"egorov-order1", "--config", "/nonexistent.cfg"}) == 2);
    CHECK(call({"egorov-order1", "--eps", "0.1,0.05"}) == 2);
    CHECK(call({"egorov-longtime", "--gamma", "0.3", "--set", "observable=sigma3-gaussian"}) == 2);
    CHECK(call({"spin-algebra-check", "--set", "bogus=1"}) == 2);
    CHECK(call({"spin-algebra-check", "--threads", "x"}) == 2);
}

TEST_CASE("CSV layout and determinism") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const std::vector<std::string> common = {"moyal-order3", "--eps", "2^-2,2^-3,2^-4,2^-5", "--seed", "5",
                                             "--set", "record_runtime=false"};
    auto with_out = [&](const std::filesystem::path& p) {
        auto v = common;
        v.push_back("--out");
        v.push_back(p.string());
        return v;
    };
    CHECK(call(with_out(a)) == 0);
    CHECK(call(with_out(b)) == 0);
    const std::string ca = slurp(a / "moyal-order3.csv"), cb = slurp(b / "moyal-order3.csv");
    CHECK(ca.rfind("# egorov-spin moyal-order3 seed=5 written ", 0) == 0);
    CHECK(without_first_line(ca) == without_first_line(cb));
    CHECK(without_first_line(ca).rfind(std::string(kCsvColumns) + "\n", 0) == 0);
    // 4 data rows, runtime column zeroed
    std::istringstream rows(without_first_line(ca));
    std::string line;
    int n = 0;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        ++n;
        CHECK(line.substr(line.rfind(',') + 1) == "0");
    }
    CHECK(n == 4);
    CHECK(without_first_line(slurp(a / "moyal-order3_checks.csv")) ==
          without_first_line(slurp(b / "moyal-order3_checks.csv")));
    CHECK(std::filesystem::exists(a / "moyal-order3.plt"));
    CHECK(slurp(a / "moyal-order3.plt").find("set logscale xy") != std::string::npos);
    CHECK(slurp(a / "moyal-order3_summary.txt").find("result: PASS") != std::string::npos);
}

TEST_CASE("report formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(std::nan("")) == "nan");
    std::ostringstream os;
    ErrorSample s;
    s.eps = 0.5;
    s.t = 1.0;
    s.error = 1e-3;
    s.grid_N = 64;
    s.grid_L = 7.0;
    s.runtime_ms = 12.4;
    write_rows_csv(os, "# h", {s}, true);
    CHECK(os.str() == "# h\neps,t,gamma,error,floor,grid_N,grid_L,runtime_ms\n0.5,1,0,0.001,0,64,7,12\n");
    ExperimentResult r;
    r.experiment = "x";
    r.checks.push_back(Check::below("c", 2.0, 1.0));
    CHECK_FALSE(r.pass());
    CHECK(summary_text(r).find("result: FAIL") != std::string::npos);
    CHECK(Check::within("nan", std::nan(""), 0.0, 1.0).pass == false);
}
