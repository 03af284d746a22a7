#include "repint/run.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace repint;
using namespace repint::run;

namespace {

RunConfig equal_freq() {
    RunConfig c;
    c.params = {1.0, 1.0, 1.0, 1.0, 2.7};
    c.t1 = 1.0;
    c.t2 = 9.0;
    return c;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string l;
    while (std::getline(ss, l)) out.push_back(l);
    return out;
}

std::vector<std::string> cells(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) out.push_back(c);
    return out;
}

} // namespace

TEST_CASE("config round trip") {
    RunConfig c = equal_freq();
    c.params.lambda = 0.1234567890123456789;
    c.steps = 77;
    c.tol = 3e-11;
    c.nmax = 40;
    c.tail_bound = 1e-9;
    c.mode = Mode::Compare;
    c.refresh = RefreshMode::Reservoir;
    c.out = "some/path.csv";
    c.bound = 2e-7;
    CHECK(parse_config(serialize(c)) == c);
    CHECK(parse_config(serialize(RunConfig{})) == RunConfig{});
    CHECK(parse_config("{}") == RunConfig{});
}

TEST_CASE("config errors name the field") {
    auto field_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const InvalidInput& e) {
            return e.field;
        }
        return std::string("none");
    };
    CHECK(field_of(R"({"omega1": "x"})") == "omega1");
    CHECK(field_of(R"({"bogus": 1})") == "bogus");
    CHECK(field_of(R"({"steps": -1})") == "steps");
    CHECK(field_of(R"({"mode": "fast"})") == "mode");
    CHECK(field_of(R"({"tau": [1, 2]})") == "tau");
    CHECK(field_of("[1]") == "config");
    CHECK(field_of("{") == "config");

    RunConfig bad = equal_freq();
    bad.t2 = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = equal_freq();
    bad.tail_bound = 2.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(std::stod(format_number(M_PI)) == M_PI);
}

TEST_CASE("simulate writes the trajectory CSV") {
    std::ostringstream os;
    const auto res = run_simulate(equal_freq(), os);
    CHECK(res.exit_code == kOk);
    const auto rows = lines(os.str());
    REQUIRE(rows.size() == res.trajectory.records.size() + 1);
    CHECK(rows[0] == kTrajectoryHeader);
    const auto last = cells(rows.back());
    REQUIRE(last.size() == 10);
    CHECK(std::abs(std::stod(last[2]) - std::stod(last[3])) <= 1e-8);
    CHECK(last[9] == "1");

    std::istringstream is(os.str());
    const auto back = read_trajectory_csv(is);
    CHECK(back.converged);
    CHECK(back.records.size() == res.trajectory.records.size());
    CHECK(back.final().theta1 == res.trajectory.final().theta1);
    CHECK(back.params.omega1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(back.params.tau == doctest::Approx(2.7).epsilon(1e-14));

    std::ostringstream again;
    run_simulate(equal_freq(), again);
    CHECK(again.str() == os.str());
}

TEST_CASE("simulate edge cases") {
    SUBCASE("zero steps") {
        RunConfig c = equal_freq();
        c.steps = 0;
        std::ostringstream os;
        const auto res = run_simulate(c, os);
        CHECK(lines(os.str()).size() == 2);
        CHECK(res.exit_code == kBudgetExhausted);
    }
    SUBCASE("budget exhausted") {
        RunConfig c = equal_freq();
        c.steps = 5;
        std::ostringstream os;
        CHECK(run_simulate(c, os).exit_code == kBudgetExhausted);
    }
    SUBCASE("oracle mode") {
        RunConfig c;
        c.params = {10.0, 4.0, 5.0, 1.0, 1.5};
        c.t1 = 8.0;
        c.t2 = 2.0;
        c.mode = Mode::Oracle;
        std::ostringstream os;
        const auto res = run_simulate(c, os);
        CHECK(res.exit_code == kOk);
        CHECK(std::abs(res.trajectory.final().w1_theta1 - res.trajectory.final().w2_theta2) <= 1e-8);
    }
    SUBCASE("oracle with a too-small cutoff") {
        RunConfig c = equal_freq();
        c.mode = Mode::Oracle;
        c.nmax = 20;
        std::ostringstream os;
        CHECK_THROWS_AS(run_simulate(c, os), TruncationError);
    }
}

TEST_CASE("compare") {
    SUBCASE("equal frequencies, ten steps") {
        RunConfig c = equal_freq();
        c.steps = 10;
        std::ostringstream os;
        const auto r = run_compare(c, os);
        CHECK(r.exit_code == kOk);
        CHECK(r.max_rel_diff <= 1e-6);
        CHECK(r.steps == 10);
        CHECK(lines(os.str()).size() == 12);
        CHECK(lines(os.str())[0] == kCompareHeader);
    }
    SUBCASE("unequal frequencies, five steps") {
        RunConfig c;
        c.params = {10.0, 4.0, 5.0, 1.0, 1.5};
        c.t1 = 8.0;
        c.t2 = 2.0;
        c.steps = 5;
        std::ostringstream os;
        const auto r = run_compare(c, os);
        CHECK(r.max_rel_diff <= 1e-6);
        CHECK(r.max_fit_residual <= 1e-8);
    }
    SUBCASE("no coupling") {
        RunConfig c = equal_freq();
        c.params.lambda = 0.0;
        c.steps = 3;
        std::ostringstream os;
        const auto r = run_compare(c, os);
        CHECK(r.max_rel_diff <= 1e-12);
    }
    SUBCASE("mismatch bound") {
        RunConfig c = equal_freq();
        c.steps = 3;
        c.bound = 1e-300;
        std::ostringstream os;
        CHECK(run_compare(c, os).exit_code == kCompareMismatch);
    }
}

TEST_CASE("sweep") {
    SweepSpec plan;
    plan.base = equal_freq();
    plan.axes = {{"omega", {1.0, 5.0}}, {"tau", {0.3, 2.7}}};
    const auto grid = plan.grid();
    REQUIRE(grid.size() == 4);
    CHECK(grid[1].params.omega_int == 1.0);
    CHECK(grid[1].params.tau == 2.7);
    CHECK(grid[2].params.omega_int == 5.0);

    std::ostringstream os;
    const auto rows = run_sweep(plan, os);
    REQUIRE(rows.size() == 4);
    CHECK(lines(os.str())[0] == kSweepHeader);
    for (const auto& r : rows) {
        CHECK(r.status == "ok");
        CHECK(r.steps_to_settle >= 0);
    }
    // tau = 0.3 settles in less elapsed time than tau = 2.7; omega = 5 faster than omega = 1
    CHECK(rows[0].n_tau_to_settle < rows[1].n_tau_to_settle);
    CHECK(rows[3].n_tau_to_settle < rows[1].n_tau_to_settle);

    SUBCASE("single point matches simulate") {
        SweepSpec one;
        one.base = equal_freq();
        std::ostringstream s1, s2;
        const auto r = run_sweep(one, s1);
        const auto sim = run_simulate(equal_freq(), s2);
        REQUIRE(r.size() == 1);
        CHECK(r[0].t1_final == sim.trajectory.final().t1);
        CHECK(r[0].steps == sim.trajectory.final().step);
    }
    SUBCASE("bad points are reported in-row") {
        SweepSpec bad;
        bad.base = equal_freq();
        bad.axes = {{"tau", {-1.0, 2.7}}};
        std::ostringstream s;
        const auto r = run_sweep(bad, s);
        CHECK(r[0].status.rfind("error", 0) == 0);
        CHECK(r[1].status == "ok");
    }
    SUBCASE("parse") {
        const auto parsed = parse_sweep(R"({"omega": [1, 5], "tau": 2.7, "t1": 1, "t2": 9})");
        REQUIRE(parsed.axes.size() == 1);
        CHECK(parsed.axes[0].first == "omega");
        CHECK(parsed.base.params.tau == 2.7);
        CHECK_THROWS_AS(parse_sweep(R"({"omega": []})"), InvalidInput);
    }
}

TEST_CASE("check report") {
    std::ostringstream traj;
    run_simulate(equal_freq(), traj);
    std::istringstream in(traj.str());
    std::ostringstream report;
    CHECK(run_check(in, 1e-8, report) == kOk);
    const auto text = report.str();
    CHECK(text.find("condition_met,1") != std::string::npos);
    CHECK(text.find("mean_initial,5") != std::string::npos);

    std::istringstream garbage("not,a,trajectory\n");
    std::ostringstream sink;
    CHECK_THROWS_AS(run_check(garbage, 1e-8, sink), InvalidInput);
}
