#include "repint/run.hpp"

#include "repint/equilibrium.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace repint::run {

using json = nlohmann::json;

std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::Closed: return "closed";
    case Mode::Oracle: return "oracle";
    case Mode::Compare: return "compare";
    }
    return "closed";
}

Mode mode_from_string(const std::string& name) {
    if (name == "closed") return Mode::Closed;
    if (name == "oracle") return Mode::Oracle;
    if (name == "compare") return Mode::Compare;
    throw InvalidInput("mode", "expected closed, oracle or compare, got '" + name + "'");
}

fock::TruncationPolicy RunConfig::truncation() const {
    if (nmax == 0) return fock::TruncationPolicy::adaptive(params, initial(), tail_bound);
    fock::TruncationPolicy t{nmax, tail_bound};
    t.check(params, initial());
    return t;
}

void RunConfig::validate() const {
    params.validate();
    if (!(t1 > 0.0) || !std::isfinite(t1)) throw InvalidInput("t1", "temperature must be finite and > 0");
    if (!(t2 > 0.0) || !std::isfinite(t2)) throw InvalidInput("t2", "temperature must be finite and > 0");
    if (!(tol > 0.0)) throw InvalidInput("tol", "must be > 0");
    if (nmax < 0) throw InvalidInput("nmax", "must be >= 0 (0 = adaptive)");
    if (!(tail_bound > 0.0 && tail_bound < 1.0)) throw InvalidInput("tail_bound", "must lie in (0, 1)");
    if (!(bound > 0.0)) throw InvalidInput("bound", "must be > 0");
}

// ----------------------------------------------------------------- config ---

namespace {

constexpr std::array<const char*, 7> kSweepKeys = {"omega1", "omega2", "omega", "lambda",
                                                   "tau",    "t1",     "t2"};

json to_json(const RunConfig& c) {
    return json{{"omega1", c.params.omega1},
                {"omega2", c.params.omega2},
                {"omega", c.params.omega_int},
                {"lambda", c.params.lambda},
                {"tau", c.params.tau},
                {"t1", c.t1},
                {"t2", c.t2},
                {"steps", c.steps},
                {"tol", c.tol},
                {"nmax", c.nmax},
                {"tail_bound", c.tail_bound},
                {"mode", to_string(c.mode)},
                {"refresh", to_string(c.refresh)},
                {"out", c.out},
                {"bound", c.bound}};
}

double number_field(const json& v, const std::string& key) {
    if (!v.is_number()) throw InvalidInput(key, "expected a number");
    return v.get<double>();
}

json parse_object(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput("config", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidInput("config", "top level must be an object");
    return doc;
}

// Applies every non-sweep-array key of `doc` onto `cfg`.
void apply_scalar_keys(const json& doc, RunConfig& cfg, bool allow_arrays) {
    for (const auto& [key, v] : doc.items()) {
        if (is_sweep_key(key)) {
            if (v.is_array()) {
                if (!allow_arrays) throw InvalidInput(key, "ranges are only accepted by sweep");
                continue;
            }
            set_sweep_value(cfg, key, number_field(v, key));
        } else if (key == "steps") {
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw InvalidInput(key, "expected a non-negative integer");
            }
            cfg.steps = v.get<std::size_t>();
        } else if (key == "tol") {
            cfg.tol = number_field(v, key);
        } else if (key == "nmax") {
            if (!v.is_number_integer()) throw InvalidInput(key, "expected an integer");
            cfg.nmax = v.get<int>();
        } else if (key == "tail_bound") {
            cfg.tail_bound = number_field(v, key);
        } else if (key == "bound") {
            cfg.bound = number_field(v, key);
        } else if (key == "mode") {
            if (!v.is_string()) throw InvalidInput(key, "expected a string");
            cfg.mode = mode_from_string(v.get<std::string>());
        } else if (key == "refresh") {
            if (!v.is_string()) throw InvalidInput(key, "expected a string");
            cfg.refresh = refresh_mode_from_string(v.get<std::string>());
        } else if (key == "out") {
            if (!v.is_string()) throw InvalidInput(key, "expected a string");
            cfg.out = v.get<std::string>();
        } else {
            throw InvalidInput(key, "unknown config key");
        }
    }
}

} // namespace

bool is_sweep_key(const std::string& key) {
    return std::find(kSweepKeys.begin(), kSweepKeys.end(), key) != kSweepKeys.end();
}

void set_sweep_value(RunConfig& cfg, const std::string& key, double value) {
    if (key == "omega1") cfg.params.omega1 = value;
    else if (key == "omega2") cfg.params.omega2 = value;
    else if (key == "omega") cfg.params.omega_int = value;
    else if (key == "lambda") cfg.params.lambda = value;
    else if (key == "tau") cfg.params.tau = value;
    else if (key == "t1") cfg.t1 = value;
    else if (key == "t2") cfg.t2 = value;
    else throw InvalidInput(key, "not a sweepable key");
}

std::string serialize(const RunConfig& cfg) {
    return to_json(cfg).dump(2);
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    apply_scalar_keys(parse_object(text), cfg, false);
    return cfg;
}

SweepSpec parse_sweep(const std::string& text) {
    const json doc = parse_object(text);
    SweepSpec plan;
    apply_scalar_keys(doc, plan.base, true);
    for (const char* key : kSweepKeys) {
        auto it = doc.find(key);
        if (it == doc.end() || !it->is_array()) continue;
        std::vector<double> values;
        for (const auto& v : *it) values.push_back(number_field(v, key));
        if (values.empty()) throw InvalidInput(key, "empty range");
        plan.axes.emplace_back(key, std::move(values));
    }
    return plan;
}

std::vector<RunConfig> SweepSpec::grid() const {
    std::vector<RunConfig> out{base};
    for (const auto& [key, values] : axes) {
        std::vector<RunConfig> next;
        next.reserve(out.size() * values.size());
        for (const auto& cfg : out) {
            for (double v : values) {
                RunConfig c = cfg;
                set_sweep_value(c, key, v);
                next.push_back(std::move(c));
            }
        }
        out = std::move(next);
    }
    return out;
}

// -------------------------------------------------------------------- CSV ---

std::string format_number(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    os << kTrajectoryHeader << '\n';
    for (const auto& r : traj.records) {
        os << r.step << ',' << format_number(r.elapsed) << ',' << format_number(r.t1) << ','
           << format_number(r.t2) << ',' << format_number(r.theta1) << ',' << format_number(r.theta2)
           << ',' << format_number(r.w1_theta1) << ',' << format_number(r.w2_theta2) << ','
           << format_number(r.nbar_total) << ',' << (r.settled ? 1 : 0) << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kTrajectoryHeader) {
        throw InvalidInput("csv", "missing or unexpected trajectory header");
    }
    Trajectory traj;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 10) {
            throw InvalidInput("csv", "line " + std::to_string(lineno) + ": expected 10 columns");
        }
        try {
            TrajectoryRecord r;
            r.step = std::stoull(cells[0]);
            r.elapsed = std::stod(cells[1]);
            r.t1 = std::stod(cells[2]);
            r.t2 = std::stod(cells[3]);
            r.theta1 = std::stod(cells[4]);
            r.theta2 = std::stod(cells[5]);
            r.w1_theta1 = std::stod(cells[6]);
            r.w2_theta2 = std::stod(cells[7]);
            r.nbar_total = std::stod(cells[8]);
            r.settled = cells[9] == "1";
            traj.records.push_back(r);
        } catch (const std::logic_error&) {
            throw InvalidInput("csv", "line " + std::to_string(lineno) + ": unparsable number");
        }
    }
    if (traj.records.empty()) throw InvalidInput("csv", "no data rows");
    const auto& first = traj.records.front();
    traj.params.omega1 = first.w1_theta1 / first.theta1;
    traj.params.omega2 = first.w2_theta2 / first.theta2;
    const auto& last = traj.records.back();
    if (last.step > 0) traj.params.tau = last.elapsed / static_cast<double>(last.step);
    traj.converged = last.settled;
    return traj;
}

// ---------------------------------------------------------------- drivers ---

SimulateResult run_simulate(const RunConfig& cfg, std::ostream& os) {
    cfg.validate();
    SimulateResult res;
    if (cfg.mode == Mode::Oracle) {
        res.trajectory = fock::oracle_iterate(cfg.params, cfg.initial(), cfg.truncation(), cfg.steps,
                                              cfg.tol, cfg.refresh)
                             .trajectory;
    } else {
        res.trajectory = iterate(cfg.params, cfg.initial(), cfg.steps, cfg.tol, cfg.refresh);
    }
    write_trajectory_csv(res.trajectory, os);
    res.exit_code = res.trajectory.converged ? kOk : kBudgetExhausted;
    return res;
}

CompareResult run_compare(const RunConfig& cfg, std::ostream& os) {
    cfg.validate();
    const ThermalState initial = cfg.initial();
    const fock::TruncationPolicy trunc = cfg.truncation();
    const fock::SectorOracle oracle(cfg.params, trunc);

    CompareResult res;
    res.nmax = trunc.nmax;
    os << kCompareHeader << '\n';
    auto emit = [&](std::size_t n, const ThermalState& c, const ThermalState& o, double r1, double r2) {
        const double d1 = std::abs(c.theta1 - o.theta1);
        const double d2 = std::abs(c.theta2 - o.theta2);
        const double rel = std::max(d1 / c.theta1, d2 / c.theta2);
        res.max_rel_diff = std::max(res.max_rel_diff, rel);
        os << n << ',' << format_number(static_cast<double>(n) * cfg.params.tau) << ','
           << format_number(c.theta1) << ',' << format_number(c.theta2) << ','
           << format_number(o.theta1) << ',' << format_number(o.theta2) << ',' << format_number(d1)
           << ',' << format_number(d2) << ',' << format_number(rel) << ',' << format_number(r1) << ','
           << format_number(r2) << ',' << trunc.nmax << '\n';
    };

    ThermalState closed = initial;
    ThermalState orc = initial;
    ConvergenceMonitor closed_monitor(cfg.tol), oracle_monitor(cfg.tol);
    emit(0, closed, orc, 0.0, 0.0);
    for (std::size_t n = 1; n <= cfg.steps; ++n) {
        ThermalState next_closed;
        if (cfg.refresh == RefreshMode::Mutual) {
            next_closed = step(cfg.params, closed).state;
        } else {
            next_closed = {step_oscillator1(cfg.params, closed).new_state.theta1, initial.theta2};
        }
        const fock::OracleStep s = oracle.step(orc, cfg.refresh, initial.theta2);
        const double r1 = s.fit1.residual;
        const double r2 = cfg.refresh == RefreshMode::Mutual ? s.fit2.residual : 0.0;
        res.max_fit_residual = std::max({res.max_fit_residual, r1, r2});

        // both monitors must see every step to track their contraction ratios
        const bool closed_settled = closed_monitor.update(closed, next_closed);
        const bool oracle_settled = oracle_monitor.update(orc, s.state);
        const bool settled = closed_settled && oracle_settled;
        closed = next_closed;
        orc = s.state;
        emit(n, closed, orc, r1, r2);
        res.steps = n;
        if (settled) break;
    }
    res.exit_code = res.max_rel_diff <= cfg.bound ? kOk : kCompareMismatch;
    return res;
}

namespace {

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

SweepRow sweep_point(const RunConfig& cfg) {
    SweepRow row;
    row.config = cfg;
    try {
        cfg.validate();
        const ThermalState initial = cfg.initial();
        Trajectory traj = cfg.mode == Mode::Oracle
                              ? fock::oracle_iterate(cfg.params, initial, cfg.truncation(), cfg.steps,
                                                     cfg.tol, cfg.refresh)
                                    .trajectory
                              : iterate(cfg.params, initial, cfg.steps, cfg.tol, cfg.refresh);
        const ThermalState eq = cfg.refresh == RefreshMode::Mutual
                                    ? predict_fixed_point(cfg.params, initial)
                                    : predict_reservoir_fixed_point(cfg.params, initial);
        row.converged = traj.converged;
        row.steps = traj.final().step;
        if (auto n = steps_to_settle(traj, eq)) {
            row.steps_to_settle = static_cast<long long>(*n);
            row.n_tau_to_settle = static_cast<double>(*n) * cfg.params.tau;
        }
        row.t1_final = traj.final().t1;
        row.t2_final = traj.final().t2;
        row.condition_residual = std::abs(traj.final().w1_theta1 - traj.final().w2_theta2);
        if (!traj.converged) row.status = "budget_exhausted";
    } catch (const std::exception& e) {
        row.status = "error: " + sanitize(e.what());
    }
    return row;
}

} // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& plan, std::ostream& os) {
    std::vector<SweepRow> rows;
    os << kSweepHeader << '\n';
    std::size_t index = 0;
    for (const RunConfig& cfg : plan.grid()) {
        SweepRow row = sweep_point(cfg);
        const auto& p = row.config.params;
        os << index++ << ',' << format_number(p.omega1) << ',' << format_number(p.omega2) << ','
           << format_number(p.omega_int) << ',' << format_number(p.lambda) << ','
           << format_number(p.tau) << ',' << format_number(row.config.t1) << ','
           << format_number(row.config.t2) << ',' << (row.converged ? 1 : 0) << ',' << row.steps
           << ',' << row.steps_to_settle << ',' << format_number(row.n_tau_to_settle) << ','
           << format_number(row.t1_final) << ',' << format_number(row.t2_final) << ','
           << format_number(row.condition_residual) << ',' << row.status << '\n';
        rows.push_back(std::move(row));
    }
    return rows;
}

int run_check(std::istream& csv, double tol, std::ostream& os) {
    const Trajectory traj = read_trajectory_csv(csv);
    const equilibrium::EquilibriumReport r = equilibrium::check_equilibrium_condition(traj, tol);
    os << "converged," << (r.converged ? 1 : 0) << '\n'
       << "condition_gap," << format_number(r.condition_gap) << '\n'
       << "condition_met," << (r.condition_met ? 1 : 0) << '\n'
       << "equal_frequency," << (r.equal_frequency ? 1 : 0) << '\n'
       << "T1_final," << format_number(r.t1_final) << '\n'
       << "T2_final," << format_number(r.t2_final) << '\n';
    if (r.equal_frequency) {
        os << "mean_initial," << format_number(*r.mean_initial) << '\n'
           << "gap_to_mean_initial," << format_number(*r.gap_to_mean_initial) << '\n'
           << "conservation_prediction," << format_number(*r.conservation_prediction) << '\n'
           << "gap_to_conservation," << format_number(*r.gap_to_conservation) << '\n';
    }
    return r.converged && r.condition_met ? kOk : kBudgetExhausted;
}

} // namespace repint::run
