// repint - command-line driver for the repeated-interaction oscillator model.

#include "repint/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace {

using namespace repint;
using namespace repint::run;

struct Flags {
    std::map<std::string, std::string> values; // flag name -> raw text, as given
    std::string config_path;
};

const std::vector<std::pair<std::string, std::string>> kValueFlags = {
    {"omega1", "Frequency of oscillator 1"},
    {"omega2", "Frequency of oscillator 2"},
    {"omega", "Frequency of the interaction"},
    {"lambda", "Coupling strength"},
    {"tau", "Interaction window"},
    {"t1", "Initial temperature of oscillator 1"},
    {"t2", "Initial temperature of oscillator 2"},
    {"steps", "Maximum number of windows"},
    {"tol", "Convergence tolerance on theta"},
    {"nmax", "Fock cutoff per oscillator (0 = adaptive)"},
    {"tail-bound", "Allowed thermal tail mass beyond the cutoff"},
    {"mode", "closed | oracle | compare"},
    {"refresh", "mutual | reservoir"},
    {"out", "Output CSV path (default stdout)"},
    {"bound", "compare: maximum relative difference"},
};

void add_value_flags(CLI::App* cmd, Flags& flags) {
    for (const auto& [name, help] : kValueFlags) {
        cmd->add_option_function<std::string>(
            "--" + name, [&flags, name = name](const std::string& v) { flags.values[name] = v; }, help);
    }
    cmd->add_option("--config", flags.config_path, "JSON config file; flags override its values");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::logic_error&) {
        throw InvalidInput(key, "expected a number, got '" + text + "'");
    }
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    if (out.empty()) throw InvalidInput(key, "empty value");
    return out;
}

std::string json_key(const std::string& flag) {
    return flag == "tail-bound" ? "tail_bound" : flag;
}

void apply_flag(RunConfig& cfg, const std::string& flag, const std::string& text) {
    const std::string key = json_key(flag);
    if (is_sweep_key(key)) {
        set_sweep_value(cfg, key, to_double(key, text));
    } else if (key == "steps") {
        const double v = to_double(key, text);
        if (v < 0 || v != std::floor(v)) throw InvalidInput(key, "expected a non-negative integer");
        cfg.steps = static_cast<std::size_t>(v);
    } else if (key == "tol") {
        cfg.tol = to_double(key, text);
    } else if (key == "nmax") {
        const double v = to_double(key, text);
        if (v != std::floor(v)) throw InvalidInput(key, "expected an integer");
        cfg.nmax = static_cast<int>(v);
    } else if (key == "tail_bound") {
        cfg.tail_bound = to_double(key, text);
    } else if (key == "bound") {
        cfg.bound = to_double(key, text);
    } else if (key == "mode") {
        cfg.mode = mode_from_string(text);
    } else if (key == "refresh") {
        cfg.refresh = refresh_mode_from_string(text);
    } else if (key == "out") {
        cfg.out = text;
    }
}

RunConfig build_config(const Flags& flags) {
    RunConfig cfg = flags.config_path.empty() ? RunConfig{} : parse_config(read_file(flags.config_path));
    for (const auto& [flag, text] : flags.values) apply_flag(cfg, flag, text);
    cfg.validate();
    return cfg;
}

SweepSpec build_sweep(const Flags& flags) {
    SweepSpec plan = flags.config_path.empty() ? SweepSpec{} : parse_sweep(read_file(flags.config_path));
    for (const auto& [flag, text] : flags.values) {
        const std::string key = json_key(flag);
        if (!is_sweep_key(key)) {
            apply_flag(plan.base, flag, text);
            continue;
        }
        const std::vector<double> values = to_list(key, text);
        auto it = std::find_if(plan.axes.begin(), plan.axes.end(),
                               [&](const auto& axis) { return axis.first == key; });
        if (values.size() == 1) {
            set_sweep_value(plan.base, key, values.front());
            if (it != plan.axes.end()) plan.axes.erase(it);
        } else if (it != plan.axes.end()) {
            it->second = values;
        } else {
            plan.axes.emplace_back(key, values);
        }
    }
    return plan;
}

template <class Fn>
int with_output(const std::string& path, Fn&& fn) {
    if (path.empty()) return fn(std::cout);
    std::ofstream out(path);
    if (!out) throw InvalidInput("out", "cannot open '" + path + "' for writing");
    return fn(out);
}

int dispatch(const RunConfig& cfg) {
    return with_output(cfg.out, [&](std::ostream& os) {
        if (cfg.mode == Mode::Compare) {
            const CompareResult r = run_compare(cfg, os);
            std::cerr << "compare: max relative diff " << format_number(r.max_rel_diff) << " over "
                      << r.steps << " steps at nmax=" << r.nmax << '\n';
            return r.exit_code;
        }
        return run_simulate(cfg, os).exit_code;
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxation of two harmonic oscillators under repeated interaction"};
    app.require_subcommand(1);

    Flags sim_flags, orc_flags, cmp_flags, sweep_flags;
    auto* sim = app.add_subcommand("simulate", "Iterate to equilibrium and write the trajectory CSV");
    add_value_flags(sim, sim_flags);
    auto* orc = app.add_subcommand("oracle", "Same as simulate, on the truncated Fock-space oracle");
    add_value_flags(orc, orc_flags);
    auto* cmp = app.add_subcommand("compare", "Run closed form and oracle side by side");
    add_value_flags(cmp, cmp_flags);
    auto* sweep = app.add_subcommand("sweep", "Grid over comma-separated parameter values");
    add_value_flags(sweep, sweep_flags);

    auto* chk = app.add_subcommand("check", "Equilibrium-condition report on a trajectory CSV");
    std::string check_path;
    double check_tol = 1e-8;
    std::string check_out;
    chk->add_option("trajectory", check_path, "Trajectory CSV written by simulate/oracle")->required();
    chk->add_option("--tol", check_tol, "Tolerance on |omega1 theta1 - omega2 theta2|");
    chk->add_option("--out", check_out, "Report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (sim->parsed()) return dispatch(build_config(sim_flags));
        if (orc->parsed()) {
            RunConfig cfg = build_config(orc_flags);
            cfg.mode = Mode::Oracle;
            return dispatch(cfg);
        }
        if (cmp->parsed()) {
            RunConfig cfg = build_config(cmp_flags);
            cfg.mode = Mode::Compare;
            return dispatch(cfg);
        }
        if (sweep->parsed()) {
            const SweepSpec plan = build_sweep(sweep_flags);
            plan.base.validate();
            return with_output(plan.base.out, [&](std::ostream& os) {
                run_sweep(plan, os);
                return static_cast<int>(kOk);
            });
        }
        if (chk->parsed()) {
            std::ifstream in(check_path);
            if (!in) throw InvalidInput("trajectory", "cannot open '" + check_path + "'");
            return with_output(check_out, [&](std::ostream& os) { return run_check(in, check_tol, os); });
        }
    } catch (const TruncationError& e) {
        std::cerr << "truncation insufficient: " << e.what() << " (required nmax " << e.required_nmax
                  << ")\n";
        return kTruncationInsufficient;
    } catch (const InvalidInput& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
