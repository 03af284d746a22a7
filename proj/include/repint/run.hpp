// run.hpp - run configuration, CSV emission and the drivers behind the CLI.

#pragma once

#include "repint/fock.hpp"
#include "repint/relaxation.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace repint::run {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kBudgetExhausted = 2,
    kTruncationInsufficient = 3,
    kCompareMismatch = 4, // compare: closed form and oracle disagree beyond `bound`
};

enum class Mode { Closed, Oracle, Compare };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct RunConfig {
    SystemParams params{};
    double t1{1.0}; // initial temperatures
    double t2{1.0};
    std::size_t steps{kDefaultMaxSteps};
    double tol{kDefaultTol};
    int nmax{0}; // 0 selects the adaptive cutoff
    double tail_bound{1e-12};
    Mode mode{Mode::Closed};
    RefreshMode refresh{RefreshMode::Mutual};
    std::string out; // empty writes to stdout
    double bound{1e-6}; // compare: max allowed relative difference

    ThermalState initial() const { return ThermalState::from_temperatures(t1, t2); }
    fock::TruncationPolicy truncation() const;
    void validate() const; // throws InvalidInput naming the field

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Flat JSON document; unknown keys are rejected.
std::string serialize(const RunConfig& cfg);
RunConfig parse_config(const std::string& json_text);

// Sweepable keys: omega1 omega2 omega lambda tau t1 t2.
struct SweepSpec {
    RunConfig base;
    std::vector<std::pair<std::string, std::vector<double>>> axes;

    std::vector<RunConfig> grid() const; // last axis varies fastest
};

SweepSpec parse_sweep(const std::string& json_text);
void set_sweep_value(RunConfig& cfg, const std::string& key, double value);
bool is_sweep_key(const std::string& key);

// ------------------------------------------------------------------ CSV ---

inline constexpr const char* kTrajectoryHeader =
    "step,n_tau,T1,T2,theta1,theta2,w1_theta1,w2_theta2,nbar_total,converged";

std::string format_number(double v); // 17 significant digits

void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

// Reads what write_trajectory_csv emits. omega1, omega2 and tau are recovered
// from the columns; the interaction parameters are not stored and stay default.
Trajectory read_trajectory_csv(std::istream& is);

// ---------------------------------------------------------------- drivers ---

struct SimulateResult {
    Trajectory trajectory;
    int exit_code{kOk};
};

// Mode::Closed or Mode::Oracle; writes the trajectory CSV.
SimulateResult run_simulate(const RunConfig& cfg, std::ostream& os);

struct CompareResult {
    double max_rel_diff{0.0};
    double max_fit_residual{0.0};
    int nmax{0};
    std::size_t steps{0};
    int exit_code{kOk};
};

inline constexpr const char* kCompareHeader =
    "step,n_tau,theta1_closed,theta2_closed,theta1_oracle,theta2_oracle,abs_diff1,abs_diff2,"
    "rel_diff_max,fit_residual1,fit_residual2,nmax";

CompareResult run_compare(const RunConfig& cfg, std::ostream& os);

inline constexpr const char* kSweepHeader =
    "index,omega1,omega2,omega,lambda,tau,T1_0,T2_0,converged,steps,steps_to_settle,"
    "n_tau_to_settle,T1_final,T2_final,condition_residual,status";

struct SweepRow {
    RunConfig config;
    bool converged{false};
    std::size_t steps{0};
    long long steps_to_settle{-1}; // -1 when the 1e-4 band is never entered
    double n_tau_to_settle{-1.0};
    double t1_final{0.0};
    double t2_final{0.0};
    double condition_residual{0.0};
    std::string status{"ok"};
};

std::vector<SweepRow> run_sweep(const SweepSpec& plan, std::ostream& os);

// Prints `key,value` lines; exit 0 when converged and the condition holds.
int run_check(std::istream& csv, double tol, std::ostream& os);

} // namespace repint::run
