// relaxation.hpp - closed-form interact/refresh/repeat iteration.
//
// After one window of the beam-splitter interaction, each reduced state of an
// initially thermal product is again thermal. The new inverse temperature of
// oscillator 1 follows from
//
//     exp(-omega1 theta1') = [cb e^{T+delta} - 1] / (e^{T-delta} [e^{T+delta} - cb])
//
// where cb = cos(beta/2), T = (omega1 theta1 + omega2 theta2)/2 and delta come
// from su2::compute_euler. Oscillator 2 uses the same map with 1 <-> 2.

#pragma once

#include "repint/su2.hpp"
#include "repint/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace repint {

struct StepResult {
    ThermalState new_state;  // only the stepped oscillator's entry changes
    double theta_aux{0.0};   // (omega1 theta1 + omega2 theta2)/2
    double delta{0.0};
    double cos_beta_half{1.0};
    double boltzmann_factor{0.0}; // exp(-omega_i theta_i') in (0, 1)
    double exponent{0.0};         // omega_i theta_i'
    double partition_z{0.0};      // Z1 Z2 [1 - cb e^{-(T + delta)}]
};

struct StepPair {
    ThermalState state;
    StepResult first;
    StepResult second;
};

StepResult step_oscillator1(const SystemParams& params, const ThermalState& state);
StepResult step_oscillator2(const SystemParams& params, const ThermalState& state);

// Both marginals from one evolved joint state, then the mutual refresh.
StepPair step(const SystemParams& params, const ThermalState& state);

struct TrajectoryRecord {
    std::size_t step{0};
    double elapsed{0.0}; // n tau
    double theta1{0.0};
    double theta2{0.0};
    double t1{0.0};
    double t2{0.0};
    double w1_theta1{0.0};
    double w2_theta2{0.0};
    double nbar_total{0.0};
    bool settled{false}; // |dtheta_i| < tol on the step that produced this record
};

struct Trajectory {
    SystemParams params;
    std::vector<TrajectoryRecord> records;
    bool converged{false};

    const TrajectoryRecord& final() const { return records.back(); }
    ThermalState final_state() const { return {final().theta1, final().theta2}; }
};

TrajectoryRecord make_record(const SystemParams& params, const ThermalState& state,
                             std::size_t step_index);

inline constexpr double kDefaultTol = 1e-10;
inline constexpr std::size_t kDefaultMaxSteps = 1'000'000;

// Stopping rule shared by the closed-form and oracle iterations. A step of
// size h = max_i |theta_i(n+1) - theta_i(n)| settles the run when h < tol and
// the geometric remainder h r / (1 - r), with r the ratio of the last two step
// sizes, is also below tol. Slowly contracting maps (r near 1) therefore run
// until they are genuinely within tol of their fixed point.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(double tol) : tol_(tol) {}
    bool update(const ThermalState& from, const ThermalState& to);

private:
    double tol_;
    double prev_step_{-1.0};
};

// Repeats step until ConvergenceMonitor reports settled, or max_steps is
// reached. In reservoir mode oscillator 2 is reset to its initial
// state after every window.
Trajectory iterate(const SystemParams& params, const ThermalState& initial,
                   std::size_t max_steps = kDefaultMaxSteps, double tol = kDefaultTol,
                   RefreshMode mode = RefreshMode::Mutual);

// The state with omega1 theta1 = omega2 theta2 = x and the same total mean
// occupation as `initial`: x = ln(1 + 2 / nbar_total).
ThermalState predict_fixed_point(const SystemParams& params, const ThermalState& initial);

// Fixed point under reservoir refresh: omega1 theta1 = omega2 theta2(0).
ThermalState predict_reservoir_fixed_point(const SystemParams& params, const ThermalState& initial);

// First step index at which both |T_i(n) - T_i(inf)| < threshold, using the
// given equilibrium estimate. nullopt if never reached.
std::optional<std::size_t> steps_to_settle(const Trajectory& traj, const ThermalState& equilibrium,
                                           double threshold = 1e-4);

} // namespace repint
