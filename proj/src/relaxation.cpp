#include "repint/relaxation.hpp"

#include <cmath>
#include <sstream>

namespace repint {

namespace {

// 1 / (1 - e^{-x})
double partition_function(double x) {
    return -1.0 / std::expm1(-x);
}

// Shared body of the two single-oscillator maps. `own` is omega_i theta_i of
// the oscillator being stepped, `other` the partner's; `coeffs` are already in
// the stepped oscillator's frame.
StepResult boltzmann_step(const su2::StepCoefficients& coeffs, double own, double other) {
    // The complex decomposition guards the branch; the realified values carry
    // cb - 1 and delta with less rounding, which matters over ~1e6 windows.
    const su2::EulerDecomposition euler = su2::compute_euler(coeffs);
    const su2::RealifiedEuler fast = su2::euler_realified(coeffs);
    const double path_gap = std::max(std::abs(fast.cos_beta_half / euler.cos_beta_half - 1.0),
                                     std::abs(fast.delta - euler.delta) / std::max(1.0, std::abs(euler.delta)));
    const double cb = fast.cos_beta_half;
    const double cbm1 = fast.cos_beta_half_minus_one;
    const double theta_aux = 0.5 * (own + other);
    const double up = theta_aux + fast.delta;
    const double down = theta_aux - fast.delta;

    // [cb e^{up} - 1] / (e^{down} [e^{up} - cb]) rewritten around expm1(up).
    const double em1 = std::expm1(up);
    const double num = cb * em1 + cbm1;
    const double den = std::exp(down) * (em1 - cbm1);
    const double factor = num / den;
    const double exponent = std::log(den) - std::log(num);

    if (!(factor > 0.0 && factor < 1.0) || euler.realness_residue > 1e-10 || path_gap > 1e-9) {
        std::ostringstream os;
        os.precision(17);
        os << "closed-form step left its domain: factor=" << factor << " a=" << coeffs.a << " b=" << coeffs.b
           << " c=" << coeffs.c << " d=" << coeffs.d << " cos(beta/2)=" << cb
           << " delta=" << euler.delta << " Theta=" << theta_aux
           << " realness_residue=" << euler.realness_residue << " path_gap=" << path_gap;
        throw BranchError(os.str());
    }

    StepResult r;
    r.theta_aux = theta_aux;
    r.delta = fast.delta;
    r.cos_beta_half = cb;
    r.boltzmann_factor = factor;
    r.exponent = exponent;
    // 1 - cb e^{-up} = -expm1(-up) - (cb - 1) e^{-up}
    const double bracket = -std::expm1(-up) - cbm1 * std::exp(-up);
    r.partition_z = partition_function(own) * partition_function(other) * bracket;
    return r;
}

} // namespace

StepResult step_oscillator1(const SystemParams& params, const ThermalState& state) {
    const su2::StepCoefficients coeffs = su2::compute_step_coefficients(params, state);
    StepResult r = boltzmann_step(coeffs, params.omega1 * state.theta1, params.omega2 * state.theta2);
    r.new_state = state;
    r.new_state.theta1 = r.exponent / params.omega1;
    return r;
}

StepResult step_oscillator2(const SystemParams& params, const ThermalState& state) {
    const su2::StepCoefficients coeffs = su2::compute_step_coefficients_swapped(params, state);
    StepResult r = boltzmann_step(coeffs, params.omega2 * state.theta2, params.omega1 * state.theta1);
    r.new_state = state;
    r.new_state.theta2 = r.exponent / params.omega2;
    return r;
}

StepPair step(const SystemParams& params, const ThermalState& state) {
    StepPair out;
    out.first = step_oscillator1(params, state);
    out.second = step_oscillator2(params, state);
    out.state = {out.first.new_state.theta1, out.second.new_state.theta2};
    return out;
}

TrajectoryRecord make_record(const SystemParams& params, const ThermalState& state,
                             std::size_t step_index) {
    TrajectoryRecord rec;
    rec.step = step_index;
    rec.elapsed = static_cast<double>(step_index) * params.tau;
    rec.theta1 = state.theta1;
    rec.theta2 = state.theta2;
    rec.t1 = state.temperature1();
    rec.t2 = state.temperature2();
    rec.w1_theta1 = params.omega1 * state.theta1;
    rec.w2_theta2 = params.omega2 * state.theta2;
    rec.nbar_total = total_occupation(params, state);
    return rec;
}

bool ConvergenceMonitor::update(const ThermalState& from, const ThermalState& to) {
    const double h = std::max(std::abs(to.theta1 - from.theta1), std::abs(to.theta2 - from.theta2));
    const double prev = prev_step_;
    prev_step_ = h;
    if (h == 0.0) return true;
    if (!(h < tol_)) return false;
    const double r = prev > 0.0 ? h / prev : 0.0;
    if (r >= 1.0) return false;
    return h * r / (1.0 - r) < tol_;
}

Trajectory iterate(const SystemParams& params, const ThermalState& initial, std::size_t max_steps,
                   double tol, RefreshMode mode) {
    params.validate();
    initial.validate();
    if (!(tol > 0.0)) throw InvalidInput("tol", "must be > 0");

    Trajectory traj;
    traj.params = params;
    traj.records.reserve(std::min<std::size_t>(max_steps, 4096) + 1);
    traj.records.push_back(make_record(params, initial, 0));

    ThermalState current = initial;
    ConvergenceMonitor monitor(tol);
    for (std::size_t n = 1; n <= max_steps; ++n) {
        ThermalState next;
        if (mode == RefreshMode::Mutual) {
            next = step(params, current).state;
        } else {
            next = {step_oscillator1(params, current).new_state.theta1, initial.theta2};
        }
        const bool settled = monitor.update(current, next);
        TrajectoryRecord rec = make_record(params, next, n);
        rec.settled = settled;
        traj.records.push_back(rec);
        current = next;
        if (settled) {
            traj.converged = true;
            break;
        }
    }
    return traj;
}

ThermalState predict_fixed_point(const SystemParams& params, const ThermalState& initial) {
    params.validate();
    initial.validate();
    const double x = std::log1p(2.0 / total_occupation(params, initial));
    return {x / params.omega1, x / params.omega2};
}

ThermalState predict_reservoir_fixed_point(const SystemParams& params,
                                           const ThermalState& initial) {
    params.validate();
    initial.validate();
    return {params.omega2 * initial.theta2 / params.omega1, initial.theta2};
}

std::optional<std::size_t> steps_to_settle(const Trajectory& traj, const ThermalState& eq,
                                           double threshold) {
    for (const auto& rec : traj.records) {
        if (std::abs(rec.t1 - eq.temperature1()) < threshold &&
            std::abs(rec.t2 - eq.temperature2()) < threshold) {
            return rec.step;
        }
    }
    return std::nullopt;
}

} // namespace repint
