#include "repint/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace repint::equilibrium {

double SectorDistribution::at(int n1) const {
    if (n1 < 0 || n1 > total) return 0.0;
    return probs[static_cast<std::size_t>(n1)];
}

double transition_amplitude(int n1, int n2, Transition direction, const SystemParams& params) {
    if (n1 < 0) throw InvalidInput("n1", "occupation must be >= 0");
    if (n2 < 0) throw InvalidInput("n2", "occupation must be >= 0");
    const double g = params.omega_int * params.lambda;
    if (direction == Transition::Raise1) {
        return g * std::sqrt(static_cast<double>(n2) * (n1 + 1));
    }
    return g * std::sqrt(static_cast<double>(n1) * (n2 + 1));
}

double balance_residual(const SectorDistribution& dist, int n1, int n2) {
    if (n1 < 0 || n2 < 0 || n1 + n2 != dist.total) {
        throw InvalidInput("n1/n2", "state (" + std::to_string(n1) + "," + std::to_string(n2) +
                                        ") is not in sector N=" + std::to_string(dist.total));
    }
    if (static_cast<int>(dist.probs.size()) != dist.total + 1) {
        throw InvalidInput("dist", "expected N+1 probabilities");
    }
    const double a = n1, b = n2;
    return dist.at(n1) * (2.0 * a * b + a + b) - dist.at(n1 - 1) * (a * (b + 1.0)) -
           dist.at(n1 + 1) * (b * (a + 1.0));
}

SectorDistribution uniform_sector(int total) {
    if (total < 0) throw InvalidInput("N", "must be >= 0");
    SectorDistribution d;
    d.total = total;
    d.probs.assign(static_cast<std::size_t>(total) + 1, 1.0 / (total + 1));
    return d;
}

SectorDistribution sector_distribution_from_density(const fock::DensityMatrix& rho12, int total) {
    if (!rho12.joint) throw InvalidInput("rho12", "expects a joint state");
    if (total < 0 || total > 2 * rho12.nmax) {
        throw InvalidInput("N", "outside the truncated basis");
    }
    SectorDistribution d;
    d.total = total;
    d.probs.assign(static_cast<std::size_t>(total) + 1, 0.0);
    for (int n1 = std::max(0, total - rho12.nmax); n1 <= std::min(rho12.nmax, total); ++n1) {
        const int i = rho12.index(n1, total - n1);
        d.probs[static_cast<std::size_t>(n1)] = rho12.entries(i, i).real();
    }
    d.mass = std::accumulate(d.probs.begin(), d.probs.end(), 0.0);
    d.empty = std::all_of(d.probs.begin(), d.probs.end(), [](double p) { return p < 1e-15; });
    if (!d.empty) {
        for (double& p : d.probs) p /= d.mass;
    }
    return d;
}

double deviation_from_uniform(const SectorDistribution& dist) {
    const double u = 1.0 / (dist.total + 1);
    double dev = 0.0;
    for (double p : dist.probs) dev = std::max(dev, std::abs(p - u));
    return dev;
}

EquilibriumReport check_equilibrium_condition(const Trajectory& traj, double tol) {
    if (traj.records.empty()) throw InvalidInput("trajectory", "no records");
    const TrajectoryRecord& first = traj.records.front();
    const TrajectoryRecord& last = traj.final();

    EquilibriumReport r;
    r.converged = traj.converged;
    r.condition_gap = std::abs(last.w1_theta1 - last.w2_theta2);
    r.condition_met = r.condition_gap <= tol;
    r.t1_final = last.t1;
    r.t2_final = last.t2;
    // frequencies read back from CSV columns carry roundoff
    const double w1 = traj.params.omega1, w2 = traj.params.omega2;
    r.equal_frequency = std::abs(w1 - w2) <= 1e-12 * std::max(w1, w2);
    if (r.equal_frequency) {
        const double t_inf = 0.5 * (last.t1 + last.t2);
        r.mean_initial = 0.5 * (first.t1 + first.t2);
        r.gap_to_mean_initial = std::abs(t_inf - *r.mean_initial) / *r.mean_initial;
        // Only the oscillator frequencies enter the conservation prediction.
        SystemParams p = traj.params;
        p.omega_int = 1.0;
        p.lambda = 0.0;
        p.tau = 1.0;
        const ThermalState eq = predict_fixed_point(p, {first.theta1, first.theta2});
        r.conservation_prediction = eq.temperature1();
        r.gap_to_conservation = std::abs(t_inf - eq.temperature1());
    }
    return r;
}

} // namespace repint::equilibrium
