// equilibrium.hpp - detailed balance within fixed-N sectors and the
// omega1 theta1 = omega2 theta2 equilibrium condition.

#pragma once

#include "repint/fock.hpp"
#include "repint/relaxation.hpp"

#include <optional>
#include <vector>

namespace repint::equilibrium {

// Distribution over the N+1 states |n1, N - n1> of one sector, indexed by n1.
struct SectorDistribution {
    int total{0};
    std::vector<double> probs;
    double mass{1.0};   // population before renormalization (1 when built directly)
    bool empty{false};  // every population below 1e-15

    int nu(int n1) const { return 2 * n1 - total; }
    double at(int n1) const;  // 0 outside the sector
};

enum class Transition { Raise1, Raise2 };

// <n1+1, n2-1|H_int|n1, n2> (Raise1) or <n1-1, n2+1|H_int|n1, n2> (Raise2).
double transition_amplitude(int n1, int n2, Transition direction, const SystemParams& params);

// P(n1,n2)[2 n1 n2 + n1 + n2] - P(n1-1,n2+1)[n1 (n2+1)] - P(n1+1,n2-1)[n2 (n1+1)].
double balance_residual(const SectorDistribution& dist, int n1, int n2);

SectorDistribution uniform_sector(int total);

// Diagonal of rho12 restricted to n1 + n2 = total, renormalized within the sector.
SectorDistribution sector_distribution_from_density(const fock::DensityMatrix& rho12, int total);

// max_n1 |P(n1) - 1/(N+1)|
double deviation_from_uniform(const SectorDistribution& dist);

struct EquilibriumReport {
    bool converged{false};
    double condition_gap{0.0}; // |omega1 theta1 - omega2 theta2| at the final state
    bool condition_met{false};
    bool equal_frequency{false};
    double t1_final{0.0};
    double t2_final{0.0};
    // Equal-frequency case only.
    std::optional<double> mean_initial;        // (T1(0) + T2(0)) / 2
    std::optional<double> gap_to_mean_initial; // |T_inf - mean_initial| / mean_initial
    std::optional<double> conservation_prediction; // from predict_fixed_point
    std::optional<double> gap_to_conservation;     // |T_inf - prediction|
};

EquilibriumReport check_equilibrium_condition(const Trajectory& traj, double tol);

} // namespace repint::equilibrium
