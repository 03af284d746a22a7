// fock.hpp - brute-force ground truth on a truncated two-oscillator Fock space.
//
// Two routes are provided:
//   * a density-matrix pipeline (thermal_density, tensor, evolve, partial_trace,
//     refresh, fit_theta) operating on full complex matrices, and
//   * SectorOracle, which exploits that the interaction conserves n1 + n2 and
//     that the refreshed state is diagonal: it propagates populations through
//     the exact per-sector transition probabilities |<k|U|l>|^2.
// Both diagonalize the same truncated Hamiltonian; tests pin them together.

#pragma once

#include "repint/relaxation.hpp"
#include "repint/types.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <optional>
#include <utility>
#include <vector>

namespace repint::fock {

struct TruncationPolicy {
    int nmax{0};              // cutoff per oscillator, basis n = 0..nmax
    double tail_bound{1e-12}; // max Boltzmann mass allowed beyond the cutoff

    // Smallest cutoff for which every oscillator tail along a refresh
    // trajectory stays below tail_bound. Mean occupations only mix convexly
    // under the interaction, so max(nbar1, nbar2) of `initial` bounds them.
    static int required_nmax(const SystemParams& params, const ThermalState& initial,
                             double tail_bound);
    static TruncationPolicy adaptive(const SystemParams& params, const ThermalState& initial,
                                     double tail_bound = 1e-12);

    // Throws TruncationError if either initial thermal tail exceeds tail_bound.
    void check(const SystemParams& params, const ThermalState& initial) const;

    // Populations below this are too close to the cutoff to enter a fit.
    double fit_floor() const;

    int dim1() const { return nmax + 1; }
    int dim2() const { return (nmax + 1) * (nmax + 1); }
};

// Mass of a thermal distribution beyond the cutoff: e^{-x (nmax+1)}.
double thermal_tail(double omega_theta, int nmax);

struct DensityMatrix {
    Eigen::MatrixXcd entries;
    int nmax{0};
    bool joint{false};     // (n1, n2) lexicographic when true, n otherwise
    double tail_mass{0.0}; // untruncated mass dropped when this state was built

    int dim() const { return static_cast<int>(entries.rows()); }
    int index(int n1, int n2) const { return n1 * (nmax + 1) + n2; }
    std::pair<int, int> label(int idx) const { return {idx / (nmax + 1), idx % (nmax + 1)}; }

    Eigen::VectorXd populations() const { return entries.diagonal().real(); }
};

struct InvariantReport {
    double trace_error{0.0};       // |Tr rho - 1|
    double hermiticity_error{0.0}; // max |rho - rho^dagger|
    double min_eigenvalue{0.0};
    double max_off_diagonal{0.0};
};

InvariantReport check_invariants(const DensityMatrix& rho);

struct OperatorSet {
    int nmax{0};
    Eigen::SparseMatrix<double> a1, a1dag, a2, a2dag;
    Eigen::SparseMatrix<double> h1, h2, hint, htotal;
    Eigen::SparseMatrix<double> number; // n1 + n2
};

OperatorSet build_operators(const SystemParams& params, const TruncationPolicy& trunc);
// Additionally rejects a cutoff too small for `initial`'s thermal tails.
OperatorSet build_operators(const SystemParams& params, const TruncationPolicy& trunc,
                            const ThermalState& initial);

// Diagonal e^{-omega n theta}, renormalized on the truncated basis.
DensityMatrix thermal_density(double theta, double omega, const TruncationPolicy& trunc);

DensityMatrix tensor(const DensityMatrix& rho1, const DensityMatrix& rho2);

// exp(-i H tau) for Hermitian H, one eigendecomposition per connected block of
// H's sparsity pattern. Reusable across states.
class Propagator {
public:
    Propagator(const Eigen::SparseMatrix<double>& hamiltonian, double tau);

    DensityMatrix apply(const DensityMatrix& rho) const;
    double unitarity_error() const { return unitarity_error_; }
    int block_count() const { return static_cast<int>(blocks_.size()); }

private:
    struct Block {
        std::vector<int> idx;
        Eigen::MatrixXcd u;
    };
    int dim_{0};
    std::vector<Block> blocks_;
    double unitarity_error_{0.0};
};

DensityMatrix evolve(const DensityMatrix& rho12, const OperatorSet& ops, double tau);

DensityMatrix partial_trace(const DensityMatrix& rho12, Oscillator keep);

DensityMatrix refresh(const DensityMatrix& rho12, RefreshMode mode,
                      const std::optional<DensityMatrix>& rho2_initial = std::nullopt);

template <class Op>
std::complex<double> expectation(const DensityMatrix& rho, const Op& op) {
    return (Eigen::MatrixXcd(op.template cast<std::complex<double>>()) * rho.entries).trace();
}

struct FitResult {
    double theta{0.0};
    double residual{0.0};       // max |theta_n - theta| over used ratios
    double off_diagonal{0.0};   // max |rho_{n n'}|, n != n'
    int ratios_used{0};
    bool warning{false};        // non-Boltzmann, no usable ratios, or theta <= 0
};

inline constexpr double kFitFloor = 1e-13;
inline constexpr double kFitThreshold = 1e-8;

// theta from the mean of -ln(p_{n+1}/p_n)/omega over p_n, p_{n+1} > floor.
FitResult fit_theta(const DensityMatrix& rho, double omega, double floor = kFitFloor,
                    double threshold = kFitThreshold);
FitResult fit_theta(const Eigen::VectorXd& populations, double omega, double floor = kFitFloor,
                    double threshold = kFitThreshold);

// ------------------------------------------------------------ oracle step ---

struct OracleStep {
    ThermalState state;
    FitResult fit1;
    FitResult fit2;
    double nbar_before{0.0}; // <n1 + n2> on the truncated basis
    double nbar_after{0.0};
    int nmax{0};
};

// Full density-matrix route: thermal x thermal -> evolve -> traces -> fits.
// `reservoir_theta2` is oscillator 2's fixed state in reservoir mode (defaults
// to the input theta2).
OracleStep oracle_step_dense(const SystemParams& params, const ThermalState& state,
                             const TruncationPolicy& trunc, RefreshMode mode = RefreshMode::Mutual,
                             std::optional<double> reservoir_theta2 = std::nullopt);

// Population route with per-sector transition probabilities cached for a
// fixed (params, nmax).
class SectorOracle {
public:
    SectorOracle(const SystemParams& params, const TruncationPolicy& trunc);

    // Joint diagonal of U (p1 (x) p2) U^dagger, returned as its two marginals.
    std::pair<Eigen::VectorXd, Eigen::VectorXd> evolve_marginals(const Eigen::VectorXd& p1,
                                                                 const Eigen::VectorXd& p2) const;

    // Throws TruncationError if a fitted state's tail beyond nmax exceeds
    // 10 x tail_bound.
    OracleStep step(const ThermalState& state, RefreshMode mode = RefreshMode::Mutual,
                    std::optional<double> reservoir_theta2 = std::nullopt) const;

    const TruncationPolicy& truncation() const { return trunc_; }
    double max_unitarity_error() const { return unitarity_error_; }

private:
    struct Sector {
        int n1_lo{0};
        int total{0};
        Eigen::MatrixXd transfer; // |U_{k l}|^2, rows = out, cols = in
    };
    SystemParams params_;
    TruncationPolicy trunc_;
    std::vector<Sector> sectors_;
    double unitarity_error_{0.0};
};

OracleStep oracle_step(const SystemParams& params, const ThermalState& state,
                       const TruncationPolicy& trunc, RefreshMode mode = RefreshMode::Mutual,
                       std::optional<double> reservoir_theta2 = std::nullopt);

struct OracleTrajectory {
    Trajectory trajectory;
    std::vector<OracleStep> steps; // steps[k] produced records[k + 1]
};

OracleTrajectory oracle_iterate(const SystemParams& params, const ThermalState& initial,
                                const TruncationPolicy& trunc, std::size_t max_steps,
                                double tol = kDefaultTol, RefreshMode mode = RefreshMode::Mutual);

} // namespace repint::fock
