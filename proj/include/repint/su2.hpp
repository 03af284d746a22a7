// su2.hpp - Schwinger-representation algebra for one interaction window.
//
// Mapping the two modes onto SU(2) generators, one window of evolution acts on
// the joint thermal state through the conjugation
//
//     M = exp(-i(a J3 + b J1)) exp(-i c J3) exp(+i(a J3 + b J1)),
//
// with c purely imaginary. M is rewritten in Euler form
// exp(-i alpha J3) exp(-i beta J2) exp(-i gamma J3); only cos(beta/2) and
// delta = (alpha + gamma)/(2i) enter the reduced populations.

#pragma once

#include "repint/types.hpp"

#include <Eigen/Dense>

#include <complex>

namespace repint::su2 {

using cplx = std::complex<double>;

struct StepCoefficients {
    double a{0.0}; // tau (omega1 - omega2)
    double b{0.0}; // 2 omega lambda tau
    cplx c{};      // i [omega2 theta2 - omega1 theta1]
    double d{0.0}; // sqrt((a/2)^2 + (b/2)^2)
};

// Coefficients of M = A I - i (B sigma1 + C sigma2 + D sigma3) on j = 1/2.
struct AbcdIntermediates {
    cplx A{1.0, 0.0};
    cplx B{};
    cplx C{};
    cplx D{};
    double phi_half{0.0}; // carried through from StepCoefficients::d
};

struct EulerDecomposition {
    cplx alpha{};
    cplx beta{};
    cplx gamma{};
    double cos_beta_half{1.0}; // Re sqrt(A^2 + D^2)
    double delta{0.0};         // Re (alpha + gamma)/(2i)
    double phi_half{0.0};      // rotation half-angle d
    double realness_residue{0.0}; // max |Im| discarded from cos_beta_half and delta
};

StepCoefficients compute_step_coefficients(const SystemParams& params, const ThermalState& state);

// Same as compute_step_coefficients with the roles of the oscillators exchanged
// (a -> -a, c -> -c).
StepCoefficients compute_step_coefficients_swapped(const SystemParams& params,
                                                   const ThermalState& state);

AbcdIntermediates compute_abcd(const StepCoefficients& coeffs);

// Throws BranchError if the Euler product does not rebuild A..D.
EulerDecomposition compute_euler(const AbcdIntermediates& abcd);

inline EulerDecomposition compute_euler(const StepCoefficients& coeffs) {
    return compute_euler(compute_abcd(coeffs));
}

// Realified form valid for purely imaginary c = i g:
//   cos(beta/2) = sqrt(A^2 - Dt^2),  delta = artanh(Dt / A),  Dt = Im D.
// Returns (cos_beta_half, delta, cos_beta_half - 1) without cancellation.
struct RealifiedEuler {
    double cos_beta_half{1.0};
    double delta{0.0};
    double cos_beta_half_minus_one{0.0};
};
RealifiedEuler euler_realified(const StepCoefficients& coeffs);

// --------------------------------------------------------------- Wigner d ---

// Half-integer quantum number stored as twice its value.
struct HalfInt {
    int twice{0};

    static HalfInt from_double(double v);
    double value() const { return 0.5 * twice; }

    friend bool operator==(HalfInt, HalfInt) = default;
};

// d^{(j)}_{m', m}(beta) = <j, m'| exp(-i beta J2) |j, m>, complex beta allowed.
// Throws InvalidInput for |m| > j, |m'| > j or non-integer j - m, j - m'.
cplx wigner_d(HalfInt j, HalfInt m_prime, HalfInt m, cplx beta);

// Full (2j+1)x(2j+1) block, rows/cols ordered m = j, j-1, ..., -j.
Eigen::MatrixXcd wigner_d_matrix(HalfInt j, cplx beta);

// ------------------------------------------------------------ validation ---

// Max entrywise |lhs - rhs| on j = 1/2 between
//   lhs = exp(-i(a J3 + b J1)) exp(-i c J3) exp(+i(a J3 + b J1))
//   rhs = exp(-i alpha J3) exp(-i beta J2) exp(-i gamma J3)
// with both sides built from generic 2x2 matrix exponentials.
double su2_reconstruction_error(const StepCoefficients& coeffs, const EulerDecomposition& euler);

} // namespace repint::su2
