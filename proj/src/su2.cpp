#include "repint/su2.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace repint::su2 {

namespace {

constexpr cplx I{0.0, 1.0};

// sin(x)/x with the removable singularity handled by its series.
double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// Unit-vector components of exp(-i d n.sigma) sigma3 exp(+i d n.sigma) = m.sigma,
// n = (b/2, 0, a/2)/d.
struct RotatedAxis {
    double m1, m2, m3;
};

RotatedAxis rotated_axis(double a, double b, double d) {
    const double sc = sinc(d);
    const double cd = std::cos(d);
    return {
        0.5 * a * b * sc * sc,
        -b * sc * cd,
        cd * cd + (0.25 * a * a - 0.25 * b * b) * sc * sc,
    };
}

std::string dump(const AbcdIntermediates& x) {
    std::ostringstream os;
    os.precision(17);
    os << "A=" << x.A << " B=" << x.B << " C=" << x.C << " D=" << x.D << " d=" << x.phi_half;
    return os.str();
}

} // namespace

StepCoefficients compute_step_coefficients(const SystemParams& params, const ThermalState& state) {
    params.validate();
    state.validate();
    StepCoefficients k;
    k.a = params.tau * (params.omega1 - params.omega2);
    k.b = 2.0 * params.omega_int * params.lambda * params.tau;
    k.c = cplx(0.0, params.omega2 * state.theta2 - params.omega1 * state.theta1);
    k.d = std::hypot(0.5 * k.a, 0.5 * k.b);
    return k;
}

StepCoefficients compute_step_coefficients_swapped(const SystemParams& params,
                                                   const ThermalState& state) {
    SystemParams swapped = params;
    std::swap(swapped.omega1, swapped.omega2);
    return compute_step_coefficients(swapped, {state.theta2, state.theta1});
}

AbcdIntermediates compute_abcd(const StepCoefficients& k) {
    const RotatedAxis m = rotated_axis(k.a, k.b, k.d);
    const cplx s = std::sin(0.5 * k.c);
    AbcdIntermediates x;
    x.A = std::cos(0.5 * k.c);
    x.B = m.m1 * s;
    x.C = m.m2 * s;
    x.D = m.m3 * s;
    x.phi_half = k.d;
    return x;
}

EulerDecomposition compute_euler(const AbcdIntermediates& x) {
    if (std::abs(x.A) == 0.0) {
        throw BranchError("compute_euler: A = 0, arctan(D/A) undefined; " + dump(x));
    }
    const cplx zeta_plus = std::atan(x.D / x.A); // (alpha + gamma)/2
    const cplx cb = std::sqrt(x.A * x.A + x.D * x.D);
    const cplx sb = std::sqrt(x.B * x.B + x.C * x.C);

    // (alpha - gamma)/2 from the phase of C - iB relative to sin(beta/2);
    // zero in the B = C = 0 limit.
    cplx eta{};
    if (std::abs(sb) > 0.0) {
        eta = -I * std::log((x.C - I * x.B) / sb);
    }

    EulerDecomposition e;
    e.beta = 2.0 * (-I) * std::log(cb + I * sb);
    e.alpha = zeta_plus + eta;
    e.gamma = zeta_plus - eta;
    e.cos_beta_half = cb.real();
    const cplx delta = -I * zeta_plus;
    e.delta = delta.real();
    e.phi_half = x.phi_half;
    e.realness_residue = std::max(std::abs(cb.imag()), std::abs(delta.imag()));

    // Euler product on j = 1/2 must rebuild A I - i(B s1 + C s2 + D s3).
    const cplx ep = std::exp(-I * zeta_plus);
    const cplx em = std::exp(-I * eta);
    const cplx r11 = ep * cb;
    const cplx r12 = -em * sb;
    const cplx r21 = sb / em;
    const cplx r22 = cb / ep;
    const double scale = std::max({1.0, std::abs(x.A), std::abs(x.B), std::abs(x.C), std::abs(x.D)});
    const double err = std::max({std::abs(r11 - (x.A - I * x.D)), std::abs(r12 - (-I * x.B - x.C)),
                                 std::abs(r21 - (-I * x.B + x.C)), std::abs(r22 - (x.A + I * x.D))});
    if (!(err <= 1e-10 * scale * scale)) {
        std::ostringstream os;
        os.precision(3);
        os << "compute_euler: branch ambiguity, Euler product off by " << err << "; ";
        throw BranchError(os.str() + dump(x));
    }
    return e;
}

RealifiedEuler euler_realified(const StepCoefficients& k) {
    const double g = k.c.imag();
    const RotatedAxis m = rotated_axis(k.a, k.b, k.d);
    const double sh = std::sinh(0.5 * g);
    const double bt = m.m1 * sh;
    const double ct = m.m2 * sh;
    const double perp2 = bt * bt + ct * ct;
    RealifiedEuler r;
    r.cos_beta_half = std::sqrt(1.0 + perp2);
    r.cos_beta_half_minus_one = perp2 / (1.0 + r.cos_beta_half);
    r.delta = std::atanh(m.m3 * std::tanh(0.5 * g));
    return r;
}

// --------------------------------------------------------------- Wigner d ---

HalfInt HalfInt::from_double(double v) {
    const double t = 2.0 * v;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) {
        throw InvalidInput("j/m", "not a half-integer: " + std::to_string(v));
    }
    return {static_cast<int>(r)};
}

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double log_factorial(int n) {
    return std::lgamma(static_cast<double>(n) + 1.0);
}

cplx ipow(cplx base, int n) {
    cplx r{1.0, 0.0};
    while (n > 0) {
        if (n & 1) r *= base;
        base *= base;
        n >>= 1;
    }
    return r;
}

} // namespace

cplx wigner_d(HalfInt j, HalfInt mp, HalfInt m, cplx beta) {
    if (j.twice < 0) throw InvalidInput("j", "must be >= 0");
    if (std::abs(m.twice) > j.twice) throw InvalidInput("m", "|m| > j");
    if (std::abs(mp.twice) > j.twice) throw InvalidInput("m'", "|m'| > j");
    if ((j.twice - m.twice) % 2 != 0) throw InvalidInput("m", "j - m not an integer");
    if ((j.twice - mp.twice) % 2 != 0) throw InvalidInput("m'", "j - m' not an integer");

    // All of these are integers after the parity checks above.
    const int jpm = (j.twice + m.twice) / 2;
    const int jmm = (j.twice - m.twice) / 2;
    const int jpmp = (j.twice + mp.twice) / 2;
    const int jmmp = (j.twice - mp.twice) / 2;
    const int mp_minus_m = (mp.twice - m.twice) / 2;

    // Exact factorials keep d(0) = 1 exactly for small j; lgamma beyond 20!.
    const bool exact = std::max({jpm, jmm, jpmp, jmmp}) <= 20;
    const double norm = exact ? std::sqrt(factorial(jpm) * factorial(jpmp)) *
                                    std::sqrt(factorial(jmm) * factorial(jmmp))
                              : 0.0;
    const double log_norm =
        0.5 * (log_factorial(jpm) + log_factorial(jmm) + log_factorial(jpmp) + log_factorial(jmmp));
    const cplx cb = std::cos(0.5 * beta);
    const cplx sb = std::sin(0.5 * beta);

    const int k_lo = std::max(0, -mp_minus_m);
    const int k_hi = std::min(jpm, jmmp);
    cplx sum{};
    for (int k = k_lo; k <= k_hi; ++k) {
        const double coeff =
            exact ? norm / (factorial(jpm - k) * factorial(k) * factorial(jmmp - k) *
                            factorial(k + mp_minus_m))
                  : std::exp(log_norm - log_factorial(jpm - k) - log_factorial(k) -
                             log_factorial(jmmp - k) - log_factorial(k + mp_minus_m));
        const double sign = ((k + mp_minus_m) % 2 == 0) ? 1.0 : -1.0;
        const int cos_pow = jpm + jmmp - 2 * k;
        const int sin_pow = 2 * k + mp_minus_m;
        sum += sign * coeff * ipow(cb, cos_pow) * ipow(sb, sin_pow);
    }
    return sum;
}

Eigen::MatrixXcd wigner_d_matrix(HalfInt j, cplx beta) {
    const int dim = j.twice + 1;
    Eigen::MatrixXcd out(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            out(r, c) = wigner_d(j, {j.twice - 2 * r}, {j.twice - 2 * c}, beta);
        }
    }
    return out;
}

// ------------------------------------------------------------ validation ---

double su2_reconstruction_error(const StepCoefficients& k, const EulerDecomposition& e) {
    using M2 = Eigen::Matrix2cd;
    M2 j1, j2, j3;
    j1 << 0.0, 0.5, 0.5, 0.0;
    j2 << 0.0, -0.5 * I, 0.5 * I, 0.0;
    j3 << 0.5, 0.0, 0.0, -0.5;

    const M2 gen = k.a * j3 + k.b * j1;
    const M2 m_c = (-I * k.c * j3).exp();
    const M2 lhs = M2((-I * gen).exp()) * m_c * M2((I * gen).exp());
    const M2 rhs =
        M2((-I * e.alpha * j3).exp()) * M2((-I * e.beta * j2).exp()) * M2((-I * e.gamma * j3).exp());
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

} // namespace repint::su2
