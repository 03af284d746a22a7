// types.hpp - shared parameter/state types and error classes
//
// Units: k = hbar = t0 = 1 throughout. Frequencies are angular frequencies in
// units of 1/t0, times are in units of t0, and temperatures are in units of
// hbar/(k t0).

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace repint {

// ----------------------------------------------------------------- errors ---

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameter or state; `field` names the offending input.
struct InvalidInput : Error {
    InvalidInput(std::string field_name, const std::string& what)
        : Error(field_name + ": " + what), field(std::move(field_name)) {}
    std::string field;
};

// The closed-form map left its physical domain (Boltzmann factor outside (0,1)
// or the SU(2) reconstruction failed). The message carries a coefficient dump.
struct BranchError : Error {
    using Error::Error;
};

// Fock-space cutoff too small for the requested tail bound.
struct TruncationError : Error {
    TruncationError(int required, const std::string& what)
        : Error(what), required_nmax(required) {}
    int required_nmax;
};

// ------------------------------------------------------------ parameters ---

struct SystemParams {
    double omega1{1.0};    // oscillator 1 frequency
    double omega2{1.0};    // oscillator 2 frequency
    double omega_int{1.0}; // frequency of the applied interaction
    double lambda{1.0};    // dimensionless coupling strength
    double tau{1.0};       // interaction window

    void validate() const;

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

// Inverse temperatures theta_i = 1/(k T_i). Positive temperatures only.
struct ThermalState {
    double theta1{1.0};
    double theta2{1.0};

    static ThermalState from_temperatures(double t1, double t2) {
        return {1.0 / t1, 1.0 / t2};
    }

    double temperature1() const { return 1.0 / theta1; }
    double temperature2() const { return 1.0 / theta2; }

    void validate() const;

    friend bool operator==(const ThermalState&, const ThermalState&) = default;
};

enum class Oscillator { First = 1, Second = 2 };

enum class RefreshMode {
    Mutual,    // rho12 -> Tr2[rho12] (x) Tr1[rho12]
    Reservoir, // rho12 -> Tr2[rho12] (x) rho2(0)
};

std::string to_string(RefreshMode mode);
RefreshMode refresh_mode_from_string(const std::string& name);

// Bose-Einstein mean occupation 1/(e^{x}-1) for x = omega*theta > 0.
inline double mean_occupation(double omega, double theta) {
    return 1.0 / std::expm1(omega * theta);
}

// Inverse of mean_occupation: theta such that 1/(e^{omega theta}-1) = nbar.
inline double theta_from_occupation(double omega, double nbar) {
    return std::log1p(1.0 / nbar) / omega;
}

inline double total_occupation(const SystemParams& p, const ThermalState& s) {
    return mean_occupation(p.omega1, s.theta1) + mean_occupation(p.omega2, s.theta2);
}

} // namespace repint
