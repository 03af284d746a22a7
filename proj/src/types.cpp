#include "repint/types.hpp"

namespace repint {

namespace {

void require_finite(const char* field, double v) {
    if (!std::isfinite(v)) {
        throw InvalidInput(field, "must be finite, got " + std::to_string(v));
    }
}

void require_positive(const char* field, double v) {
    require_finite(field, v);
    if (!(v > 0.0)) {
        throw InvalidInput(field, "must be > 0, got " + std::to_string(v));
    }
}

} // namespace

void SystemParams::validate() const {
    require_positive("omega1", omega1);
    require_positive("omega2", omega2);
    require_positive("omega", omega_int);
    require_finite("lambda", lambda);
    if (lambda < 0.0) {
        throw InvalidInput("lambda", "must be >= 0, got " + std::to_string(lambda));
    }
    require_positive("tau", tau);
}

void ThermalState::validate() const {
    require_positive("theta1", theta1);
    require_positive("theta2", theta2);
}

std::string to_string(RefreshMode mode) {
    return mode == RefreshMode::Mutual ? "mutual" : "reservoir";
}

RefreshMode refresh_mode_from_string(const std::string& name) {
    if (name == "mutual") return RefreshMode::Mutual;
    if (name == "reservoir") return RefreshMode::Reservoir;
    throw InvalidInput("refresh", "expected 'mutual' or 'reservoir', got '" + name + "'");
}

} // namespace repint
