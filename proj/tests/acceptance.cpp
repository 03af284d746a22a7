// Acceptance run: one PASS/FAIL line per criterion, measured values alongside.
// Exit status is the number of failed criteria.

#include "repint/equilibrium.hpp"
#include "repint/fock.hpp"
#include "repint/run.hpp"
#include "repint/su2.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace repint;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

struct Outcome {
    bool pass{true};
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(unsigned seed) : gen(seed) {}
    double u(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
    SystemParams params() { return {u(0.5, 10), u(0.5, 10), u(0.5, 10), u(0.05, 1), u(0.1, 3)}; }
    ThermalState state() { return ThermalState::from_temperatures(u(0.5, 10), u(0.5, 10)); }
};

const SystemParams kEqual{1.0, 1.0, 1.0, 1.0, 2.7};
const ThermalState kEqualStart = ThermalState::from_temperatures(1.0, 9.0);
const SystemParams kUnequal{10.0, 4.0, 5.0, 1.0, 1.5};
const ThermalState kUnequalStart = ThermalState::from_temperatures(8.0, 2.0);

// 1 ------------------------------------------------------------------------
Outcome equal_frequency_thermalization() {
    Outcome o;
    run::RunConfig cfg;
    cfg.params = kEqual;
    cfg.t1 = 1.0;
    cfg.t2 = 9.0;
    const auto t0 = Clock::now();
    std::ostringstream sink;
    const auto res = run::run_simulate(cfg, sink);
    const double elapsed = seconds_since(t0);
    const auto& last = res.trajectory.final();
    const double pred = predict_fixed_point(kEqual, kEqualStart).temperature1();
    const double t_inf = 0.5 * (last.t1 + last.t2);
    o.require(res.exit_code == run::kOk, "converged in " + std::to_string(last.step) + " steps");
    o.require(std::abs(last.t1 - last.t2) <= 1e-8, "|T1-T2|=" + fmt("%.2e", std::abs(last.t1 - last.t2)));
    o.require(rel(t_inf, 5.0) <= 0.02, "T=" + fmt("%.6f", t_inf) + " vs 5.0 (" + fmt("%.2f%%", 100 * rel(t_inf, 5.0)) + ")");
    o.require(std::abs(t_inf - pred) <= 1e-6, "vs conservation " + fmt("%.9f", pred) + " gap " + fmt("%.1e", std::abs(t_inf - pred)));
    o.require(elapsed < 1.0, fmt("%.3fs", elapsed));
    return o;
}

// 2 ------------------------------------------------------------------------
Outcome unequal_frequency_law() {
    Outcome o;
    const ThermalState pred = predict_fixed_point(kUnequal, kUnequalStart);

    auto t0 = Clock::now();
    const Trajectory closed = iterate(kUnequal, kUnequalStart);
    const double closed_time = seconds_since(t0);
    const auto& last = closed.final();
    o.require(closed.converged, "closed converged");
    o.require(std::abs(last.w1_theta1 - last.w2_theta2) <= 1e-8,
              "|w1th1-w2th2|=" + fmt("%.1e", std::abs(last.w1_theta1 - last.w2_theta2)));
    o.require(std::abs(last.t1 - pred.temperature1()) <= 1e-3 && std::abs(last.t2 - pred.temperature2()) <= 1e-3,
              "T=(" + fmt("%.4f", last.t1) + "," + fmt("%.4f", last.t2) + ") vs (" + fmt("%.4f", pred.temperature1()) +
                  "," + fmt("%.4f", pred.temperature2()) + ")");
    o.require(closed_time < 1.0, "closed " + fmt("%.3fs", closed_time));

    t0 = Clock::now();
    const fock::TruncationPolicy trunc{60, 1e-12};
    const auto orc = fock::oracle_iterate(kUnequal, kUnequalStart, trunc, 100000);
    const double oracle_time = seconds_since(t0);
    const auto& olast = orc.trajectory.final();
    o.require(orc.trajectory.converged, "oracle converged at nmax=60");
    o.require(std::abs(olast.t1 - pred.temperature1()) <= 1e-3 && std::abs(olast.t2 - pred.temperature2()) <= 1e-3,
              "oracle T=(" + fmt("%.4f", olast.t1) + "," + fmt("%.4f", olast.t2) + ")");
    o.require(oracle_time < 60.0, "oracle " + fmt("%.3fs", oracle_time));
    return o;
}

// 3 ------------------------------------------------------------------------
Outcome closed_form_matches_oracle() {
    Outcome o;
    Rng rng(3);
    double worst_rel = 0.0, worst_fit = 0.0;
    int max_nmax = 0;
    const auto t0 = Clock::now();
    for (int i = 0; i < 20; ++i) {
        const SystemParams p = rng.params();
        const ThermalState s0 = rng.state();
        const auto trunc = fock::TruncationPolicy::adaptive(p, s0, 1e-12);
        max_nmax = std::max(max_nmax, trunc.nmax);
        const auto orc = fock::oracle_iterate(p, s0, trunc, 5);
        ThermalState s = s0;
        for (const auto& st : orc.steps) {
            s = step(p, s).state;
            worst_rel = std::max({worst_rel, rel(st.state.theta1, s.theta1), rel(st.state.theta2, s.theta2)});
            worst_fit = std::max({worst_fit, st.fit1.residual, st.fit2.residual});
        }
    }
    o.require(worst_rel <= 1e-6, "max rel diff " + fmt("%.2e", worst_rel));
    o.require(worst_fit <= 1e-8, "max fit residual " + fmt("%.2e", worst_fit));
    o.detail += "; largest nmax " + std::to_string(max_nmax) + ", " + fmt("%.1fs", seconds_since(t0));
    return o;
}

// 4 ------------------------------------------------------------------------
Outcome su2_decomposition() {
    Outcome o;
    Rng rng(4);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.u(-30, 30), b = rng.u(0, 60), g = rng.u(-8, 8);
        const su2::StepCoefficients c{a, b, {0.0, g}, std::hypot(a / 2, b / 2)};
        worst = std::max(worst, su2::su2_reconstruction_error(c, su2::compute_euler(c)));
    }
    o.require(worst <= 1e-10, "reconstruction max " + fmt("%.2e", worst));

    double unitarity = 0.0, identity = 0.0;
    for (int twice = 0; twice <= 10; ++twice) {
        const auto n = twice + 1;
        const auto d = su2::wigner_d_matrix({twice}, rng.u(-M_PI, M_PI));
        unitarity = std::max(unitarity, (d * d.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff());
        identity = std::max(identity,
                            (su2::wigner_d_matrix({twice}, 0.0) - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff());
    }
    o.require(unitarity <= 1e-12, "wigner unitarity " + fmt("%.1e", unitarity));
    o.require(identity == 0.0, "d(0)-I " + fmt("%.1e", identity));
    return o;
}

// 5 ------------------------------------------------------------------------
Outcome fixed_point_invariance() {
    Outcome o;
    Rng rng(5);
    double worst = 0.0;
    auto probe = [&](const SystemParams& p, const ThermalState& s) {
        const auto out = step(p, s).state;
        return std::max(std::abs(out.theta1 - s.theta1), std::abs(out.theta2 - s.theta2));
    };
    worst = probe({1.0, 3.0, 1.0, 1.0, 1.0}, ThermalState::from_temperatures(2.0, 6.0));
    for (int i = 1; i < 100; ++i) {
        const SystemParams p = rng.params();
        const double x = rng.u(0.05, 20.0);
        worst = std::max(worst, probe(p, {x / p.omega1, x / p.omega2}));
    }
    o.require(worst <= 1e-12, "fixed points " + fmt("%.1e", worst));

    double rabi = 0.0;
    for (int k = 1; k <= 4; ++k) {
        // a = 0, b = 2 pi k
        rabi = std::max(rabi, probe({2.0, 2.0, 1.0, M_PI * k, 1.0}, rng.state()));
        // detuned, (a/2)^2 + (b/2)^2 = (pi k)^2 with a = 2
        rabi = std::max(rabi, probe({3.0, 1.0, 1.0, std::sqrt(M_PI * M_PI * k * k - 1.0), 1.0}, rng.state()));
    }
    o.require(rabi <= 1e-10, "full-period windows " + fmt("%.1e", rabi));
    return o;
}

// 6 ------------------------------------------------------------------------
Outcome conservation_suite() {
    Outcome o;
    Rng rng(6);
    double drift = 0.0;
    auto track = [&](const Trajectory& t) {
        for (const auto& r : t.records) drift = std::max(drift, std::abs(r.nbar_total - t.records.front().nbar_total));
    };
    track(iterate(kEqual, kEqualStart));
    track(iterate(kUnequal, kUnequalStart));
    for (int i = 0; i < 50; ++i) track(iterate(rng.params(), rng.state()));
    o.require(drift <= 1e-9, "trajectory nbar drift " + fmt("%.1e", drift));

    // density-matrix route, three windows each
    double trace = 0.0, herm = 0.0, min_eig = 0.0, number = 0.0, energy = 0.0;
    const std::vector<std::pair<SystemParams, ThermalState>> cases = {
        {{1.5, 1.5, 1.0, 0.8, 0.9}, ThermalState::from_temperatures(1.2, 3.0)},
        {{2.0, 1.5, 1.0, 0.6, 1.1}, ThermalState::from_temperatures(1.0, 2.5)},
        {{1.0, 1.0, 2.0, 0.3, 2.7}, ThermalState::from_temperatures(0.5, 1.5)},
    };
    for (const auto& [p, s] : cases) {
        const auto trunc = fock::TruncationPolicy::adaptive(p, s, 1e-6);
        const auto ops = fock::build_operators(p, trunc, s);
        const Eigen::SparseMatrix<double> free = ops.h1 + ops.h2;
        auto rho = fock::tensor(fock::thermal_density(s.theta1, p.omega1, trunc),
                                fock::thermal_density(s.theta2, p.omega2, trunc));
        for (int k = 0; k < 3; ++k) {
            const auto evolved = fock::evolve(rho, ops, p.tau);
            const auto inv = fock::check_invariants(evolved);
            trace = std::max(trace, inv.trace_error);
            herm = std::max(herm, inv.hermiticity_error);
            min_eig = std::min(min_eig, inv.min_eigenvalue);
            number = std::max(number, std::abs(fock::expectation(evolved, ops.number) - fock::expectation(rho, ops.number)));
            if (p.omega1 == p.omega2) {
                energy = std::max(energy, std::abs(fock::expectation(evolved, free) - fock::expectation(rho, free)));
            }
            rho = fock::refresh(evolved, RefreshMode::Mutual);
        }
    }
    o.require(trace <= 1e-12, "trace " + fmt("%.1e", trace));
    o.require(herm <= 1e-12, "hermiticity " + fmt("%.1e", herm));
    o.require(min_eig >= -1e-12, "min eigenvalue " + fmt("%.1e", min_eig));
    o.require(number <= 1e-10, "<N> " + fmt("%.1e", number));
    o.require(energy <= 1e-10, "<w1 n1 + w2 n2> (equal w) " + fmt("%.1e", energy));
    return o;
}

// 7 ------------------------------------------------------------------------
Outcome detailed_balance() {
    Outcome o;
    double uniform = 0.0, perturbed_min = INFINITY;
    Rng rng(7);
    for (int n = 0; n <= 50; ++n) {
        auto d = equilibrium::uniform_sector(n);
        for (int n1 = 0; n1 <= n; ++n1) uniform = std::max(uniform, std::abs(equilibrium::balance_residual(d, n1, n - n1)));
        if (n == 0) continue;
        d.probs[static_cast<std::size_t>(rng.u(0, n + 1))] *= 1.0 + rng.u(0.01, 0.1);
        double worst = 0.0;
        for (int n1 = 0; n1 <= n; ++n1) worst = std::max(worst, std::abs(equilibrium::balance_residual(d, n1, n - n1)));
        perturbed_min = std::min(perturbed_min, worst);
    }
    o.require(uniform <= 1e-12, "uniform residual " + fmt("%.1e", uniform));
    o.require(perturbed_min > 1e-6, "smallest perturbed residual " + fmt("%.2e", perturbed_min));
    return o;
}

// 8 ------------------------------------------------------------------------
Outcome relaxation_orderings() {
    Outcome o;
    run::SweepSpec plan;
    plan.base.params = kEqual;
    plan.base.t1 = 1.0;
    plan.base.t2 = 9.0;
    plan.axes = {{"omega", {1.0, 5.0}}, {"tau", {0.3, 2.7}}};
    std::ostringstream sink;
    const auto rows = run::run_sweep(plan, sink);
    // rows: (w=1,tau=0.3) (w=1,tau=2.7) (w=5,tau=0.3) (w=5,tau=2.7)
    const double base = rows[1].n_tau_to_settle;
    const double short_tau = rows[0].n_tau_to_settle;
    const double fast_omega = rows[3].n_tau_to_settle;
    const bool all_settled = rows[0].steps_to_settle >= 0 && rows[1].steps_to_settle >= 0 && rows[3].steps_to_settle >= 0;
    o.require(all_settled, "all settled");
    o.require(short_tau < base, "tau=0.3: " + fmt("%.1f", short_tau) + " < tau=2.7: " + fmt("%.1f", base));
    o.require(fast_omega < base, "omega=5: " + fmt("%.1f", fast_omega) + " < omega=1: " + fmt("%.1f", base));
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"1 equal-frequency thermalization", equal_frequency_thermalization},
        {"2 unequal-frequency equilibrium law", unequal_frequency_law},
        {"3 closed form vs Fock oracle", closed_form_matches_oracle},
        {"4 SU(2) decomposition", su2_decomposition},
        {"5 fixed-point invariance", fixed_point_invariance},
        {"6 conservation", conservation_suite},
        {"7 detailed balance", detailed_balance},
        {"8 relaxation-speed orderings", relaxation_orderings},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failed;
        std::printf("%s  %-38s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
