#include "repint/fock.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace repint::fock {

using cplx = std::complex<double>;

// ------------------------------------------------------------ truncation ---

double thermal_tail(double omega_theta, int nmax) {
    return std::exp(-omega_theta * (nmax + 1));
}

int TruncationPolicy::required_nmax(const SystemParams& params, const ThermalState& initial,
                                    double tail_bound) {
    params.validate();
    initial.validate();
    if (!(tail_bound > 0.0 && tail_bound < 1.0)) {
        throw InvalidInput("tail_bound", "must lie in (0, 1)");
    }
    // The hottest mode (largest nbar) has the slowest geometric decay. One
    // extra level keeps fitted states that land on the bound inside it.
    const double rate = std::min(params.omega1 * initial.theta1, params.omega2 * initial.theta2);
    const double n = std::floor(-std::log(tail_bound) / rate) + 1.0;
    return std::max(1, static_cast<int>(n));
}

TruncationPolicy TruncationPolicy::adaptive(const SystemParams& params, const ThermalState& initial,
                                            double tail_bound) {
    return {required_nmax(params, initial, tail_bound), tail_bound};
}

void TruncationPolicy::check(const SystemParams& params, const ThermalState& initial) const {
    if (nmax < 1) throw InvalidInput("nmax", "must be >= 1");
    const double tail1 = thermal_tail(params.omega1 * initial.theta1, nmax);
    const double tail2 = thermal_tail(params.omega2 * initial.theta2, nmax);
    if (!(tail1 < tail_bound && tail2 < tail_bound)) {
        const int required = required_nmax(params, initial, tail_bound);
        throw TruncationError(required, "nmax=" + std::to_string(nmax) +
                                            " leaves thermal tail mass above tail_bound; need nmax >= " +
                                            std::to_string(required));
    }
}

double TruncationPolicy::fit_floor() const {
    return std::max(kFitFloor, std::sqrt(tail_bound));
}

// -------------------------------------------------------- density matrix ---

InvariantReport check_invariants(const DensityMatrix& rho) {
    InvariantReport r;
    r.trace_error = std::abs(rho.entries.trace() - cplx(1.0, 0.0));
    r.hermiticity_error = (rho.entries - rho.entries.adjoint()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXcd herm = 0.5 * (rho.entries + rho.entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    Eigen::MatrixXd mag = rho.entries.cwiseAbs();
    mag.diagonal().setZero();
    r.max_off_diagonal = mag.size() > 0 ? mag.maxCoeff() : 0.0;
    return r;
}

// -------------------------------------------------------------- operators ---

namespace {

using Triplet = Eigen::Triplet<double>;
using Sparse = Eigen::SparseMatrix<double>;

Sparse joint_lowering(int nmax, Oscillator which) {
    const int d = nmax + 1;
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(d) * d);
    for (int n1 = 0; n1 <= nmax; ++n1) {
        for (int n2 = 0; n2 <= nmax; ++n2) {
            const int col = n1 * d + n2;
            if (which == Oscillator::First && n1 > 0) {
                t.emplace_back((n1 - 1) * d + n2, col, std::sqrt(static_cast<double>(n1)));
            } else if (which == Oscillator::Second && n2 > 0) {
                t.emplace_back(n1 * d + n2 - 1, col, std::sqrt(static_cast<double>(n2)));
            }
        }
    }
    Sparse m(d * d, d * d);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

} // namespace

OperatorSet build_operators(const SystemParams& params, const TruncationPolicy& trunc) {
    params.validate();
    if (trunc.nmax < 1) throw InvalidInput("nmax", "must be >= 1");
    OperatorSet ops;
    ops.nmax = trunc.nmax;
    ops.a1 = joint_lowering(trunc.nmax, Oscillator::First);
    ops.a2 = joint_lowering(trunc.nmax, Oscillator::Second);
    ops.a1dag = ops.a1.transpose();
    ops.a2dag = ops.a2.transpose();
    const Sparse n1 = ops.a1dag * ops.a1;
    const Sparse n2 = ops.a2dag * ops.a2;
    ops.h1 = params.omega1 * n1;
    ops.h2 = params.omega2 * n2;
    ops.hint = (params.omega_int * params.lambda) * Sparse(ops.a1dag * ops.a2 + ops.a2dag * ops.a1);
    ops.htotal = ops.h1 + ops.h2 + ops.hint;
    ops.number = n1 + n2;
    return ops;
}

OperatorSet build_operators(const SystemParams& params, const TruncationPolicy& trunc,
                            const ThermalState& initial) {
    trunc.check(params, initial);
    return build_operators(params, trunc);
}

// ---------------------------------------------------------------- states ---

namespace {

Eigen::VectorXd thermal_populations(double theta, double omega, int nmax) {
    Eigen::VectorXd p(nmax + 1);
    for (int n = 0; n <= nmax; ++n) p(n) = std::exp(-omega * theta * n);
    return p / p.sum();
}

} // namespace

DensityMatrix thermal_density(double theta, double omega, const TruncationPolicy& trunc) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidInput("theta", "must be finite and > 0");
    if (!(omega > 0.0)) throw InvalidInput("omega", "must be > 0");
    if (trunc.nmax < 1) throw InvalidInput("nmax", "must be >= 1");
    DensityMatrix rho;
    rho.nmax = trunc.nmax;
    rho.joint = false;
    rho.tail_mass = thermal_tail(omega * theta, trunc.nmax);
    if (!(rho.tail_mass < trunc.tail_bound)) {
        const int required =
            std::max(1, static_cast<int>(std::floor(-std::log(trunc.tail_bound) / (omega * theta)) + 1.0));
        throw TruncationError(required, "thermal_density: tail mass " + std::to_string(rho.tail_mass) +
                                            " >= tail_bound at nmax=" + std::to_string(trunc.nmax));
    }
    rho.entries = thermal_populations(theta, omega, trunc.nmax).cast<cplx>().asDiagonal();
    return rho;
}

DensityMatrix tensor(const DensityMatrix& rho1, const DensityMatrix& rho2) {
    if (rho1.joint || rho2.joint || rho1.nmax != rho2.nmax) {
        throw InvalidInput("tensor", "expects two single-oscillator states with equal nmax");
    }
    const int d = rho1.dim();
    DensityMatrix out;
    out.nmax = rho1.nmax;
    out.joint = true;
    out.tail_mass = rho1.tail_mass + rho2.tail_mass;
    out.entries.resize(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) {
            out.entries.block(i * d, k * d, d, d) = rho1.entries(i, k) * rho2.entries;
        }
    }
    return out;
}

// ------------------------------------------------------------- evolution ---

namespace {

int find_root(std::vector<int>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

} // namespace

Propagator::Propagator(const Eigen::SparseMatrix<double>& h, double tau) : dim_(static_cast<int>(h.rows())) {
    if (h.rows() != h.cols()) throw InvalidInput("hamiltonian", "must be square");

    std::vector<int> parent(dim_);
    std::iota(parent.begin(), parent.end(), 0);
    for (int k = 0; k < h.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(h, k); it; ++it) {
            if (it.value() == 0.0) continue;
            const int a = find_root(parent, static_cast<int>(it.row()));
            const int b = find_root(parent, static_cast<int>(it.col()));
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::vector<int> block_of(dim_, -1);
    for (int i = 0; i < dim_; ++i) {
        const int r = find_root(parent, i);
        if (block_of[r] < 0) {
            block_of[r] = static_cast<int>(blocks_.size());
            blocks_.push_back({});
        }
        blocks_[block_of[r]].idx.push_back(i);
    }

    const Eigen::MatrixXd dense(h);
    for (auto& b : blocks_) {
        const Eigen::MatrixXd hb = dense(b.idx, b.idx);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hb);
        if (es.info() != Eigen::Success) {
            throw Error("Propagator: eigendecomposition failed on a block of size " +
                        std::to_string(b.idx.size()));
        }
        const Eigen::MatrixXd& v = es.eigenvectors();
        const Eigen::ArrayXd phase = es.eigenvalues().array() * tau;
        const Eigen::MatrixXd re = v * phase.cos().matrix().asDiagonal() * v.transpose();
        const Eigen::MatrixXd im = v * (-phase.sin()).matrix().asDiagonal() * v.transpose();
        b.u = re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>();
        const Eigen::Index s = b.u.rows();
        const double err = (b.u * b.u.adjoint() - Eigen::MatrixXcd::Identity(s, s)).cwiseAbs().maxCoeff();
        unitarity_error_ = std::max(unitarity_error_, err);
    }
    if (unitarity_error_ > 1e-11) {
        throw Error("Propagator: exp(-iH tau) not unitary to 1e-11 (error " +
                    std::to_string(unitarity_error_) + ")");
    }
}

DensityMatrix Propagator::apply(const DensityMatrix& rho) const {
    if (rho.dim() != dim_) throw InvalidInput("rho", "dimension does not match the Hamiltonian");
    DensityMatrix out = rho;
    for (const auto& bi : blocks_) {
        for (const auto& bj : blocks_) {
            const Eigen::MatrixXcd sub = rho.entries(bi.idx, bj.idx);
            if (sub.cwiseAbs().maxCoeff() == 0.0) continue;
            out.entries(bi.idx, bj.idx) = bi.u * sub * bj.u.adjoint();
        }
    }
    return out;
}

DensityMatrix evolve(const DensityMatrix& rho12, const OperatorSet& ops, double tau) {
    if (!rho12.joint || rho12.nmax != ops.nmax) {
        throw InvalidInput("rho12", "expects a joint state on the operator set's basis");
    }
    if (tau == 0.0) return rho12;
    return Propagator(ops.htotal, tau).apply(rho12);
}

DensityMatrix partial_trace(const DensityMatrix& rho12, Oscillator keep) {
    if (!rho12.joint) throw InvalidInput("rho12", "partial_trace needs a joint state");
    if (keep != Oscillator::First && keep != Oscillator::Second) {
        throw InvalidInput("keep", "oscillator selector must be First or Second");
    }
    const int d = rho12.nmax + 1;
    DensityMatrix out;
    out.nmax = rho12.nmax;
    out.joint = false;
    out.tail_mass = rho12.tail_mass;
    out.entries = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) {
            cplx s{};
            for (int t = 0; t < d; ++t) {
                s += keep == Oscillator::First ? rho12.entries(rho12.index(i, t), rho12.index(k, t))
                                               : rho12.entries(rho12.index(t, i), rho12.index(t, k));
            }
            out.entries(i, k) = s;
        }
    }
    return out;
}

DensityMatrix refresh(const DensityMatrix& rho12, RefreshMode mode,
                      const std::optional<DensityMatrix>& rho2_initial) {
    const DensityMatrix r1 = partial_trace(rho12, Oscillator::First);
    if (mode == RefreshMode::Mutual) {
        return tensor(r1, partial_trace(rho12, Oscillator::Second));
    }
    if (!rho2_initial) {
        throw InvalidInput("rho2_initial", "reservoir refresh needs oscillator 2's initial state");
    }
    return tensor(r1, *rho2_initial);
}

// ------------------------------------------------------------------- fit ---

FitResult fit_theta(const Eigen::VectorXd& p, double omega, double floor, double threshold) {
    if (!(omega > 0.0)) throw InvalidInput("omega", "must be > 0");
    FitResult r;
    std::vector<double> est;
    for (Eigen::Index n = 0; n + 1 < p.size(); ++n) {
        if (p(n) > floor && p(n + 1) > floor) {
            est.push_back(-std::log(p(n + 1) / p(n)) / omega);
        }
    }
    r.ratios_used = static_cast<int>(est.size());
    if (est.empty()) {
        r.theta = std::numeric_limits<double>::infinity();
        r.warning = true;
        return r;
    }
    r.theta = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(est.size());
    for (double e : est) r.residual = std::max(r.residual, std::abs(e - r.theta));
    r.warning = r.residual > threshold || !(r.theta > 0.0);
    return r;
}

FitResult fit_theta(const DensityMatrix& rho, double omega, double floor, double threshold) {
    if (rho.joint) throw InvalidInput("rho", "fit_theta expects a single-oscillator state");
    FitResult r = fit_theta(Eigen::VectorXd(rho.populations()), omega, floor, threshold);
    Eigen::MatrixXd mag = rho.entries.cwiseAbs();
    mag.diagonal().setZero();
    r.off_diagonal = mag.maxCoeff();
    return r;
}

// ----------------------------------------------------------- oracle step ---

namespace {

void check_fitted_tails(const SystemParams& params, const TruncationPolicy& trunc,
                        const ThermalState& next) {
    const double tail1 = thermal_tail(params.omega1 * next.theta1, trunc.nmax);
    const double tail2 = thermal_tail(params.omega2 * next.theta2, trunc.nmax);
    if (!(tail1 < 10.0 * trunc.tail_bound && tail2 < 10.0 * trunc.tail_bound)) {
        int required = trunc.nmax;
        try {
            required = TruncationPolicy::required_nmax(params, next, trunc.tail_bound);
        } catch (const InvalidInput&) {
        }
        throw TruncationError(required, "evolved tail mass grew past 10 x tail_bound at nmax=" +
                                            std::to_string(trunc.nmax));
    }
}

ThermalState refreshed_state(const FitResult& f1, const FitResult& f2, const ThermalState& in,
                             RefreshMode mode, std::optional<double> reservoir_theta2) {
    if (mode == RefreshMode::Mutual) return {f1.theta, f2.theta};
    return {f1.theta, reservoir_theta2.value_or(in.theta2)};
}

} // namespace

OracleStep oracle_step_dense(const SystemParams& params, const ThermalState& state,
                             const TruncationPolicy& trunc, RefreshMode mode,
                             std::optional<double> reservoir_theta2) {
    const OperatorSet ops = build_operators(params, trunc, state);
    const DensityMatrix rho12 = tensor(thermal_density(state.theta1, params.omega1, trunc),
                                       thermal_density(state.theta2, params.omega2, trunc));
    const DensityMatrix evolved = evolve(rho12, ops, params.tau);

    OracleStep out;
    out.nmax = trunc.nmax;
    out.nbar_before = expectation(rho12, ops.number).real();
    out.nbar_after = expectation(evolved, ops.number).real();
    out.fit1 = fit_theta(partial_trace(evolved, Oscillator::First), params.omega1, trunc.fit_floor());
    out.fit2 = fit_theta(partial_trace(evolved, Oscillator::Second), params.omega2, trunc.fit_floor());
    out.state = refreshed_state(out.fit1, out.fit2, state, mode, reservoir_theta2);
    check_fitted_tails(params, trunc, out.state);
    return out;
}

SectorOracle::SectorOracle(const SystemParams& params, const TruncationPolicy& trunc)
    : params_(params), trunc_(trunc) {
    params.validate();
    if (trunc.nmax < 1) throw InvalidInput("nmax", "must be >= 1");
    const int nmax = trunc.nmax;
    const double coupling = params.omega_int * params.lambda;
    sectors_.reserve(static_cast<std::size_t>(2 * nmax + 1));

    for (int total = 0; total <= 2 * nmax; ++total) {
        const int lo = std::max(0, total - nmax);
        const int hi = std::min(nmax, total);
        const int s = hi - lo + 1;

        // H restricted to the sector is tridiagonal in n1.
        Eigen::VectorXd diag(s);
        Eigen::VectorXd sub(std::max(s - 1, 0));
        for (int k = 0; k < s; ++k) {
            const int n1 = lo + k;
            const int n2 = total - n1;
            diag(k) = params.omega1 * n1 + params.omega2 * n2;
            if (k + 1 < s) sub(k) = coupling * std::sqrt(static_cast<double>(n1 + 1) * n2);
        }

        Sector sec;
        sec.n1_lo = lo;
        sec.total = total;
        if (s == 1) {
            sec.transfer = Eigen::MatrixXd::Ones(1, 1);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
            es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            if (es.info() != Eigen::Success) {
                throw Error("SectorOracle: eigendecomposition failed in sector N=" +
                            std::to_string(total));
            }
            const Eigen::MatrixXd& v = es.eigenvectors();
            const Eigen::ArrayXd phase = es.eigenvalues().array() * params.tau;
            const Eigen::MatrixXd re = v * phase.cos().matrix().asDiagonal() * v.transpose();
            const Eigen::MatrixXd im = v * phase.sin().matrix().asDiagonal() * v.transpose();
            sec.transfer = re.cwiseAbs2() + im.cwiseAbs2();
        }
        // |U|^2 of a unitary is doubly stochastic.
        const double row_err = (sec.transfer.rowwise().sum().array() - 1.0).abs().maxCoeff();
        const double col_err = (sec.transfer.colwise().sum().array() - 1.0).abs().maxCoeff();
        unitarity_error_ = std::max({unitarity_error_, row_err, col_err});
        sectors_.push_back(std::move(sec));
    }
    if (unitarity_error_ > 1e-11) {
        throw Error("SectorOracle: sector propagators not unitary to 1e-11 (error " +
                    std::to_string(unitarity_error_) + ")");
    }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> SectorOracle::evolve_marginals(
    const Eigen::VectorXd& p1, const Eigen::VectorXd& p2) const {
    const int d = trunc_.dim1();
    if (p1.size() != d || p2.size() != d) {
        throw InvalidInput("populations", "length must be nmax + 1");
    }
    Eigen::VectorXd q1 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd q2 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd in, out;
    for (const auto& sec : sectors_) {
        const auto s = sec.transfer.rows();
        in.resize(s);
        for (Eigen::Index k = 0; k < s; ++k) {
            const int n1 = sec.n1_lo + static_cast<int>(k);
            in(k) = p1(n1) * p2(sec.total - n1);
        }
        out.noalias() = sec.transfer * in;
        for (Eigen::Index k = 0; k < s; ++k) {
            const int n1 = sec.n1_lo + static_cast<int>(k);
            q1(n1) += out(k);
            q2(sec.total - n1) += out(k);
        }
    }
    return {q1, q2};
}

OracleStep SectorOracle::step(const ThermalState& state, RefreshMode mode,
                              std::optional<double> reservoir_theta2) const {
    state.validate();
    trunc_.check(params_, state);
    const Eigen::VectorXd p1 = thermal_populations(state.theta1, params_.omega1, trunc_.nmax);
    const Eigen::VectorXd p2 = thermal_populations(state.theta2, params_.omega2, trunc_.nmax);
    const auto [q1, q2] = evolve_marginals(p1, p2);

    const Eigen::ArrayXd n = Eigen::ArrayXd::LinSpaced(trunc_.dim1(), 0.0, trunc_.nmax);
    OracleStep out;
    out.nmax = trunc_.nmax;
    out.nbar_before = (n * p1.array()).sum() + (n * p2.array()).sum();
    out.nbar_after = (n * q1.array()).sum() + (n * q2.array()).sum();
    out.fit1 = fit_theta(q1, params_.omega1, trunc_.fit_floor());
    out.fit2 = fit_theta(q2, params_.omega2, trunc_.fit_floor());
    out.state = refreshed_state(out.fit1, out.fit2, state, mode, reservoir_theta2);
    check_fitted_tails(params_, trunc_, out.state);
    return out;
}

OracleStep oracle_step(const SystemParams& params, const ThermalState& state,
                       const TruncationPolicy& trunc, RefreshMode mode,
                       std::optional<double> reservoir_theta2) {
    return SectorOracle(params, trunc).step(state, mode, reservoir_theta2);
}

OracleTrajectory oracle_iterate(const SystemParams& params, const ThermalState& initial,
                                const TruncationPolicy& trunc, std::size_t max_steps, double tol,
                                RefreshMode mode) {
    if (!(tol > 0.0)) throw InvalidInput("tol", "must be > 0");
    const SectorOracle oracle(params, trunc);
    OracleTrajectory out;
    out.trajectory.params = params;
    out.trajectory.records.push_back(make_record(params, initial, 0));

    ThermalState current = initial;
    ConvergenceMonitor monitor(tol);
    for (std::size_t n = 1; n <= max_steps; ++n) {
        OracleStep s = oracle.step(current, mode, initial.theta2);
        const bool settled = monitor.update(current, s.state);
        TrajectoryRecord rec = make_record(params, s.state, n);
        rec.settled = settled;
        out.trajectory.records.push_back(rec);
        current = s.state;
        out.steps.push_back(std::move(s));
        if (settled) {
            out.trajectory.converged = true;
            break;
        }
    }
    return out;
}

} // namespace repint::fock
