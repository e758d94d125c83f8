#pragma once

// Brute-force reference for the stroke: the driven oscillator in a truncated
// Fock basis, propagated directly in time, with two-point-measurement work
// statistics and matrix-logarithm entropies. Nothing here uses the scaling
// solution; it only needs omega^2(t) from the protocol.
//
// The computational basis is the Fock basis of an oscillator of frequency
// `basis_omega` (default: geometric mean of the stroke endpoints). In it
//
//   H(w^2) = (hbar/4) [ (wb + w^2/wb)(2n + 1) + (w^2/wb - wb)(a^2 + a^dag^2) ],
//
// which couples n only to n +- 2, so each parity sector is tridiagonal.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sta/errors.hpp"
#include "sta/numerics/ode.hpp"
#include "sta/params.hpp"
#include "sta/protocol.hpp"

namespace sta::fock {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

struct FockConfig {
    std::size_t dim = 200;
    std::size_t max_dim = 1600;  // escalation ceiling (x2 per attempt)
    double tail_tol = 1e-8;      // admissible mass in the top 10% of levels
    double dt_init = 0.0;        // 0: automatic
    double basis_omega = 0.0;    // 0: sqrt(omega_start * omega_end)
    double convergence_tol = 1e-9;
    double eigen_rel_tol = 1e-6;  // instantaneous levels must match hbar w (k + 1/2)

    void validate() const {
        if (dim < 16) throw InvalidParameter("FockConfig: dim must be >= 16");
        if (max_dim < dim) throw InvalidParameter("FockConfig: max_dim must be >= dim");
        if (!(tail_tol > 0.0 && tail_tol <= 1e-6)) {
            throw InvalidParameter("FockConfig: tail_tol must lie in (0, 1e-6]");
        }
    }

    /// Fixed dimension, no escalation.
    static FockConfig fixed(std::size_t n) {
        FockConfig c;
        c.dim = n;
        c.max_dim = n;
        return c;
    }
};

/// p[n][k] = |<k(t)|U(t,0)|n(0)>|^2 for the propagated rows n (populated
/// initial levels) and the resolved instantaneous levels k.
struct TransitionMatrix {
    double t = 0.0;
    MatrixXd p;

    double max_row_defect() const {
        return (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
    }
    double max_parity_violation() const {
        double worst = 0.0;
        for (Eigen::Index n = 0; n < p.rows(); ++n) {
            for (Eigen::Index k = 0; k < p.cols(); ++k) {
                if ((n + k) % 2 == 1) worst = std::max(worst, p(n, k));
            }
        }
        return worst;
    }
};

struct WorkAtom {
    double work;
    double probability;
};

struct WorkDistribution {
    std::vector<WorkAtom> atoms;  // sorted by work

    double total_probability() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.probability;
        return s;
    }
};

/// <W^m> = sum over atoms of W^m P(W).
inline double moment(const WorkDistribution& dist, unsigned m) {
    double s = 0.0;
    for (const auto& a : dist.atoms) s += std::pow(a.work, static_cast<double>(m)) * a.probability;
    return s;
}

inline double default_basis_omega(const StrokeSpec& spec) {
    return std::sqrt(spec.omega_start() * spec.omega_end());
}

class FockBasis {
  public:
    FockBasis(std::size_t dim, double omega, const OscillatorParams& params)
        : dim_(dim), omega_(omega), hbar_(params.hbar), level_(dim), pair_(dim >= 2 ? dim - 2 : 0) {
        if (dim < 2) throw InvalidParameter("FockBasis: dim must be >= 2");
        if (!(omega > 0.0)) throw InvalidParameter("FockBasis: omega must be > 0");
        for (std::size_t n = 0; n < dim; ++n) level_[n] = 2.0 * static_cast<double>(n) + 1.0;
        for (std::size_t n = 0; n + 2 < dim; ++n) {
            pair_[n] = std::sqrt(static_cast<double>(n + 1) * static_cast<double>(n + 2));
        }
    }

    std::size_t dim() const { return dim_; }
    double omega() const { return omega_; }
    double hbar() const { return hbar_; }

    double diag_coeff(double omega_sq) const { return 0.25 * hbar_ * (omega_ + omega_sq / omega_); }
    double pair_coeff(double omega_sq) const { return 0.25 * hbar_ * (omega_sq / omega_ - omega_); }

    MatrixXd hamiltonian(double omega_sq) const {
        const auto n = static_cast<Eigen::Index>(dim_);
        MatrixXd h = MatrixXd::Zero(n, n);
        const double cd = diag_coeff(omega_sq);
        const double co = pair_coeff(omega_sq);
        for (Eigen::Index i = 0; i < n; ++i) h(i, i) = cd * level_[i];
        for (Eigen::Index i = 0; i + 2 < n; ++i) {
            h(i, i + 2) = co * pair_[i];
            h(i + 2, i) = co * pair_[i];
        }
        return h;
    }

    /// H(omega_sq) * psi without forming H.
    template <class Derived>
    MatrixXcd apply(double omega_sq, const Eigen::MatrixBase<Derived>& psi) const {
        const auto n = static_cast<Eigen::Index>(dim_);
        const double cd = diag_coeff(omega_sq);
        const double co = pair_coeff(omega_sq);
        MatrixXcd out = (cd * level_).asDiagonal() * psi;
        if (n > 2) {
            const VectorXd off = co * pair_;
            out.topRows(n - 2).noalias() += off.asDiagonal() * psi.bottomRows(n - 2);
            out.bottomRows(n - 2).noalias() += off.asDiagonal() * psi.topRows(n - 2);
        }
        return out;
    }

  private:
    std::size_t dim_;
    double omega_;
    double hbar_;
    VectorXd level_;  // 2n + 1
    VectorXd pair_;   // sqrt((n + 1)(n + 2))
};

/// Truncated H(t) = p^2/2m + m omega^2 x^2 / 2 in the Fock basis of frequency
/// `config.basis_omega` (params.omega0 when unset).
inline MatrixXd build_hamiltonian(double omega_sq, const FockConfig& config,
                                  const OscillatorParams& params) {
    config.validate();
    const double wb = config.basis_omega > 0.0 ? config.basis_omega : params.omega0;
    return FockBasis(config.dim, wb, params).hamiltonian(omega_sq);
}

/// Eigenpairs of a truncated H, ascending in energy. `vectors` is dim x levels.
struct Spectrum {
    VectorXd energies;
    MatrixXd vectors;
};

inline Spectrum diagonalize(const FockBasis& basis, double omega_sq, bool with_vectors = true) {
    const auto n = static_cast<Eigen::Index>(basis.dim());
    const double cd = basis.diag_coeff(omega_sq);
    const double co = basis.pair_coeff(omega_sq);
    std::vector<double> energies;
    std::vector<std::pair<int, Eigen::Index>> origin;  // (parity, index in block)
    MatrixXd block_vectors[2];
    VectorXd block_values[2];
    for (int parity = 0; parity < 2; ++parity) {
        const Eigen::Index size = (n - parity + 1) / 2;
        if (size == 0) continue;
        VectorXd d(size);
        VectorXd e(std::max<Eigen::Index>(size - 1, 0));
        for (Eigen::Index j = 0; j < size; ++j) {
            const Eigen::Index m = 2 * j + parity;
            d[j] = cd * (2.0 * static_cast<double>(m) + 1.0);
            if (j + 1 < size) {
                e[j] = co * std::sqrt(static_cast<double>(m + 1) * static_cast<double>(m + 2));
            }
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es;
        es.computeFromTridiagonal(d, e, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) {
            throw NumericalConsistencyError("diagonalize: tridiagonal eigensolver failed");
        }
        block_values[parity] = es.eigenvalues();
        if (with_vectors) block_vectors[parity] = es.eigenvectors();
        for (Eigen::Index j = 0; j < size; ++j) {
            energies.push_back(block_values[parity][j]);
            origin.emplace_back(parity, j);
        }
    }
    std::vector<std::size_t> order(energies.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
    Spectrum out;
    out.energies.resize(n);
    if (with_vectors) out.vectors = MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto [parity, j] = origin[order[static_cast<std::size_t>(k)]];
        out.energies[k] = energies[order[static_cast<std::size_t>(k)]];
        if (with_vectors) {
            const MatrixXd& bv = block_vectors[parity];
            for (Eigen::Index r = 0; r < bv.rows(); ++r) out.vectors(2 * r + parity, k) = bv(r, j);
        }
    }
    return out;
}

/// Number of leading levels whose energies match hbar omega (k + 1/2) to `rel_tol`.
inline std::size_t valid_levels(const VectorXd& energies, double omega, double hbar,
                                double rel_tol) {
    std::size_t k = 0;
    for (; k < static_cast<std::size_t>(energies.size()); ++k) {
        const double exact = hbar * omega * (static_cast<double>(k) + 0.5);
        if (std::abs(energies[static_cast<Eigen::Index>(k)] - exact) > rel_tol * exact) break;
    }
    return k;
}

/// log sum_k exp(-beta e_k) over the first `count` energies.
inline double log_sum_boltzmann(const VectorXd& energies, std::size_t count, double beta) {
    const double e0 = energies[0];
    double s = 0.0;
    for (std::size_t k = 0; k < count; ++k) s += std::exp(-beta * (energies[static_cast<Eigen::Index>(k)] - e0));
    return -beta * e0 + std::log(s);
}

/// Relative Boltzmann weight of all levels from `count` upwards, bounded with
/// the harmonic level spacing.
inline double boltzmann_tail(std::size_t count, double beta, double hbar, double omega) {
    const double x = beta * hbar * omega;
    return std::exp(-x * static_cast<double>(count));
}

/// Truncated Gibbs populations at (beta, omega^2) in `basis`: energies and
/// eigenvectors of the resolved levels with non-negligible weight.
struct GibbsMatrix {
    VectorXd energies;
    MatrixXd vectors;
    VectorXd log_populations;
    double log_z = 0.0;
};

/// ln Z of the truncated Gibbs state at (beta, omega^2) with the basis
/// frequency of `basis`; the dimension is doubled (eigenvalues only, cheap)
/// until the resolved levels carry all but `tail_tol` of the weight.
inline double reference_log_partition(double basis_omega, double omega_sq, double beta,
                                      const OscillatorParams& params, double tail_tol,
                                      std::size_t start_dim, double eigen_rel_tol,
                                      std::size_t max_dim = 16384) {
    if (!(omega_sq > 0.0)) throw InvertedTrapError("reference_log_partition: omega^2 <= 0");
    const double w = std::sqrt(omega_sq);
    for (std::size_t n = start_dim; n <= max_dim; n *= 2) {
        const FockBasis basis(n, basis_omega, params);
        const Spectrum sp = diagonalize(basis, omega_sq, false);
        const std::size_t m = valid_levels(sp.energies, w, params.hbar, eigen_rel_tol);
        if (m > 0 && boltzmann_tail(m, beta, params.hbar, w) < tail_tol) {
            return log_sum_boltzmann(sp.energies, m, beta);
        }
    }
    throw TruncationError("reference_log_partition: reference Gibbs tail mass exceeds tail_tol "
                          "up to dim " + std::to_string(max_dim));
}

inline GibbsMatrix gibbs_matrix(const FockBasis& basis, double omega_sq, double beta,
                                double tail_tol, double eigen_rel_tol) {
    if (!(omega_sq > 0.0)) throw InvertedTrapError("gibbs_matrix: omega^2 <= 0");
    const double w = std::sqrt(omega_sq);
    const Spectrum sp = diagonalize(basis, omega_sq, true);
    const std::size_t m = valid_levels(sp.energies, w, basis.hbar(), eigen_rel_tol);
    if (m == 0 || boltzmann_tail(m, beta, basis.hbar(), w) >= tail_tol) {
        throw TruncationError("gibbs_matrix: Gibbs tail mass beyond " + std::to_string(m) +
                              " resolved levels exceeds tail_tol at dim " +
                              std::to_string(basis.dim()));
    }
    GibbsMatrix g;
    g.log_z = log_sum_boltzmann(sp.energies, m, beta);
    g.energies = sp.energies.head(static_cast<Eigen::Index>(m));
    g.vectors = sp.vectors.leftCols(static_cast<Eigen::Index>(m));
    g.log_populations = (-beta * g.energies).array() - g.log_z;
    return g;
}

namespace detail {

// One parity sector of H: tridiagonal in the sector index j (level 2j + parity).
struct ParityBlock {
    int parity;
    VectorXd level;  // 2m + 1
    VectorXd pair;   // sqrt((m + 1)(m + 2))

    ParityBlock(std::size_t dim, int parity_) : parity(parity_) {
        const auto size = static_cast<Eigen::Index>((dim - static_cast<std::size_t>(parity) + 1) / 2);
        level.resize(size);
        pair.resize(std::max<Eigen::Index>(size - 1, 0));
        for (Eigen::Index j = 0; j < size; ++j) {
            const double m = static_cast<double>(2 * j + parity);
            level[j] = 2.0 * m + 1.0;
            if (j + 1 < size) pair[j] = std::sqrt((m + 1.0) * (m + 2.0));
        }
    }

    MatrixXcd apply(double cd, double co, const MatrixXcd& psi) const {
        const auto n = level.size();
        MatrixXcd out = (cd * level).asDiagonal() * psi;
        if (n > 1) {
            const VectorXd off = co * pair;
            out.topRows(n - 1).noalias() += off.asDiagonal() * psi.bottomRows(n - 1);
            out.bottomRows(n - 1).noalias() += off.asDiagonal() * psi.topRows(n - 1);
        }
        return out;
    }
};

}  // namespace detail

/// Schroedinger evolution of the columns of `psi0` under H(t) = H(omega_sq_fn(t)),
/// returning the states at each of `times` (sorted, within [0, t_end]).
/// The two parity sectors are evolved separately with adaptive Dormand-Prince;
/// the tolerance is tightened 10x until two successive solutions differ by
/// less than `config.convergence_tol`.
template <class OmegaSq>
std::vector<MatrixXcd> evolve_columns(const FockBasis& basis, const OmegaSq& omega_sq_fn,
                                      const MatrixXcd& psi0, std::span<const double> times,
                                      const FockConfig& config) {
    const cplx minus_i_over_hbar(0.0, -1.0 / basis.hbar());
    const auto dim = static_cast<Eigen::Index>(basis.dim());

    std::size_t first = 0;
    while (first < times.size() && times[first] <= 0.0) ++first;
    std::vector<double> stops(times.begin() + static_cast<std::ptrdiff_t>(first), times.end());

    // sector data: rows 2j + parity of the columns that have support there
    struct Sector {
        detail::ParityBlock block;
        std::vector<Eigen::Index> cols;
        MatrixXcd psi0;
    };
    std::vector<Sector> sectors;
    for (int parity = 0; parity < 2; ++parity) {
        Sector sec{detail::ParityBlock(basis.dim(), parity), {}, {}};
        const auto size = sec.block.level.size();
        if (size == 0) continue;
        for (Eigen::Index c = 0; c < psi0.cols(); ++c) {
            bool any = false;
            for (Eigen::Index j = 0; j < size && !any; ++j) any = psi0(2 * j + parity, c) != 0.0;
            if (any) sec.cols.push_back(c);
        }
        if (sec.cols.empty()) continue;
        sec.psi0.resize(size, static_cast<Eigen::Index>(sec.cols.size()));
        for (std::size_t c = 0; c < sec.cols.size(); ++c) {
            for (Eigen::Index j = 0; j < size; ++j) {
                sec.psi0(j, static_cast<Eigen::Index>(c)) = psi0(2 * j + parity, sec.cols[c]);
            }
        }
        sectors.push_back(std::move(sec));
    }

    auto run = [&](double tol) {
        std::vector<MatrixXcd> out(times.size(), MatrixXcd::Zero(dim, psi0.cols()));
        for (std::size_t i = 0; i < first; ++i) out[i] = psi0;
        if (stops.empty()) return out;
        numerics::StepControl ctrl;
        ctrl.rel_tol = tol;
        ctrl.abs_tol = tol;
        ctrl.initial_step = config.dt_init;
        for (std::size_t p = 0; p < sectors.size(); ++p) {
            const Sector& sec = sectors[p];
            const int parity = sec.block.parity;
            auto rhs = [&](double t, const MatrixXcd& psi) -> MatrixXcd {
                const double w2 = omega_sq_fn(t);
                return minus_i_over_hbar *
                       sec.block.apply(basis.diag_coeff(w2), basis.pair_coeff(w2), psi);
            };
            std::size_t next = first;
            auto on_step = [&](double t, const MatrixXcd& psi) {
                while (next < times.size() && times[next] == t) {
                    for (std::size_t c = 0; c < sec.cols.size(); ++c) {
                        for (Eigen::Index j = 0; j < psi.rows(); ++j) {
                            out[next](2 * j + parity, sec.cols[c]) = psi(j, static_cast<Eigen::Index>(c));
                        }
                    }
                    ++next;
                }
            };
            numerics::dopri5<MatrixXcd>(rhs, 0.0, sec.psi0, times.back(), ctrl, stops, on_step);
            if (next != times.size()) throw PropagationError("evolve_columns: missed output times");
        }
        return out;
    };

    double tol = 1e-11;
    std::vector<MatrixXcd> previous = run(tol);
    for (int refinement = 0; refinement < 4; ++refinement) {
        tol /= 10.0;
        std::vector<MatrixXcd> current = run(tol);
        double diff = 0.0;
        for (std::size_t i = 0; i < current.size(); ++i) {
            diff = std::max(diff, (current[i] - previous[i]).cwiseAbs().maxCoeff());
        }
        if (diff < config.convergence_tol) return current;
        previous = std::move(current);
    }
    throw PropagationError("evolve_columns: no convergence to " +
                           std::to_string(config.convergence_tol) + " after 4 refinements");
}

/// ||psi^dag psi - I||_max for a block of propagated columns.
inline double unitarity_defect(const MatrixXcd& psi) {
    const auto k = psi.cols();
    return (psi.adjoint() * psi - MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff();
}

/// Full truncated evolution operator U(t, 0) in the computational basis.
inline MatrixXcd propagate(const StrokeSpec& spec, double t, const FockConfig& config,
                           const OscillatorParams& params = {}) {
    config.validate();
    t = protocol::detail::checked_time(spec, t);
    const double wb = config.basis_omega > 0.0 ? config.basis_omega : default_basis_omega(spec);
    const FockBasis basis(config.dim, wb, params);
    const auto n = static_cast<Eigen::Index>(config.dim);
    const MatrixXcd id = MatrixXcd::Identity(n, n);
    if (t == 0.0) return id;
    auto w2 = [&](double s) { return protocol::frequency_squared(spec, s); };
    const double times[] = {t};
    MatrixXcd u = evolve_columns(basis, w2, id, times, config).front();
    const double defect = unitarity_defect(u);
    if (defect > 1e-8) {
        throw PropagationError("propagate: unitarity defect " + std::to_string(defect));
    }
    return u;
}

/// Relative entropies S(rho_t||rho_t^eq), S(rho_t^ad||rho_t^eq), S(rho_t||rho_t^ad).
struct EntropyTriple {
    double rel_ent_t = 0.0;
    double rel_ent_ad = 0.0;
    double rel_ent_alt = 0.0;
};

/// Everything the oracle knows about one evaluation time.
struct TimeSlice {
    double t = 0.0;
    double omega_sq = 0.0;
    VectorXd energies;  // resolved instantaneous levels eps_k(t)
    MatrixXd eigvecs;   // dim x resolved levels
    MatrixXcd states;   // U(t,0)|n(0)> for the propagated rows
    TransitionMatrix transitions;  // every propagated row
    double log_z_eq = 0.0;  // ln Z of the (beta, omega(t)) Gibbs reference
    double beta_t = 0.0;    // adiabatic reference temperature beta omega_start / omega(t)
    double log_z_ad = 0.0;
};

/// Fock-basis evolution of one stroke started from the Gibbs state at
/// (params.beta, omega_start), evaluated at a fixed set of times. The
/// dimension is escalated (x2 up to config.max_dim) whenever a truncation
/// check fails anywhere along the way.
class StrokeOracle {
  public:
    StrokeOracle(const OscillatorParams& params, const StrokeSpec& spec, std::vector<double> times,
                 FockConfig config = {})
        : params_(params), spec_(spec), times_(std::move(times)), config_(config) {
        params_.validate();
        config_.validate();
        for (double& t : times_) t = protocol::detail::checked_time(spec_, t);
        if (!std::is_sorted(times_.begin(), times_.end())) {
            throw InvalidParameter("StrokeOracle: times must be sorted");
        }
        std::string last_failure;
        for (std::size_t n = config_.dim; n <= config_.max_dim; n *= 2) {
            try {
                build(n);
                return;
            } catch (const TruncationError& e) {
                last_failure = e.what();
            }
        }
        throw TruncationError("StrokeOracle: escalation exhausted at dim " +
                              std::to_string(config_.max_dim) + ": " + last_failure);
    }

    std::size_t dim() const { return dim_; }
    double basis_omega() const { return basis_omega_; }
    const StrokeSpec& spec() const { return spec_; }
    const OscillatorParams& params() const { return params_; }
    std::size_t size() const { return slices_.size(); }
    const TimeSlice& slice(std::size_t i) const { return slices_.at(i); }

    /// p_n^0 for the propagated rows (renormalised over the resolved levels).
    const VectorXd& initial_populations() const { return populations_; }
    const VectorXd& initial_energies() const { return energies0_; }

    /// Transition probabilities for the populated initial levels (p_n^0 > tail_tol).
    TransitionMatrix transitions(std::size_t i) const {
        require_trap(i);
        const TimeSlice& s = slices_.at(i);
        return {s.t, s.transitions.p.topRows(populated_rows_)};
    }

    WorkDistribution work_distribution(std::size_t i) const {
        const TimeSlice& s = slices_.at(i);
        require_trap(i);
        std::vector<WorkAtom> raw;
        const auto& p = s.transitions.p;
        raw.reserve(static_cast<std::size_t>(p.size()));
        for (Eigen::Index n = 0; n < p.rows(); ++n) {
            for (Eigen::Index k = 0; k < p.cols(); ++k) {
                const double w = populations_[n] * p(n, k);
                if (w == 0.0) continue;
                raw.push_back({s.energies[k] - energies0_[n], w});
            }
        }
        std::sort(raw.begin(), raw.end(),
                  [](const WorkAtom& a, const WorkAtom& b) { return a.work < b.work; });
        WorkDistribution dist;
        const double merge_tol = 1e-9 * params_.hbar * spec_.omega_start();
        for (const auto& a : raw) {
            if (!dist.atoms.empty() && a.work - dist.atoms.back().work <= merge_tol) {
                auto& last = dist.atoms.back();
                const double total = last.probability + a.probability;
                last.work = (last.work * last.probability + a.work * a.probability) / total;
                last.probability = total;
            } else {
                dist.atoms.push_back(a);
            }
        }
        return dist;
    }

    /// Tr[rho_t H(t)].
    double mean_energy(std::size_t i) const {
        const TimeSlice& s = slices_.at(i);
        const MatrixXcd hpsi = basis().apply(s.omega_sq, s.states);
        double e = 0.0;
        for (Eigen::Index n = 0; n < s.states.cols(); ++n) {
            e += populations_[n] * s.states.col(n).dot(hpsi.col(n)).real();
        }
        return e;
    }

    /// Tr[rho_t H(t)^2] - Tr[rho_t H(t)]^2.
    double energy_variance(std::size_t i) const {
        const TimeSlice& s = slices_.at(i);
        const MatrixXcd hpsi = basis().apply(s.omega_sq, s.states);
        double e = 0.0, e2 = 0.0;
        for (Eigen::Index n = 0; n < s.states.cols(); ++n) {
            e += populations_[n] * s.states.col(n).dot(hpsi.col(n)).real();
            e2 += populations_[n] * hpsi.col(n).squaredNorm();
        }
        return e2 - e * e;
    }

    /// -Tr[rho_t ln rho_t] from the eigenvalues of rho_t.
    double von_neumann_entropy(std::size_t i) const {
        const VectorXd lambda = density_eigenvalues(slices_.at(i).states);
        double s = 0.0;
        for (double l : lambda) {
            if (l > 1e-300) s -= l * std::log(l);
        }
        return s;
    }

    /// Both references are Gibbs states of the truncated H(t), so
    /// Tr[rho ln rho_ref] = -beta_ref Tr[rho H(t)] - ln Z_ref needs no
    /// projection onto the instantaneous levels.
    EntropyTriple entropies(std::size_t i) const {
        const TimeSlice& s = slices_.at(i);
        require_trap(i);
        const double beta = params_.beta;
        const double s_t = von_neumann_entropy(i);
        const double e_t = mean_energy(i);

        EntropyTriple out;
        out.rel_ent_t = beta * e_t + s.log_z_eq - s_t;
        out.rel_ent_alt = s.beta_t * e_t + s.log_z_ad - s_t;
        double s_ad_eq = 0.0;
        for (Eigen::Index k = 0; k < s.energies.size(); ++k) {
            const double log_ad = -s.beta_t * s.energies[k] - s.log_z_ad;
            const double log_eq = -beta * s.energies[k] - s.log_z_eq;
            s_ad_eq += std::exp(log_ad) * (log_ad - log_eq);
        }
        out.rel_ent_ad = s_ad_eq;
        return out;
    }

    double unitarity_defect(std::size_t i) const { return fock::unitarity_defect(slices_.at(i).states); }

  private:
    FockBasis basis() const { return FockBasis(dim_, basis_omega_, params_); }

    void require_trap(std::size_t i) const {
        if (!(slices_.at(i).omega_sq > 0.0)) {
            throw InvertedTrapError("StrokeOracle: omega^2 <= 0 at t = " +
                                    std::to_string(slices_.at(i).t) +
                                    "; instantaneous eigenbasis undefined");
        }
    }

    VectorXd density_eigenvalues(const MatrixXcd& states) const {
        // nonzero spectrum of Psi P Psi^dag equals that of P^1/2 Psi^dag Psi P^1/2
        const VectorXd sq = populations_.cwiseSqrt();
        const MatrixXcd gram = sq.asDiagonal() * (states.adjoint() * states) * sq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    /// Occupation mass of rho_t in the top 10% of basis levels.
    double top_tail(const MatrixXcd& states) const {
        const auto n = states.rows();
        const auto len = std::max<Eigen::Index>(1, n / 10);
        double mass = 0.0;
        for (Eigen::Index c = 0; c < states.cols(); ++c) {
            mass += populations_[c] * states.col(c).tail(len).squaredNorm();
        }
        return mass;
    }

    void check_tail(const MatrixXcd& states, std::size_t n, double t) const {
        const double tail = top_tail(states);
        if (tail > config_.tail_tol) {
            throw TruncationError("state tail mass " + std::to_string(tail) +
                                  " exceeds tail_tol at dim " + std::to_string(n) +
                                  ", t = " + std::to_string(t));
        }
    }

    void build(std::size_t n) {
        dim_ = n;
        basis_omega_ = config_.basis_omega > 0.0 ? config_.basis_omega : default_basis_omega(spec_);
        const FockBasis fb = basis();
        const double beta = params_.beta;
        const double w0 = spec_.omega_start();
        const double hbar = params_.hbar;

        // initial Gibbs state
        const Spectrum sp0 = diagonalize(fb, w0 * w0, true);
        const std::size_t m0 = valid_levels(sp0.energies, w0, hbar, config_.eigen_rel_tol);
        if (m0 == 0 || boltzmann_tail(m0, beta, hbar, w0) >= config_.tail_tol) {
            throw TruncationError("initial Gibbs tail mass exceeds tail_tol at dim " +
                                  std::to_string(n) + " (" + std::to_string(m0) +
                                  " resolved levels)");
        }
        const double log_z0 = log_sum_boltzmann(sp0.energies, m0, beta);
        energies0_ = sp0.energies.head(static_cast<Eigen::Index>(m0));
        log_pop0_ = (-beta * energies0_).array() - log_z0;
        const double row_floor = 1e-5 * config_.tail_tol;
        Eigen::Index rows = 0;
        while (rows < log_pop0_.size() && std::exp(log_pop0_[rows]) > row_floor) ++rows;
        populations_ = log_pop0_.head(rows).array().exp();
        populated_rows_ = 0;
        while (populated_rows_ < rows && populations_[populated_rows_] > config_.tail_tol) ++populated_rows_;
        const MatrixXcd psi0 = sp0.vectors.leftCols(rows).cast<cplx>();
        check_tail(psi0, n, 0.0);

        auto w2 = [&](double s) { return protocol::frequency_squared(spec_, s); };
        std::vector<MatrixXcd> states = evolve_columns(fb, w2, psi0, times_, config_);

        slices_.clear();
        slices_.reserve(times_.size());
        for (std::size_t i = 0; i < times_.size(); ++i) {
            TimeSlice s;
            s.t = times_[i];
            s.omega_sq = protocol::frequency_squared(spec_, s.t);
            s.states = std::move(states[i]);
            check_tail(s.states, n, s.t);
            const double defect = fock::unitarity_defect(s.states);
            if (defect > 1e-8) {
                throw PropagationError("unitarity defect " + std::to_string(defect) + " at t = " +
                                       std::to_string(s.t));
            }
            if (s.omega_sq > 0.0) fill_instantaneous(fb, s);
            slices_.push_back(std::move(s));
        }
    }

    void fill_instantaneous(const FockBasis& fb, TimeSlice& s) const {
        const double w = std::sqrt(s.omega_sq);
        const Spectrum sp = diagonalize(fb, s.omega_sq, true);
        const std::size_t m = valid_levels(sp.energies, w, params_.hbar, config_.eigen_rel_tol);
        if (m < static_cast<std::size_t>(populations_.size())) {
            throw TruncationError("only " + std::to_string(m) +
                                  " instantaneous levels resolved at dim " +
                                  std::to_string(fb.dim()) + ", t = " + std::to_string(s.t));
        }
        s.energies = sp.energies.head(static_cast<Eigen::Index>(m));
        s.eigvecs = sp.vectors.leftCols(static_cast<Eigen::Index>(m));
        const MatrixXcd amp = s.eigvecs.transpose().cast<cplx>() * s.states;  // m x rows
        s.transitions.t = s.t;
        s.transitions.p = amp.cwiseAbs2().transpose();  // rows x m
        // probability of landing outside the resolved levels
        const VectorXd defects = (s.transitions.p.rowwise().sum().array() - 1.0).abs();
        const double worst_row = defects.head(populated_rows_).maxCoeff();
        if (worst_row > 1e-8) {
            throw TruncationError("populated transition row off by " + std::to_string(worst_row) +
                                  " at dim " + std::to_string(fb.dim()) + ", t = " +
                                  std::to_string(s.t));
        }
        const double lost = populations_.dot(defects);
        if (lost > config_.tail_tol) {
            throw TruncationError("transition mass " + std::to_string(lost) +
                                  " outside the resolved levels at dim " +
                                  std::to_string(fb.dim()) + ", t = " + std::to_string(s.t));
        }
        s.log_z_eq = reference_log_partition(basis_omega_, s.omega_sq, params_.beta, params_,
                                             config_.tail_tol, fb.dim(), config_.eigen_rel_tol);
        s.beta_t = params_.beta * spec_.omega_start() / w;
        s.log_z_ad = reference_log_partition(basis_omega_, s.omega_sq, s.beta_t, params_,
                                             config_.tail_tol, fb.dim(), config_.eigen_rel_tol);
    }

    OscillatorParams params_;
    StrokeSpec spec_;
    std::vector<double> times_;
    FockConfig config_;
    std::size_t dim_ = 0;
    double basis_omega_ = 0.0;
    VectorXd energies0_;
    VectorXd log_pop0_;
    VectorXd populations_;
    Eigen::Index populated_rows_ = 0;
    std::vector<TimeSlice> slices_;
};

inline TransitionMatrix transition_probs(const OscillatorParams& params, const StrokeSpec& spec,
                                         double t, const FockConfig& config = {}) {
    return StrokeOracle(params, spec, {t}, config).transitions(0);
}

inline WorkDistribution work_distribution(const OscillatorParams& params, const StrokeSpec& spec,
                                          double t, const FockConfig& config = {}) {
    return StrokeOracle(params, spec, {t}, config).work_distribution(0);
}

inline EntropyTriple density_matrix_entropies(const StrokeSpec& spec, double t,
                                              const FockConfig& config,
                                              const OscillatorParams& params) {
    return StrokeOracle(params, spec, {t}, config).entropies(0);
}

/// Uhlmann fidelity (tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)))^2 of two truncated
/// Gibbs states, built in a common Fock basis at the geometric-mean frequency.
inline double uhlmann_fidelity_gibbs(double beta_a, double omega_a, double beta_b, double omega_b,
                                     const FockConfig& config, const OscillatorParams& params) {
    config.validate();
    const double wb = config.basis_omega > 0.0 ? config.basis_omega : std::sqrt(omega_a * omega_b);
    std::string last_failure;
    for (std::size_t n = config.dim; n <= config.max_dim; n *= 2) {
        try {
            const FockBasis basis(n, wb, params);
            const GibbsMatrix a =
                gibbs_matrix(basis, omega_a * omega_a, beta_a, config.tail_tol, config.eigen_rel_tol);
            const GibbsMatrix b =
                gibbs_matrix(basis, omega_b * omega_b, beta_b, config.tail_tol, config.eigen_rel_tol);
            const VectorXd sqrt_pa = (0.5 * a.log_populations).array().exp();
            const VectorXd pb = b.log_populations.array().exp();
            const MatrixXd overlap = a.vectors.transpose() * b.vectors;
            const MatrixXd m = sqrt_pa.asDiagonal() * overlap * pb.asDiagonal() *
                               overlap.transpose() * sqrt_pa.asDiagonal();
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
            double root = 0.0;
            for (double l : es.eigenvalues()) root += std::sqrt(std::max(l, 0.0));
            return root * root;
        } catch (const TruncationError& e) {
            last_failure = e.what();
        }
    }
    throw TruncationError("uhlmann_fidelity_gibbs: escalation exhausted: " + last_failure);
}

}  // namespace sta::fock
