#pragma once

// Spin boson Hamiltonian with finitely many modes and an occupation cutoff,
//
//   H = diag(2, 0) ⊗ 1 + 1 ⊗ Σ ω_j n_j + λ σ_x ⊗ Σ v_j (a_j + a_j†)/2,
//
// diagonalized densely. With this field normalization the vacuum expectation
// ⟨Ω↓, e^{-TH} Ω↓⟩ equals the continuum Ising partition function with
// g(t) = Σ v_j² e^{-ω_j |t|} and α = λ²/8.
//
// A finite truncation always has a ground state (ρ > 0). The absence of ground
// states for infrared-divergent couplings is an infinite-mode effect and only
// shows up through the Ising and percolation estimators.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"

namespace sbising {

struct FockMode {
  double omega = 1.0;  ///< ω_j > 0
  double v = 1.0;      ///< real coupling v_j ≥ 0
};

inline constexpr double kFieldScale = 0.5;
inline constexpr std::size_t kDefaultDimensionLimit = 20000;

struct TruncatedModel {
  std::vector<FockMode> modes;
  int n_max = 8;  ///< per-mode occupation cutoff
  double lambda = 0.0;
  std::size_t dimension_limit = kDefaultDimensionLimit;

  std::size_t boson_dimension() const {
    std::size_t m = 1;
    for (std::size_t j = 0; j < modes.size(); ++j) {
      m *= static_cast<std::size_t>(n_max + 1);
      if (2 * m > dimension_limit) return dimension_limit + 1;
    }
    return m;
  }
  std::size_t dimension() const { return 2 * boson_dimension(); }

  void validate() const {
    if (modes.empty()) throw ValidationError("fock: at least one mode is required");
    if (n_max < 1) throw ValidationError("fock: n_max must be at least 1");
    for (const auto& m : modes) {
      if (!(m.omega > 0.0)) throw ValidationError("fock: mode frequencies must be positive");
      if (!(m.v >= 0.0)) throw ValidationError("fock: mode couplings must be nonnegative");
    }
    if (dimension() > dimension_limit)
      throw ValidationError("fock: dimension 2·(n_max+1)^modes exceeds the limit " + std::to_string(dimension_limit));
  }

  /// The matching Ising kernel g(t) = Σ v_j² e^{-ω_j |t|}.
  Kernel kernel() const {
    std::vector<Mode> m;
    for (const auto& f : modes) m.push_back({f.v * f.v, f.omega});
    return Kernel::modes(std::move(m));
  }
};

/// Index of the vacuum with spin down: spin-major basis, spin ↑ first.
inline std::size_t vacuum_down_index(const TruncatedModel& model) { return model.boson_dimension(); }

/// Dense H in the basis |s⟩ ⊗ |n_1 … n_M⟩ (spin-major, occupations
/// lexicographic with the first mode most significant).
inline Eigen::MatrixXd build_hamiltonian(const TruncatedModel& model) {
  model.validate();
  const std::size_t B = model.boson_dimension();
  const std::size_t M = model.modes.size();
  const auto base = static_cast<std::size_t>(model.n_max + 1);
  std::vector<std::size_t> stride(M, 1);
  for (std::size_t j = M; j-- > 1;) stride[j - 1] = stride[j] * base;

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * B), static_cast<Eigen::Index>(2 * B));
  for (std::size_t b = 0; b < B; ++b) {
    double boson = 0.0;
    for (std::size_t j = 0; j < M; ++j) boson += model.modes[j].omega * static_cast<double>((b / stride[j]) % base);
    const auto up = static_cast<Eigen::Index>(b), down = static_cast<Eigen::Index>(B + b);
    h(up, up) = 2.0 + boson;
    h(down, down) = boson;
    // σ_x couples |↑, n⟩ with |↓, n ± e_j⟩.
    for (std::size_t j = 0; j < M; ++j) {
      const std::size_t n = (b / stride[j]) % base;
      if (n + 1 >= base) continue;
      const double amp = model.lambda * kFieldScale * model.modes[j].v * std::sqrt(static_cast<double>(n + 1));
      const auto raised = static_cast<Eigen::Index>(b + stride[j]);
      h(up, static_cast<Eigen::Index>(B) + raised) = amp;
      h(static_cast<Eigen::Index>(B) + raised, up) = amp;
      h(down, raised) = amp;
      h(raised, down) = amp;
    }
  }
  return h;
}

struct SpectralResult {
  double energy = 0.0;  ///< E_λ
  double rho = 1.0;     ///< |⟨ψ₀, Ω↓⟩|²
  double gap = 0.0;
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd vacuum_weights;  ///< |⟨ψ_k, Ω↓⟩|² per eigenvalue
};

inline constexpr double kDegeneracyTolerance = 1e-10;

inline SpectralResult diagonalize(const TruncatedModel& model) {
  const Eigen::MatrixXd h = build_hamiltonian(model);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("fock: eigendecomposition failed");
  SpectralResult r;
  r.eigenvalues = solver.eigenvalues();
  r.vacuum_weights = solver.eigenvectors().row(static_cast<Eigen::Index>(vacuum_down_index(model))).array().square();
  r.energy = r.eigenvalues(0);
  r.rho = std::clamp(r.vacuum_weights(0), 0.0, 1.0);
  r.gap = r.eigenvalues.size() > 1 ? r.eigenvalues(1) - r.eigenvalues(0) : 0.0;
  return r;
}

/// ⟨Ω↓, e^{-TH} Ω↓⟩ = Σ_k |⟨ψ_k, Ω↓⟩|² e^{-T E_k}.
inline double semigroup_overlap(const SpectralResult& spectrum, double horizon) {
  if (!(horizon >= 0.0)) throw UsageError("semigroup_overlap: T must be nonnegative");
  const double e0 = spectrum.eigenvalues(0);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < spectrum.eigenvalues.size(); ++k)
    sum += spectrum.vacuum_weights(k) * std::exp(-horizon * (spectrum.eigenvalues(k) - e0));
  return sum * std::exp(-horizon * e0);
}

inline double semigroup_overlap(const TruncatedModel& model, double horizon) {
  if (model.lambda == 0.0) {
    model.validate();
    return 1.0;
  }
  return semigroup_overlap(diagonalize(model), horizon);
}

/// E_{α,T}[X_0 X_t] for the matching Ising model, from
/// ⟨Ω↓, σ_x e^{-tH} σ_x e^{-(T-t)H} Ω↓⟩ / ⟨Ω↓, e^{-TH} Ω↓⟩.
inline double semigroup_correlation(const TruncatedModel& model, double horizon, double t) {
  if (!(t >= 0.0 && t <= horizon)) throw UsageError("semigroup_correlation: need 0 ≤ t ≤ T");
  const Eigen::MatrixXd h = build_hamiltonian(model);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("fock: eigendecomposition failed");
  const Eigen::MatrixXd& u = solver.eigenvectors();
  const Eigen::ArrayXd e = solver.eigenvalues().array() - solver.eigenvalues()(0);
  const auto B = static_cast<Eigen::Index>(model.boson_dimension());
  auto evolve = [&](const Eigen::VectorXd& v, double s) -> Eigen::VectorXd {
    return u * ((-s * e).exp() * (u.transpose() * v).array()).matrix();
  };
  auto flip = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd w(v.size());
    w.head(B) = v.tail(B);
    w.tail(B) = v.head(B);
    return w;
  };
  Eigen::VectorXd vac = Eigen::VectorXd::Zero(2 * B);
  vac(B) = 1.0;
  const double z = vac.dot(evolve(vac, horizon));
  return flip(vac).dot(evolve(flip(evolve(vac, horizon - t)), t)) / z;
}

inline SpectralResult ground_state_report(const TruncatedModel& model) {
  SpectralResult r = diagonalize(model);
  if (model.lambda == 0.0) {
    // Ω↓ is the exact ground state; the first excitation is min(2, ω_min).
    double w = std::numeric_limits<double>::infinity();
    for (const auto& m : model.modes) w = std::min(w, m.omega);
    r.energy = 0.0;
    r.rho = 1.0;
    r.gap = std::min(2.0, w);
    return r;
  }
  if (r.gap < kDegeneracyTolerance) throw NumericalError("fock: degenerate ground level, ρ is not defined");
  return r;
}

struct CutoffRow {
  int n_max = 0;
  double energy = 0.0;
  double rho = 0.0;
  double gap = 0.0;
};

struct CutoffReport {
  std::vector<CutoffRow> rows;
  double truncation_error = 0.0;  ///< |ΔE| between the last two cutoffs
  bool converging = true;         ///< successive |ΔE| shrink
};

inline CutoffReport cutoff_convergence(TruncatedModel model, const std::vector<int>& n_max_list) {
  if (n_max_list.empty()) throw UsageError("cutoff_convergence: empty cutoff list");
  for (std::size_t i = 1; i < n_max_list.size(); ++i)
    if (n_max_list[i] <= n_max_list[i - 1]) throw UsageError("cutoff_convergence: cutoffs must increase");
  CutoffReport report;
  for (int n : n_max_list) {
    model.n_max = n;
    const SpectralResult r = ground_state_report(model);
    report.rows.push_back({n, r.energy, r.rho, r.gap});
  }
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const double d = std::abs(report.rows[i].energy - report.rows[i - 1].energy);
    // Differences at round-off level count as converged.
    if (d > prev && d > 1e-12) report.converging = false;
    prev = d;
    report.truncation_error = d;
  }
  return report;
}

}  // namespace sbising
