#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"

namespace sbising {

/// Piecewise-constant ±1 trajectory on [0, T]: initial spin plus sorted jump times.
/// The spin at time t is initial_spin · (-1)^{#jumps ≤ t}.
class SpinPath {
 public:
  SpinPath(double horizon, int initial_spin, std::vector<double> jumps = {})
      : horizon_(horizon), initial_spin_(initial_spin), jumps_(std::move(jumps)) {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw ValidationError("SpinPath: horizon must be positive");
    if (initial_spin_ != 1 && initial_spin_ != -1) throw ValidationError("SpinPath: initial spin must be +1 or -1");
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
      if (!(jumps_[i] > 0.0 && jumps_[i] < horizon_)) throw ValidationError("SpinPath: jumps must lie in (0, T)");
      if (i > 0 && !(jumps_[i] > jumps_[i - 1])) throw ValidationError("SpinPath: jumps must be strictly increasing");
    }
  }

  double horizon() const noexcept { return horizon_; }
  int initial_spin() const noexcept { return initial_spin_; }
  std::span<const double> jumps() const noexcept { return jumps_; }
  std::size_t jump_count() const noexcept { return jumps_.size(); }
  std::size_t interval_count() const noexcept { return jumps_.size() + 1; }

  /// Left end of the i-th constant interval; boundary(interval_count()) = T.
  double boundary(std::size_t i) const noexcept {
    if (i == 0) return 0.0;
    if (i > jumps_.size()) return horizon_;
    return jumps_[i - 1];
  }
  int interval_spin(std::size_t i) const noexcept { return (i % 2 == 0) ? initial_spin_ : -initial_spin_; }

  int spin_at(double t) const noexcept {
    const auto flips = std::upper_bound(jumps_.begin(), jumps_.end(), t) - jumps_.begin();
    return (flips % 2 == 0) ? initial_spin_ : -initial_spin_;
  }

  /// ∏_i X_{t_i}.
  int spin_product(std::span<const double> times) const noexcept {
    int p = 1;
    for (double t : times) p *= spin_at(t);
    return p;
  }

  /// ∫_0^T X_t dt, exact for the piecewise-constant path.
  double time_integral() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < interval_count(); ++i) s += interval_spin(i) * (boundary(i + 1) - boundary(i));
    return s;
  }

  // Mutators used by the sampler. They keep the invariants; callers are
  // responsible for valid arguments.
  void flip_all() noexcept { initial_spin_ = -initial_spin_; }
  void insert_jump(double u) { jumps_.insert(std::upper_bound(jumps_.begin(), jumps_.end(), u), u); }
  void erase_jump(std::size_t index) { jumps_.erase(jumps_.begin() + static_cast<std::ptrdiff_t>(index)); }
  bool contains_jump(double u) const { return std::binary_search(jumps_.begin(), jumps_.end(), u); }

  friend bool operator==(const SpinPath&, const SpinPath&) = default;

 private:
  double horizon_;
  int initial_spin_;
  std::vector<double> jumps_;
};

/// α ∬_{[0,T]²} g(t-s) X_s X_t ds dt, summed over pairs of constant intervals.
inline double path_energy(const SpinPath& path, const Kernel& kernel, double alpha) {
  if (alpha == 0.0) return 0.0;
  const std::size_t n = path.interval_count();
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = path.boundary(i), b = path.boundary(i + 1);
    diag += kernel.box_integral(a, b, a, b);
    for (std::size_t j = i + 1; j < n; ++j) {
      off += path.interval_spin(i) * path.interval_spin(j) *
             kernel.box_integral(a, b, path.boundary(j), path.boundary(j + 1));
    }
  }
  return alpha * (diag + 2.0 * off);
}

/// Change of ∬ g X X when the spins on [a, b] are flipped (not multiplied by α).
/// Only cross terms between the flipped stretch and its complement change sign.
inline double segment_flip_delta(const SpinPath& path, const Kernel& kernel, double a, double b) {
  if (!(a < b)) return 0.0;
  struct Piece {
    double lo, hi;
    int spin;
  };
  std::vector<Piece> inside, outside;
  const std::size_t n = path.interval_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = path.boundary(i), hi = path.boundary(i + 1);
    const int s = path.interval_spin(i);
    const double in_lo = std::max(lo, a), in_hi = std::min(hi, b);
    if (in_hi > in_lo) inside.push_back({in_lo, in_hi, s});
    if (lo < a) outside.push_back({lo, std::min(hi, a), s});
    if (hi > b) outside.push_back({std::max(lo, b), hi, s});
  }
  double cross = 0.0;
  for (const auto& p : inside)
    for (const auto& q : outside) cross += p.spin * q.spin * kernel.box_integral(p.lo, p.hi, q.lo, q.hi);
  return -4.0 * cross;
}

/// ∫_{[0,T]} ∫_{[0,T]} g(u + v) Y_u Z_v du dv: the interaction across the
/// gluing point of a path reflected onto [-T, 0] (Y) and one on [0, T] (Z).
inline double glued_cross_energy(const SpinPath& left, const SpinPath& right, const Kernel& kernel) {
  double cross = 0.0;
  for (std::size_t i = 0; i < left.interval_count(); ++i) {
    const double a = left.boundary(i), b = left.boundary(i + 1);
    for (std::size_t j = 0; j < right.interval_count(); ++j) {
      cross += left.interval_spin(i) * right.interval_spin(j) *
               kernel.box_integral(-b, -a, right.boundary(j), right.boundary(j + 1));
    }
  }
  return cross;
}

}  // namespace sbising
