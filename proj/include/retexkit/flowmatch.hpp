#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace retexkit::flowmatch {

inline constexpr double kDefaultCfgScale = 1.5;
inline constexpr int kDistilledSteps = 3;
inline constexpr int kBaseSteps = 50;

// Dense real tensor of arbitrary shape (row-major). Entries must be finite.
class LatentTensor {
public:
  LatentTensor() = default;
  explicit LatentTensor(std::vector<std::size_t> shape, double fill = 0.0);
  LatentTensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const LatentTensor& o) const noexcept { return shape_ == o.shape_; }

  friend bool operator==(const LatentTensor&, const LatentTensor&) = default;

private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// t = 0 is data, t = 1 is noise.
struct FMPoint {
  LatentTensor z0;
  LatentTensor eps;
  double t = 0.0;
};

// (1 - t) * z0 + t * eps. Exact at the endpoints t = 0 and t = 1.
LatentTensor interpolate(const FMPoint& p);

// eps - z0, independent of t.
LatentTensor target_velocity(const LatentTensor& z0, const LatentTensor& eps);

// Mean over all elements of (pred - target)^2.
double fm_loss(const LatentTensor& v_pred, const LatentTensor& v_star);

// d fm_loss / d v_pred = 2 (pred - target) / N.
LatentTensor fm_loss_gradient(const LatentTensor& v_pred, const LatentTensor& v_star);

// v_uncond + scale * (v_cond - v_uncond). scale = 1 returns v_cond exactly, scale = 0 v_uncond.
LatentTensor cfg_combine(const LatentTensor& v_uncond, const LatentTensor& v_cond, double scale = kDefaultCfgScale);

using VelocityFn = std::function<LatentTensor(const LatentTensor& z, double t)>;

// Uniform grid from t_start to t_end in `steps` Euler steps: z <- z + dt * v(z, t).
LatentTensor euler_sample(const VelocityFn& velocity, const LatentTensor& z_start, int steps, double t_start = 1.0,
                          double t_end = 0.0);

// Euler over an explicit, monotone time grid (at least two points).
LatentTensor euler_sample_grid(const VelocityFn& velocity, const LatentTensor& z_start, const std::vector<double>& grid);

std::vector<double> uniform_grid(int steps, double t_start = 1.0, double t_end = 0.0);

// ---- invariant harness (backs the `fmcheck` command) ----

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst error / statistic observed
  double tolerance = 0.0;
};

struct SuiteOptions {
  std::uint64_t seed = 0;
  int trials = 20;
  std::vector<int> steps{1, kDistilledSteps, kBaseSteps};
  // Test hook: perturbs the velocity used by the Euler round-trip so the suite must fail.
  bool inject_faulty_velocity = false;
};

std::vector<CheckResult> run_invariant_suite(const SuiteOptions& opts);

}  // namespace retexkit::flowmatch
