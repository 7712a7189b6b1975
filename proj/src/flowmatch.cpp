#include "retexkit/flowmatch.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "retexkit/error.hpp"
#include "retexkit/rng.hpp"

namespace retexkit::flowmatch {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_same_shape(const LatentTensor& a, const LatentTensor& b, const char* op) {
  if (!a.same_shape(b)) throw ShapeError(std::string(op) + ": tensor shapes differ");
}

void require_finite(const std::vector<double>& data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw DomainError("latent tensor has a non-finite entry");
  }
}

}  // namespace

LatentTensor::LatentTensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  require_finite(data_);
}

LatentTensor::LatentTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) throw ShapeError("latent data size does not match its shape");
  require_finite(data_);
}

LatentTensor interpolate(const FMPoint& p) {
  require_same_shape(p.z0, p.eps, "interpolate");
  if (!(p.t >= 0.0 && p.t <= 1.0)) throw DomainError("interpolation time must be in [0, 1]");
  if (p.t == 0.0) return p.z0;
  if (p.t == 1.0) return p.eps;
  LatentTensor out(p.z0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - p.t) * p.z0[i] + p.t * p.eps[i];
  return out;
}

LatentTensor target_velocity(const LatentTensor& z0, const LatentTensor& eps) {
  require_same_shape(z0, eps, "target_velocity");
  LatentTensor out(z0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eps[i] - z0[i];
  return out;
}

double fm_loss(const LatentTensor& v_pred, const LatentTensor& v_star) {
  require_same_shape(v_pred, v_star, "fm_loss");
  if (v_pred.empty()) throw ShapeError("fm_loss of an empty tensor");
  double sum = 0.0;
  for (std::size_t i = 0; i < v_pred.size(); ++i) {
    const double d = v_pred[i] - v_star[i];
    sum += d * d;
  }
  return sum / static_cast<double>(v_pred.size());
}

LatentTensor fm_loss_gradient(const LatentTensor& v_pred, const LatentTensor& v_star) {
  require_same_shape(v_pred, v_star, "fm_loss_gradient");
  if (v_pred.empty()) throw ShapeError("fm_loss_gradient of an empty tensor");
  LatentTensor g(v_pred.shape());
  const double scale = 2.0 / static_cast<double>(v_pred.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * (v_pred[i] - v_star[i]);
  return g;
}

LatentTensor cfg_combine(const LatentTensor& v_uncond, const LatentTensor& v_cond, double scale) {
  require_same_shape(v_uncond, v_cond, "cfg_combine");
  if (scale == 1.0) return v_cond;
  if (scale == 0.0) return v_uncond;
  LatentTensor out(v_cond.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v_uncond[i] + scale * (v_cond[i] - v_uncond[i]);
  return out;
}

std::vector<double> uniform_grid(int steps, double t_start, double t_end) {
  if (steps < 1) throw ConfigError("euler sampling needs at least one step");
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    grid[static_cast<std::size_t>(i)] = t_start + (t_end - t_start) * static_cast<double>(i) / steps;
  }
  grid.back() = t_end;
  return grid;
}

LatentTensor euler_sample_grid(const VelocityFn& velocity, const LatentTensor& z_start, const std::vector<double>& grid) {
  if (grid.size() < 2) throw ConfigError("time grid needs at least two points");
  const bool descending = grid.back() < grid.front();
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (!std::isfinite(grid[k + 1]) || (descending ? grid[k + 1] > grid[k] : grid[k + 1] < grid[k])) {
      throw ConfigError("time grid must be monotone");
    }
  }
  LatentTensor z = z_start;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double dt = grid[k + 1] - grid[k];
    const LatentTensor v = velocity(z, grid[k]);
    if (!v.same_shape(z)) throw ShapeError("velocity function returned a tensor of the wrong shape");
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += dt * v[i];
  }
  return z;
}

LatentTensor euler_sample(const VelocityFn& velocity, const LatentTensor& z_start, int steps, double t_start,
                          double t_end) {
  return euler_sample_grid(velocity, z_start, uniform_grid(steps, t_start, t_end));
}

// ---- invariant harness ----

namespace {

LatentTensor random_tensor(Rng& rng, const std::vector<std::size_t>& shape) {
  LatentTensor t(shape);
  for (double& v : t.data()) v = rng.normal();
  return t;
}

double max_abs_diff(const LatentTensor& a, const LatentTensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<std::size_t> random_shape(Rng& rng) {
  const std::size_t rank = 1 + rng.below(4);
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = 1 + rng.below(5);
  return shape;
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const SuiteOptions& opts) {
  Rng rng(opts.seed);
  const int trials = std::max(1, opts.trials);

  CheckResult endpoints{"endpoint identities (t=0 -> z0, t=1 -> eps)", true, 0.0, 0.0};
  CheckResult consistency{"path/velocity consistency", true, 0.0, 1e-12};
  CheckResult loss_zero{"fm_loss >= 0, zero iff equal", true, 0.0, 0.0};
  CheckResult gradient{"fm_loss gradient vs central differences (rel)", true, 0.0, 1e-6};
  CheckResult cfg_identity{"cfg_combine scale 1 == v_cond, scale 0 == v_uncond", true, 0.0, 0.0};
  CheckResult cfg_affine{"cfg_combine affine in scale", true, 0.0, 1e-12};
  std::vector<CheckResult> euler;
  for (int s : opts.steps) {
    euler.push_back({"euler round trip eps -> z0, steps=" + std::to_string(s), true, 0.0, 1e-12});
  }

  for (int trial = 0; trial < trials; ++trial) {
    const auto shape = random_shape(rng);
    const LatentTensor z0 = random_tensor(rng, shape);
    const LatentTensor eps = random_tensor(rng, shape);
    const double t = rng.uniform();

    if (!(interpolate({z0, eps, 0.0}) == z0) || !(interpolate({z0, eps, 1.0}) == eps)) endpoints.passed = false;

    const LatentTensor zt = interpolate({z0, eps, t});
    const LatentTensor v = target_velocity(z0, eps);
    for (std::size_t i = 0; i < zt.size(); ++i) {
      consistency.measured = std::max(consistency.measured, std::abs(zt[i] + (1.0 - t) * v[i] - eps[i]));
      consistency.measured = std::max(consistency.measured, std::abs(zt[i] - t * v[i] - z0[i]));
    }

    const LatentTensor pred = random_tensor(rng, shape);
    const double loss = fm_loss(pred, v);
    if (!(loss > 0.0) || fm_loss(v, v) != 0.0) loss_zero.passed = false;

    // Central differences on each coordinate.
    const LatentTensor g = fm_loss_gradient(pred, v);
    double num = 0.0;
    double den = 0.0;
    const double h = 1e-6;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      LatentTensor plus = pred;
      LatentTensor minus = pred;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (fm_loss(plus, v) - fm_loss(minus, v)) / (plus[i] - minus[i]);
      num += (fd - g[i]) * (fd - g[i]);
      den += g[i] * g[i];
    }
    gradient.measured = std::max(gradient.measured, std::sqrt(num) / std::max(std::sqrt(den), 1e-300));

    const LatentTensor vu = random_tensor(rng, shape);
    const LatentTensor vc = random_tensor(rng, shape);
    if (!(cfg_combine(vu, vc, 1.0) == vc) || !(cfg_combine(vu, vc, 0.0) == vu)) cfg_identity.passed = false;
    const double s1 = rng.uniform(-3.0, 3.0);
    const double s2 = rng.uniform(-3.0, 3.0);
    const LatentTensor a = cfg_combine(vu, vc, s1);
    const LatentTensor b = cfg_combine(vu, vc, s2);
    const LatentTensor mid = cfg_combine(vu, vc, 0.5 * (s1 + s2));
    for (std::size_t i = 0; i < mid.size(); ++i) {
      cfg_affine.measured = std::max(cfg_affine.measured, std::abs(mid[i] - 0.5 * (a[i] + b[i])));
    }

    VelocityFn field = [&](const LatentTensor&, double) { return v; };
    if (opts.inject_faulty_velocity) {
      field = [&](const LatentTensor& z, double) {
        LatentTensor w = v;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += 0.01 * z[i];
        return w;
      };
    }
    for (std::size_t k = 0; k < opts.steps.size(); ++k) {
      const LatentTensor out = euler_sample(field, eps, opts.steps[k]);
      euler[k].measured = std::max(euler[k].measured, max_abs_diff(out, z0));
    }
  }

  consistency.passed = consistency.measured < consistency.tolerance;
  gradient.passed = gradient.measured < gradient.tolerance;
  cfg_affine.passed = cfg_affine.measured < cfg_affine.tolerance;
  for (auto& e : euler) e.passed = e.measured < e.tolerance;

  std::vector<CheckResult> results{endpoints, consistency, loss_zero, gradient, cfg_identity, cfg_affine};
  results.insert(results.end(), euler.begin(), euler.end());
  return results;
}

}  // namespace retexkit::flowmatch
