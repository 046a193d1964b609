#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mixvar/band_linalg.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/random.hpp"

namespace mixvar {

/// Gaussian N(mean, precision^{-1}) restricted to the box
/// lower <= y <= upper (entries may be infinite).
struct TruncatedGaussian {
  BandedSpd precision;
  Eigen::VectorXd linear;  // precision * mean
  Eigen::VectorXd mean;
  BandedLower factor;      // Cholesky factor of `precision`
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return precision.dim(); }

  // Builds the target from precision and linear term; factorizes once.
  static TruncatedGaussian from_precision(BandedSpd precision, Eigen::VectorXd linear,
                                          Eigen::VectorXd lower, Eigen::VectorXd upper) {
    TruncatedGaussian g;
    g.factor = band_cholesky(precision);
    g.mean = band_solve(g.factor, linear, SolveMode::full);
    g.precision = std::move(precision);
    g.linear = std::move(linear);
    g.lower = std::move(lower);
    g.upper = std::move(upper);
    return g;
  }

  bool strictly_feasible(const Eigen::VectorXd& y) const {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (!(y[i] > lower[i] && y[i] < upper[i])) return false;
    return true;
  }
};

enum class HmcSampler { zigzag, harmonic };

struct HmcConfig {
  HmcSampler sampler = HmcSampler::zigzag;
  // Trajectory duration; non-positive selects the default rule of each
  // sampler (zigzag: pi/2 times the median conditional SD, harmonic:
  // Uniform(pi/8, pi/2) per call).
  double travel_time = 0.0;
  std::size_t max_bounces = 1'000'000;
};

struct HmcDraw {
  Eigen::VectorXd state;
  std::size_t events = 0;
  double travel_time = 0.0;
  bool rejected = false;  // trajectory exceeded max_bounces; state == current
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest strictly positive root of a x^2 + b x + c, or +inf.
inline double smallest_positive_root(double a, double b, double c) {
  if (a == 0.0) {
    if (b == 0.0) return kInf;
    const double r = -c / b;
    return r > 0.0 ? r : kInf;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kInf;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double best = kInf;
  const double r1 = q / a;
  if (r1 > 0.0) best = r1;
  if (q != 0.0) {
    const double r2 = c / q;
    if (r2 > 0.0) best = std::min(best, r2);
  }
  return best;
}

// Pushes coordinates that rounding left on (or past) a wall back inside by
// reflection.
inline void enforce_strict_feasibility(const TruncatedGaussian& g, Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] <= g.lower[i]) {
      const double r = g.lower[i] + (g.lower[i] - y[i]);
      y[i] = r > g.lower[i] ? r : std::nextafter(g.lower[i], kInf);
    }
    if (y[i] >= g.upper[i]) {
      const double r = g.upper[i] - (y[i] - g.upper[i]);
      y[i] = r < g.upper[i] ? r : std::nextafter(g.upper[i], -kInf);
    }
  }
}

}  // namespace detail

inline double default_zigzag_travel_time(const BandedSpd& precision) {
  const Eigen::Index d = precision.dim();
  if (d == 0) return 0.0;
  std::vector<double> sd(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) sd[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(precision(i, i));
  auto mid = sd.begin() + static_cast<std::ptrdiff_t>(sd.size() / 2);
  std::nth_element(sd.begin(), mid, sd.end());
  double median = *mid;
  if (sd.size() % 2 == 0) median = 0.5 * (median + *std::max_element(sd.begin(), mid));
  return 0.5 * std::numbers::pi * median;
}

/// Zigzag HMC move (Laplace momentum) targeting a truncated Gaussian.
///
/// Positions move at unit speed along sign(momentum). Each momentum
/// coordinate is quadratic in time between events, so the time at which it
/// reaches zero (a velocity flip) and the time at which a position reaches
/// its wall (a reflection) are both found in closed form. A flip in
/// coordinate i only changes the dynamics of coordinates inside i's band,
/// so each event costs O(bandwidth log dim). The dynamics are integrated
/// exactly, hence no accept/reject step is needed.
inline HmcDraw zigzag_hmc_draw(const TruncatedGaussian& g, const Eigen::VectorXd& current,
                               const HmcConfig& cfg, Rng& rng) {
  const Eigen::Index d = g.dim();
  if (current.size() != d) throw DimensionMismatch("zigzag_hmc_draw state");
  HmcDraw out{current, 0, 0.0, false};
  if (d == 0) return out;
  if (!g.strictly_feasible(current)) throw NumericalError("zigzag_hmc_draw: infeasible start");

  const double travel = cfg.travel_time > 0.0 ? cfg.travel_time : default_zigzag_travel_time(g.precision);
  out.travel_time = travel;
  const BandedSpd& K = g.precision;
  const Eigen::Index bw = K.bandwidth();

  Eigen::VectorXd y = current;
  Eigen::VectorXd xi(d);
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    xi[i] = rng.laplace();
    v[i] = xi[i] >= 0.0 ? 1.0 : -1.0;
  }
  // grad U = K y - b; w = K v is the time derivative of the gradient.
  Eigen::VectorXd grad = K.multiply(y) - g.linear;
  Eigen::VectorXd w = K.multiply(v);
  Eigen::VectorXd tref = Eigen::VectorXd::Zero(d);
  std::vector<unsigned> version(static_cast<std::size_t>(d), 0);

  struct Event {
    double time;
    Eigen::Index index;
    unsigned version;
    bool wall;
    bool operator>(const Event& o) const { return time > o.time; }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;

  auto advance = [&](Eigen::Index i, double s) {
    const double dt = s - tref[i];
    if (dt == 0.0) return;
    y[i] += v[i] * dt;
    xi[i] -= grad[i] * dt + 0.5 * w[i] * dt * dt;
    grad[i] += w[i] * dt;
    tref[i] = s;
  };
  // Queues the next flip or wall hit of coordinate i (advanced to `now`).
  auto schedule = [&](Eigen::Index i, double now) {
    // |xi| decreases as v (grad dt + w dt^2 / 2) grows to |xi|.
    const double dt_flip =
        detail::smallest_positive_root(0.5 * v[i] * w[i], v[i] * grad[i], -std::abs(xi[i]));
    double dt_wall = detail::kInf;
    if (v[i] > 0.0 && std::isfinite(g.upper[i])) dt_wall = g.upper[i] - y[i];
    if (v[i] < 0.0 && std::isfinite(g.lower[i])) dt_wall = y[i] - g.lower[i];
    const bool wall = dt_wall < dt_flip;
    const double dt = wall ? dt_wall : dt_flip;
    ++version[static_cast<std::size_t>(i)];
    if (now + dt <= travel) queue.push({now + dt, i, version[static_cast<std::size_t>(i)], wall});
  };

  for (Eigen::Index i = 0; i < d; ++i) schedule(i, 0.0);

  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    if (ev.version != version[static_cast<std::size_t>(ev.index)]) continue;
    if (++out.events > cfg.max_bounces) {
      out.rejected = true;
      out.state = current;
      return out;
    }
    const Eigen::Index i = ev.index;
    const double s = ev.time;
    advance(i, s);
    if (ev.wall) {
      y[i] = v[i] > 0.0 ? g.upper[i] : g.lower[i];
      xi[i] = -xi[i];
    } else {
      xi[i] = 0.0;
    }
    v[i] = -v[i];
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - bw);
    const Eigen::Index hi = std::min<Eigen::Index>(d - 1, i + bw);
    for (Eigen::Index j = lo; j <= hi; ++j) {
      const double kji = K(j, i);
      if (kji == 0.0 && j != i) continue;
      advance(j, s);
      w[j] += 2.0 * v[i] * kji;
      schedule(j, s);
    }
  }
  for (Eigen::Index i = 0; i < d; ++i) advance(i, travel);
  detail::enforce_strict_feasibility(g, y);
  out.state = std::move(y);
  return out;
}

/// Exact HMC with Gaussian momentum. Between wall hits the trajectory is
/// y(s) = mean + a cos s + b sin s; at a wall the velocity is reflected in
/// the metric of the target covariance.
inline HmcDraw harmonic_hmc_draw(const TruncatedGaussian& g, const Eigen::VectorXd& current,
                                 const HmcConfig& cfg, Rng& rng) {
  const Eigen::Index d = g.dim();
  if (current.size() != d) throw DimensionMismatch("harmonic_hmc_draw state");
  HmcDraw out{current, 0, 0.0, false};
  if (d == 0) return out;
  if (!g.strictly_feasible(current)) throw NumericalError("harmonic_hmc_draw: infeasible start");

  constexpr double pi = std::numbers::pi;
  const double travel = cfg.travel_time > 0.0 ? cfg.travel_time : pi / 8.0 + (pi / 2.0 - pi / 8.0) * rng.uniform();
  out.travel_time = travel;

  Eigen::VectorXd a = current - g.mean;
  Eigen::VectorXd b = band_solve(g.factor, rng.normal_vector(d), SolveMode::backward);
  std::unordered_map<Eigen::Index, Eigen::VectorXd> cov_columns;
  auto cov_column = [&](Eigen::Index j) -> const Eigen::VectorXd& {
    auto it = cov_columns.find(j);
    if (it == cov_columns.end()) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
      e[j] = 1.0;
      it = cov_columns.emplace(j, band_solve(g.factor, e, SolveMode::full)).first;
    }
    return it->second;
  };

  double remaining = travel;
  Eigen::Index last_hit = -1;
  constexpr double two_pi = 2.0 * pi;
  while (true) {
    double t_hit = detail::kInf;
    Eigen::Index j_hit = -1;
    bool hit_upper = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      const bool has_lo = std::isfinite(g.lower[j]);
      const bool has_hi = std::isfinite(g.upper[j]);
      if (!has_lo && !has_hi) continue;
      const double u = std::hypot(a[j], b[j]);
      if (u == 0.0) continue;
      const double phi = std::atan2(b[j], a[j]);
      for (int side = 0; side < 2; ++side) {
        const bool upper = side == 1;
        if (upper ? !has_hi : !has_lo) continue;
        const double c = ((upper ? g.upper[j] : g.lower[j]) - g.mean[j]) / u;
        if (c > 1.0 || c < -1.0) continue;
        const double psi = std::acos(c);
        // Exit through the lower wall while decreasing, upper while increasing.
        double s = upper ? phi - psi : phi + psi;
        s = std::fmod(s, two_pi);
        if (s < 0.0) s += two_pi;
        if (j == last_hit && (s < 1e-10 || s > two_pi - 1e-10)) continue;
        if (s <= 0.0) continue;
        if (s < t_hit) {
          t_hit = s;
          j_hit = j;
          hit_upper = upper;
        }
      }
    }
    if (j_hit < 0 || t_hit >= remaining) {
      const Eigen::VectorXd y = g.mean + a * std::cos(remaining) + b * std::sin(remaining);
      out.state = y;
      break;
    }
    if (++out.events > cfg.max_bounces) {
      out.rejected = true;
      out.state = current;
      return out;
    }
    Eigen::VectorXd y = g.mean + a * std::cos(t_hit) + b * std::sin(t_hit);
    Eigen::VectorXd vel = -a * std::sin(t_hit) + b * std::cos(t_hit);
    y[j_hit] = hit_upper ? g.upper[j_hit] : g.lower[j_hit];
    const Eigen::VectorXd& col = cov_column(j_hit);
    vel -= (2.0 * vel[j_hit] / col[j_hit]) * col;
    a = y - g.mean;
    b = vel;
    remaining -= t_hit;
    last_hit = j_hit;
  }
  detail::enforce_strict_feasibility(g, out.state);
  return out;
}

inline HmcDraw truncated_gaussian_draw(const TruncatedGaussian& g, const Eigen::VectorXd& current,
                                       const HmcConfig& cfg, Rng& rng) {
  return cfg.sampler == HmcSampler::zigzag ? zigzag_hmc_draw(g, current, cfg, rng)
                                           : harmonic_hmc_draw(g, current, cfg, rng);
}

}  // namespace mixvar
