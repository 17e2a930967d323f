#include "crlflood/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crlflood/coding.hpp"
#include "crlflood/mac.hpp"
#include "crlflood/rng.hpp"

namespace crlflood {

namespace {

bool is_inf(double m) { return std::isinf(m); }

void check_m(double m, double min_finite) {
  if (is_inf(m)) return;
  if (!(m >= min_finite)) throw std::invalid_argument("M out of range");
}

}  // namespace

FixedPoint solve_tf(double m, double tol) {
  check_m(m, 1.0 + 1e-12);  // (1,2) admitted but outside the proven range
  if (tol <= 0) throw std::invalid_argument("tolerance must be positive");
  const auto f = [m](double x) {
    return -std::log(x) - 1.0 + (is_inf(m) ? 0.0 : x / m);
  };
  double lo = 1e-12, hi = 1.0;
  double x = 0.5, fx = f(x);
  for (int it = 0; it < 200 && std::abs(fx) > tol; ++it) {
    (fx > 0 ? lo : hi) = x;
    x = 0.5 * (lo + hi);
    fx = f(x);
  }
  return {x, x};
}

double theorem1_bound(int hops, double m) {
  if (hops < 1) throw std::invalid_argument("hop count must be >= 1");
  check_m(m, 2.0);
  if (is_inf(m)) return 1.0 + 0.5 * (hops - 1);
  const double first = -m * std::log1p(-1.0 / m);
  const double per_hop = -m * std::log1p(-1.0 / (2.0 * m - 1.0));
  return first + (hops - 1) * per_hop;
}

double one_hop_asymptote(double m, double eps) {
  check_m(m, 2.0);
  if (eps < 0 || eps >= 1) throw std::invalid_argument("epsilon must be in [0,1)");
  const double base = is_inf(m) ? 1.0 : -m * std::log1p(-1.0 / m);
  return base / (1.0 - eps);
}

double h_star(int i, double m) {
  if (i < 0) throw std::invalid_argument("index must be >= 0");
  check_m(m, 1.0 + 1e-12);
  if (i == 0) return m;
  if (is_inf(m)) return 1.0 / (i + 1.0);
  return 1.0 / ((i + 1.0) - i / m);
}

RatioState ratio_state(std::span<const double> h, double m) {
  const size_t n = h.size();
  RatioState out;
  out.r.resize(n);
  out.big_r.resize(n);
  out.alpha.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double up = i == 0 ? m : h[i - 1];
    out.r[i] = is_inf(up) ? 0.0 : h[i] / up;
    out.big_r[i] = 1.0 / (2.0 - out.r[i]);
    out.alpha[i] = (2.0 - out.r[i]) / h[i];
  }
  out.regularly_ordered = n > 0 && h[0] <= 1.0 + 1e-12;
  for (size_t i = 0; i < n && out.regularly_ordered; ++i) {
    if (!(h[i] > 0)) out.regularly_ordered = false;
    if (i > 0 && h[i] > h[i - 1] + 1e-15) out.regularly_ordered = false;
    // r_i >= R_{i-1} for 1-based i >= 2, i.e. from the second entry on.
    if (i >= 1 && out.r[i] < out.big_r[i - 1] - 1e-12) out.regularly_ordered = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fluid system

namespace {

void validate_profile(std::span<const double> h0) {
  for (size_t i = 0; i < h0.size(); ++i) {
    if (!(h0[i] >= 0) || h0[i] >= 1.0)
      throw std::invalid_argument("initial fractions must lie in [0,1)");
    if (i > 0 && h0[i] > h0[i - 1] + 1e-12)
      throw std::invalid_argument("initial fractions must be non-increasing");
  }
}

// Zero-start series correction: with all-zero initial conditions,
// h_i(t) = (t/i) c_i(t)/c_{i-1}(t) where
// c_i(t) = sum_{p>=0} t^p / (M^p (i+1)(i+2)...(i+p)).
double zero_start_c(int i, double t, double m) {
  if (is_inf(m)) return 1.0;
  double c = 1.0, term = 1.0;
  for (int p = 1; p < 40; ++p) {
    term *= t / (m * (i + p));
    c += term;
    if (term < 1e-22) break;
  }
  return c;
}

}  // namespace

FluidSystem::FluidSystem(FluidModel model, double m, std::vector<double> h0, double dt)
    : model_(model), m_(m), dt_(dt), n_nodes_(static_cast<int>(h0.size())) {
  if (model == FluidModel::Precode) check_m(m, 1.0 + 1e-12);
  if (dt <= 0) throw std::invalid_argument("dt must be positive");
  if (h0.empty()) throw std::invalid_argument("need at least one node");
  validate_profile(h0);
  window_ = std::move(h0);

  if (model_ == FluidModel::Precode) {
    // The ratio h_i/h_{i-1} is 0/0 on an all-zero tail; start such tails one
    // step in from the exact series solution.
    size_t s = window_.size();
    while (s > 0 && window_[s - 1] == 0.0) --s;
    if (s < window_.size()) {
      const double t0 = dt_;
      if (s > 0) window_ = rk4(window_, t0);  // positive prefix is regular
      const double mm = s == 0 ? m_ : kInfiniteM;
      double c_prev = 1.0;
      for (size_t j = s; j < window_.size(); ++j) {
        const int i = static_cast<int>(j - s) + 1;
        const double c = zero_start_c(i, t0, mm);
        window_[j] = (t0 / i) * (c / c_prev);
        c_prev = c;
      }
      t_ = t0;
    }
  }
}

std::vector<double> FluidSystem::derivative(const std::vector<double>& h) const {
  std::vector<double> f(h.size());
  if (model_ == FluidModel::Precode) {
    f[0] = is_inf(m_) ? 1.0 : 1.0 - h[0] / m_;
    for (size_t i = 1; i < h.size(); ++i) {
      f[i] = h[i - 1] > 0 ? 1.0 - h[i] / h[i - 1] : 0.0;
    }
  } else {
    f[0] = 1.0;
    for (size_t i = 1; i < h.size(); ++i) f[i] = h[i - 1] - h[i];
  }
  return f;
}

std::vector<double> FluidSystem::rk4(const std::vector<double>& h, double dt) const {
  const size_t n = h.size();
  const std::vector<double> k1 = derivative(h);
  std::vector<double> tmp(n);
  for (size_t i = 0; i < n; ++i) tmp[i] = h[i] + 0.5 * dt * k1[i];
  const std::vector<double> k2 = derivative(tmp);
  for (size_t i = 0; i < n; ++i) tmp[i] = h[i] + 0.5 * dt * k2[i];
  const std::vector<double> k3 = derivative(tmp);
  for (size_t i = 0; i < n; ++i) tmp[i] = h[i] + dt * k3[i];
  const std::vector<double> k4 = derivative(tmp);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = h[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

void FluidSystem::commit_crossing() {
  const double last = crossing_times_.empty() ? 0.0 : crossing_times_.back();
  crossing_times_.push_back(t_);
  round_durations_.push_back(t_ - last);
  window_.erase(window_.begin());
}

void FluidSystem::check_ratio_bound() {
  if (model_ != FluidModel::Proportional || !ratio_ok_) return;
  for (size_t i = 1; i < window_.size(); ++i) {
    if (window_[i] > 0.5 * window_[i - 1] + 1e-9) {
      ratio_ok_ = false;
      return;
    }
  }
}

void FluidSystem::record_sample() {
  sample_times_.push_back(t_);
  std::vector<double> row(static_cast<size_t>(n_nodes_));
  for (int i = 1; i <= n_nodes_; ++i) row[static_cast<size_t>(i - 1)] = h_absolute(i);
  samples_.push_back(std::move(row));
}

void FluidSystem::step(double dt_step) {
  if (window_.empty()) return;
  if (window_[0] >= 1.0) {
    window_[0] = 1.0;
    commit_crossing();
    return;
  }
  std::vector<double> y1 = rk4(window_, dt_step);
  if (y1[0] < 1.0) {
    window_ = std::move(y1);
    t_ += dt_step;
    ++steps_;
    check_ratio_bound();
    if (record_stride_ > 0 && steps_ % record_stride_ == 0) record_sample();
    return;
  }
  // The front node crosses 1 inside this step: bisect the partial step size.
  double lo = 0.0, hi = dt_step;
  for (int it = 0; it < 80 && (hi - lo) > 1e-16 * dt_step; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rk4(window_, mid)[0] >= 1.0 ? hi : lo) = mid;
  }
  std::vector<double> yc = rk4(window_, hi);
  if (std::abs(yc[0] - 1.0) > 1e-9)
    throw std::runtime_error("fluid integration step too coarse at a crossing");
  yc[0] = 1.0;
  window_ = std::move(yc);
  t_ += hi;
  check_ratio_bound();
  commit_crossing();
}

void FluidSystem::run_until(double t_end, int max_rounds) {
  while (!window_.empty() && t_ < t_end - 1e-12 && rounds_completed() < max_rounds) {
    step(std::min(dt_, t_end - t_));
  }
}

void FluidSystem::advance_to(double t) {
  while (!window_.empty() && t_ < t - 1e-12) step(std::min(dt_, t - t_));
}

double FluidSystem::h_absolute(int node) const {
  if (node < 1 || node > n_nodes_) throw std::out_of_range("node index out of range");
  const int decoded = rounds_completed();
  if (node <= decoded) return m_;
  const size_t idx = static_cast<size_t>(node - decoded - 1);
  if (idx >= window_.size()) throw std::out_of_range("node beyond simulated window");
  return window_[idx];
}

namespace {

FluidRun run_fluid(FluidModel model, double m, int n_nodes, double t_end, double dt,
                   std::span<const double> h0, int record_stride, int max_rounds) {
  if (n_nodes < 1) throw std::invalid_argument("need at least one node");
  std::vector<double> init(h0.begin(), h0.end());
  if (init.empty()) init.assign(static_cast<size_t>(n_nodes), 0.0);
  if (static_cast<int>(init.size()) != n_nodes)
    throw std::invalid_argument("initial profile size must match n_nodes");
  FluidSystem sys(model, m, std::move(init), dt);
  sys.enable_recording(record_stride);
  sys.run_until(t_end, max_rounds);
  FluidRun out;
  out.crossing_times = sys.crossing_times();
  out.round_durations = sys.round_durations();
  out.sample_times = sys.sample_times();
  out.samples = sys.samples();
  out.final_time = sys.time();
  out.ratio_bound_ok = sys.ratio_bound_ok();
  return out;
}

}  // namespace

FluidRun fluid_integrate(double m, int n_nodes, double t_end, double dt,
                         std::span<const double> h0, int record_stride, int max_rounds) {
  return run_fluid(FluidModel::Precode, m, n_nodes, t_end, dt, h0, record_stride, max_rounds);
}

FluidRun proportional_fluid_integrate(int n_nodes, double t_end, double dt,
                                      std::span<const double> h0, int record_stride,
                                      int max_rounds) {
  return run_fluid(FluidModel::Proportional, kInfiniteM, n_nodes, t_end, dt, h0, record_stride,
                   max_rounds);
}

double q_series_h(double m, std::span<const double> h0, int node, double t) {
  if (node < 1 || node > static_cast<int>(h0.size()))
    throw std::out_of_range("node index out of range");
  check_m(m, 1.0 + 1e-12);
  validate_profile(h0);

  // Q_i(0) = prod_{j<=i} h_j(0); Q_0(0) = 1.
  std::vector<double> q0(static_cast<size_t>(node) + 1);
  q0[0] = 1.0;
  for (int i = 1; i <= node; ++i) q0[static_cast<size_t>(i)] = q0[static_cast<size_t>(i - 1)] * h0[static_cast<size_t>(i - 1)];

  const auto q_at = [&](int i) {
    double acc = 0.0;
    double tpow = 1.0;  // t^j / j!
    for (int j = 0; j < i; ++j) {
      if (j > 0) tpow *= t / j;
      acc += q0[static_cast<size_t>(i - j)] * tpow;
    }
    // tail sum_{j>=i} t^j / (M^{j-i} j!)
    double term = tpow;  // t^{i-1}/(i-1)! for i>0, else 1
    if (i > 0) term *= t / i;
    for (int j = i;; ++j) {
      acc += term;
      if (is_inf(m)) break;
      term *= t / (m * (j + 1));
      if (term < 1e-18 * acc) {
        acc += term;
        break;
      }
    }
    return acc;
  };
  return q_at(node) / q_at(node - 1);
}

FixedPointProfile fixed_point_profile(double m, double t, int depth) {
  check_m(m, 1.0 + 1e-12);
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (t < 0) throw std::invalid_argument("T must be non-negative");
  const FixedPoint fp = solve_tf(m, 1e-14);
  if (t > fp.t_f + 1e-12)
    throw std::invalid_argument("no fixed point exists for T > T^F(M)");

  FixedPointProfile out;
  out.t = t;
  if (t >= fp.t_f - 1e-12) {
    out.h_inf = fp.h_inf;
  } else {
    // Larger root of -h ln h / (1 - h/M) = t; the profile tail approaches it
    // from above.
    const auto g = [&](double h) {
      const double denom = is_inf(m) ? 1.0 : 1.0 - h / m;
      return -h * std::log(h) / denom - t;
    };
    double lo = fp.h_inf, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) > 0 ? lo : hi) = mid;
    }
    out.h_inf = 0.5 * (lo + hi);
  }
  out.h1_star = out.h_inf * (std::exp(t / out.h_inf) - 1.0);

  out.h0.resize(static_cast<size_t>(depth));
  const auto h_at = [&](int idx) -> double {
    if (idx <= 0) return m;
    return out.h0[static_cast<size_t>(idx - 1)];
  };
  const double e_tn = is_inf(m) ? 1.0 : std::exp(t / m);
  for (int i = 1; i <= depth; ++i) {
    double sum = 0.0, term = 1.0;
    for (int j = 2; j <= 200; ++j) {
      const double hk = h_at(i - (j - 1));
      if (std::isinf(hk)) break;  // this and every later product vanish
      term *= (t / hk) / j;
      sum += term;
      if (term < 1e-15) break;
    }
    out.h0[static_cast<size_t>(i - 1)] = e_tn - t - t * sum;
  }
  return out;
}

OrderingCheck monotonicity_check(double m, std::span<const double> h0_a,
                                 std::span<const double> h0_b, double t_end, double dt,
                                 double tol) {
  if (h0_a.size() != h0_b.size()) throw std::invalid_argument("profiles differ in size");
  for (size_t i = 0; i < h0_a.size(); ++i)
    if (h0_a[i] < h0_b[i])
      throw std::invalid_argument("h0_a must dominate h0_b componentwise");

  FluidSystem a(FluidModel::Precode, m, {h0_a.begin(), h0_a.end()}, dt);
  FluidSystem b(FluidModel::Precode, m, {h0_b.begin(), h0_b.end()}, dt);
  const int n = static_cast<int>(h0_a.size());
  OrderingCheck out;
  const int64_t steps = static_cast<int64_t>(std::ceil(t_end / dt));
  for (int64_t s = 1; s <= steps; ++s) {
    const double t = std::min(t_end, static_cast<double>(s) * dt);
    a.advance_to(t);
    b.advance_to(t);
    for (int i = 1; i <= n; ++i) {
      const double ha = a.h_absolute(i);
      const double hb = b.h_absolute(i);
      if (ha < hb - tol) {
        out.ordered = false;
        out.node = i;
        out.t = t;
        out.gap = hb - ha;
        return out;
      }
    }
  }
  return out;
}

double discrete_vs_fluid(double m, double eps, int k, int n_nodes,
                         std::span<const double> t_grid, uint64_t seed) {
  if (is_inf(m)) throw std::invalid_argument("discrete comparison needs a finite precode");
  if (k < 1 || n_nodes < 1) throw std::invalid_argument("k and n_nodes must be positive");
  FileSpec spec;
  spec.k = k;
  spec.m = static_cast<int>(m);

  std::vector<DecodeState> nodes(static_cast<size_t>(n_nodes) + 1);
  Rng rng(seed, 7);
  FluidSystem fluid(FluidModel::Precode, m, std::vector<double>(static_cast<size_t>(n_nodes), 0.0),
                    1e-4);

  std::vector<double> grid(t_grid.begin(), t_grid.end());
  std::sort(grid.begin(), grid.end());

  int64_t slot = 0;
  double dev = 0.0;
  for (double t : grid) {
    const int64_t target = static_cast<int64_t>(std::llround(t * k / (1.0 - eps)));
    for (; slot < target; ++slot) {
      for (const AnalyticDelivery& d : analytic_mac_step(spec, nodes, eps, rng)) {
        DecodeState& ds = nodes[static_cast<size_t>(d.receiver)];
        ds.insert(d.id);
        try_decode(ds, spec);
      }
    }
    fluid.advance_to(t);
    for (int i = 1; i <= n_nodes; ++i) {
      const DecodeState& ds = nodes[static_cast<size_t>(i)];
      const double discrete =
          ds.decoded() ? 1.0 : std::min(1.0, static_cast<double>(ds.distinct()) / k);
      const double continuous = std::min(1.0, fluid.h_absolute(i));
      dev = std::max(dev, std::abs(discrete - continuous));
    }
  }
  return dev;
}

}  // namespace crlflood
