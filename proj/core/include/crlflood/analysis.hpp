#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace crlflood {

inline constexpr double kInfiniteM = std::numeric_limits<double>::infinity();

/// T^F(M) = h^F_inf(M): the unique x in (0,1] with -ln x = 1 - x/M, found by
/// bisection to |residual| <= tol. The per-hop delivery time of the fluid
/// system at its extremal fixed point; 1/e for the rateless limit.
struct FixedPoint {
  double t_f = 0;
  double h_inf = 0;
};
FixedPoint solve_tf(double m, double tol = 1e-12);

/// Closed-form high-probability bound on the normalized n-hop delay
/// (1-eps)T_n/k:  M ln(M/(M-1)) + (n-1) M ln((2M-1)/(2M-2)).
double theorem1_bound(int hops, double m);

/// Asymptotic one-hop delay M ln(M/(M-1)) / (1-eps).
double one_hop_asymptote(double m, double eps);

/// h*_i(M) = 1/((i+1) - i/M), with h*_0(M) = M. The ratios r*_i =
/// h*_i/h*_{i-1} satisfy r*_i = 1/(2 - r*_{i-1}).
double h_star(int i, double m);

/// Ratio view of a buffer profile: r_i = h_i/h_{i-1} (r_1 = h_1/M),
/// R_i = 1/(2-r_i), alpha_i = (2-r_i)/h_i, and the regularly-ordered test
/// (h positive decreasing, h_1 <= 1, r_i >= R_{i-1} for i >= 2).
struct RatioState {
  std::vector<double> r;
  std::vector<double> big_r;
  std::vector<double> alpha;
  bool regularly_ordered = false;
};
RatioState ratio_state(std::span<const double> h, double m);

enum class FluidModel : uint8_t {
  Precode,       // h_i' = 1 - h_i/h_{i-1}, front node fed by a full source
  Proportional,  // h_1' = 1, h_i' = h_{i-1} - h_i
};

/// Piecewise fluid system with renewal rounds. Fixed-step RK4 between
/// crossings; when the front buffer reaches 1 the crossing time is refined
/// within the step, the node snaps to M (decoded) and indices shift by one.
class FluidSystem {
 public:
  /// h0 holds the initial fractions of nodes 1..n, non-increasing, in [0,1).
  /// An all-zero tail is started from the exact series solution one step in
  /// (the ODE ratio is singular at 0/0).
  FluidSystem(FluidModel model, double m, std::vector<double> h0, double dt);

  /// Integrates until t_end, max_rounds crossings, or window exhaustion,
  /// whichever comes first.
  void run_until(double t_end, int max_rounds = std::numeric_limits<int>::max());

  /// Advances to exactly t (for lockstep comparisons).
  void advance_to(double t);

  double time() const { return t_; }
  int rounds_completed() const { return static_cast<int>(round_durations_.size()); }
  bool exhausted() const { return window_.empty(); }

  /// Fullness of absolute node i (1-based); M once decoded.
  double h_absolute(int node) const;
  int node_count() const { return n_nodes_; }

  const std::vector<double>& crossing_times() const { return crossing_times_; }
  const std::vector<double>& round_durations() const { return round_durations_; }

  void enable_recording(int stride) { record_stride_ = stride; }
  const std::vector<double>& sample_times() const { return sample_times_; }
  const std::vector<std::vector<double>>& samples() const { return samples_; }

  /// Proportional-model invariant r_i <= 1/2 (division-free form
  /// h_i <= h_{i-1}/2 + tol), checked at every committed step.
  bool ratio_bound_ok() const { return ratio_ok_; }

 private:
  std::vector<double> derivative(const std::vector<double>& h) const;
  std::vector<double> rk4(const std::vector<double>& h, double dt) const;
  void commit_crossing();
  void step(double dt);
  void record_sample();
  void check_ratio_bound();

  FluidModel model_;
  double m_;
  double dt_;
  int n_nodes_;
  double t_ = 0;
  std::vector<double> window_;  // window_[0] is the next node to decode
  std::vector<double> crossing_times_;
  std::vector<double> round_durations_;
  int record_stride_ = 0;
  int64_t steps_ = 0;
  std::vector<double> sample_times_;
  std::vector<std::vector<double>> samples_;
  bool ratio_ok_ = true;
};

struct FluidRun {
  std::vector<double> crossing_times;
  std::vector<double> round_durations;
  std::vector<double> sample_times;
  std::vector<std::vector<double>> samples;  // per sample: h_1..h_n, decoded = M
  double final_time = 0;
  bool ratio_bound_ok = true;
};

FluidRun fluid_integrate(double m, int n_nodes, double t_end, double dt,
                         std::span<const double> h0 = {}, int record_stride = 1,
                         int max_rounds = std::numeric_limits<int>::max());

FluidRun proportional_fluid_integrate(int n_nodes, double t_end, double dt,
                                      std::span<const double> h0 = {}, int record_stride = 1,
                                      int max_rounds = std::numeric_limits<int>::max());

/// Exact round-1 solution h_i(t) = Q_i(t)/Q_{i-1}(t), valid for t <= T_1,
/// where Q_0 = e^{t/M} and Q_i' = Q_{i-1}. Independent algebraic route used
/// to cross-check the integrator.
double q_series_h(double m, std::span<const double> h0, int node, double t);

/// Fixed-point profile for a given round length T <= T^F(M): the recursion
///   h_i(0) = e^{T/M} - T - T sum_{j>=2} (1/j!) prod_{k=1}^{j-1} T/h_{i-k}(0)
/// with h_i(0) = M for i <= 0. h_inf solves h = e^{-T(1/h - 1/M)} on the
/// branch the profile tail approaches; h1_star is the closed form
/// h_inf (e^{T/h_inf} - 1), which equals (e-1) h_inf at T = T^F.
struct FixedPointProfile {
  double t = 0;
  double h_inf = 0;
  double h1_star = 0;
  std::vector<double> h0;
};
FixedPointProfile fixed_point_profile(double m, double t, int depth = 64);

/// Componentwise ordering of two trajectories with ordered initial
/// conditions (h0_a >= h0_b), checked on every dt-grid point up to t_end.
struct OrderingCheck {
  bool ordered = true;
  int node = -1;
  double t = 0;
  double gap = 0;

  explicit operator bool() const { return ordered; }
};
OrderingCheck monotonicity_check(double m, std::span<const double> h0_a,
                                 std::span<const double> h0_b, double t_end, double dt,
                                 double tol = 1e-9);

/// Runs the analytic-MAC line chain at file size k, rescales slots by
/// (1-eps)/k and returns the sup deviation between the discrete buffer
/// fractions and the fluid trajectory over the grid, for nodes 1..n_nodes.
/// Fractions are clamped at the decode threshold (both sides saturate to 1)
/// so the comparison measures trajectory agreement, not the O(1/sqrt(k))
/// jitter of the decode instant itself.
double discrete_vs_fluid(double m, double eps, int k, int n_nodes,
                         std::span<const double> t_grid, uint64_t seed = 1);

}  // namespace crlflood
