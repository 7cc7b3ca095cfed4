#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranslice/scenario.hpp"
#include "ranslice/urllc.hpp"

namespace ranslice {

enum class BatchMode { poisson, batched };

/// One arrival class (one URLLC UE in the staffing mapping).
struct QueueClass {
  TrafficSpec arrival;
  double service_mean_ms = 1.0;  // exponential service, mean d
  double deadline_ms = 1.0;      // blocking threshold on the waiting time
};

struct QueueConfig {
  int server_count = 1;
  std::vector<QueueClass> classes;
  BatchMode batch_mode = BatchMode::poisson;

  double offered_load() const;  // sum of lambda * d, in Erlangs
};

struct QueueStats {
  double queueing_prob = 0.0;   // P_Q: arrivals that found every server busy
  double blocking_prob = 0.0;   // p_b: arrivals whose wait exceeded the deadline
  double pq_halfwidth = 0.0;    // 95% batch-means half-widths
  double pb_halfwidth = 0.0;
  double mean_wait_ms = 0.0;
  long long samples_observed = 0;
  bool enough_samples = false;  // at least 1e4 post-warm-up arrivals
};

/// Exact probability of waiting in M/M/N with offered load a. Throws if a >= N.
double erlang_c(double offered_load, int servers);

/// P(wait > t) in M/M/N with service mean d: C(N,a) exp(-(N/d - lambda) t).
double erlang_c_wait_tail(double offered_load, int servers, double service_mean, double t);

/// FIFO multi-server queue with exponential service. The first 10% of the horizon is
/// warm-up; arrivals recorded before the horizon are drained after it.
QueueStats simulate_queue(const QueueConfig& config, double horizon_ms, std::uint64_t seed);

struct StaffingCheckOptions {
  double horizon_ms = 2e5;
  BatchMode batch_mode = BatchMode::poisson;
  bool run_recut_check = true;
};

struct RecutPoint {
  int servers = 0;              // before the recut
  double offered_load = 0.0;    // before the recut, in Erlangs
  QueueStats original;          // (omega, d)
  QueueStats recut;             // (omega/2, 2d) on twice the servers
  bool recut_not_worse = false;
};

struct StaffingReport {
  StaffingResult staffing;
  StaffingResult stripped;      // c = 0
  double omega_bar_hz = 0.0;    // load-weighted mean block width
  double offered_load = 0.0;
  int servers = 0;
  int stripped_servers = 0;
  double erlang_c_pq = 0.0;     // analytic P_Q for the homogeneous equivalent (1 if unstable)
  QueueStats measured;
  QueueStats measured_stripped;
  double alpha = 0.0;
  double varsigma = 0.0;
  bool staffed_pass = false;    // p_b upper CI <= alpha and P_Q <= varsigma
  bool stripped_exceeds = false;  // p_b lower CI > alpha
  bool has_recut = false;
  RecutPoint recut;

  std::string text() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Staffs the scenario's URLLC traffic at channel uses r, maps the bandwidth to servers
/// and measures blocking with and without the safety margin.
StaffingReport validate_staffing(const ScenarioConfig& scenario, const ChannelUseVector& r,
                                 std::uint64_t seed, const StaffingCheckOptions& opts = {});

/// Original system: N servers with service means d_k; recut: 2N servers with 2 d_k.
/// The classes' deadlines must admit the doubled block length.
RecutPoint recut_comparison(const std::vector<QueueClass>& classes, int servers, double horizon_ms,
                            std::uint64_t seed, BatchMode mode = BatchMode::poisson);

struct RecutSweep {
  std::vector<RecutPoint> points;
  int crossover_servers = -1;  // smallest N from which the recut never did worse; -1 if none
};

/// Sweeps server counts N with N single-UE classes, each at lambda d = utilization, and
/// service mean deadline/2.
RecutSweep recut_crossover_sweep(const std::vector<int>& server_counts, double utilization,
                                 double deadline_ms, double horizon_ms, std::uint64_t seed);

}  // namespace ranslice
