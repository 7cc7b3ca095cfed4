#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ranslice {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Units used throughout: 1 time unit = 1 ms. Arrival rates are packets/ms,
// deadlines are ms, the channel-use density kappa is channel uses per ms per Hz.
// Bandwidth is Hz at the API boundary; the cone programs work in MHz.

/// Multicast eMBB slice request: UE count and per-UE rate requirement.
struct EmbbSliceSpec {
  int ue_count = 1;
  double rate_threshold_mbps = 1.0;
};

/// Unicast URLLC slice request.
struct UrllcSliceSpec {
  int ue_count = 1;
  double deadline_ms = 1.0;
  double blocking_prob = 1e-5;     // alpha
  double decode_err_prob = 2e-8;   // beta
  double packet_bits = 160.0;      // L
};

/// Compound-Poisson arrivals for every UE of one URLLC slice.
struct TrafficSpec {
  double mean_batch_interval_ms = 10.0;  // lambda_a
  double mean_batch_size = 1.0;          // lambda_b

  double arrival_rate() const { return mean_batch_size / mean_batch_interval_ms; }
  static TrafficSpec with_rate(double rate_per_ms, double batch_size = 1.0);
};

struct ScenarioConfig {
  int rrh_count = 3;
  int antennas_per_rrh = 2;
  double circle_radius_km = 0.5;
  std::vector<EmbbSliceSpec> embb_slices;
  std::vector<UrllcSliceSpec> urllc_slices;
  std::vector<TrafficSpec> traffic;  // one entry per URLLC slice
  double total_bandwidth_hz = 4e6;
  std::vector<double> power_caps_w;  // one entry per RRH
  double noise_power_w = 1e-14;
  double snr_loss = 1.5;             // phi
  double channel_use_density = 5.12e-4;
  double energy_coeff = 1000.0;      // eta
  double slice_priority = 500.0;     // rho-hat
  int sample_count = 100;            // M
  int minislots_per_slot = 60;       // T
  double queueing_prob_cap = 2e-5;   // varsigma
  std::uint64_t rng_seed = 1;

  // Propagation details not carried by the slice model.
  double antenna_gain_db = 5.0;
  double shadowing_std_db = 10.0;
  double min_distance_km = 0.01;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  int dim() const { return rrh_count * antennas_per_rrh; }
  int embb_ue_count() const;
  int urllc_ue_count() const;
  double total_bandwidth_mhz() const { return total_bandwidth_hz * 1e-6; }
  /// Largest per-slice blocking target; used as the alpha of the staffing rule.
  double staffing_alpha() const;
};

/// Full-size configuration: 3 RRHs, 3 eMBB and 2 URLLC slices, M = 100, T = 60.
ScenarioConfig full_scenario();
/// Downsized default: J=2, K=2, one eMBB slice with 2 UEs, one URLLC slice with 2 UEs, M=20, T=10.
ScenarioConfig acceptance_scenario();

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance_km(const Point& a, const Point& b);

struct Topology {
  std::vector<Point> rrh_positions;
  std::vector<std::vector<Point>> embb_ues;   // [slice][ue]
  std::vector<std::vector<Point>> urllc_ues;  // [slice][ue]
};

/// Stacked channel vectors h = [h_1; ...; h_J] (length J*K) for every UE.
struct ChannelSample {
  int index = 0;
  std::vector<std::vector<CVector>> embb;   // [slice][ue]
  std::vector<std::vector<CVector>> urllc;  // [slice][ue]
};

using SampleSet = std::vector<ChannelSample>;

/// RRHs equally spaced on the circle starting at angle 0; UEs uniform in the disk.
Topology place_topology(const ScenarioConfig& config, std::uint64_t seed);

/// 128.1 + 37.6 log10(d), d in km. Throws std::domain_error for d <= 0.
double path_loss_db(double distance_km);

/// Draws `count` i.i.d. channel samples (count < 0 means config.sample_count).
/// Each entry combines path loss, antenna gain, log-normal shadowing and
/// unit-variance circularly-symmetric Gaussian small-scale fading.
SampleSet draw_sample_set(const ScenarioConfig& config, const Topology& topology,
                          std::uint64_t seed, int count = -1);

/// |h^H w|^2 / (phi * noise). Throws std::invalid_argument on length mismatch.
double snr(const CVector& h, const CVector& w, double noise_power, double snr_loss = 1.0);

/// Shannon rate omega * log2(1 + snr).
double embb_rate(double bandwidth_hz, double snr);

/// h h^H / noise: the normalized gain matrix used by the lifted programs.
CMatrix gain_matrix(const CVector& h, double noise_power);

/// Independent generator for (seed, stream); streams never overlap in practice.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& config, const std::string& path);
/// Hex digest of the serialized config, used in run manifests.
std::string scenario_hash(const ScenarioConfig& config);
std::string scenario_to_yaml(const ScenarioConfig& config);
ScenarioConfig scenario_from_yaml(const std::string& text);

}  // namespace ranslice
