#pragma once

#include <utility>
#include <vector>

#include "ranslice/scenario.hpp"

namespace ranslice {

/// r[slice][ue] in channel uses (real valued).
using ChannelUseVector = std::vector<std::vector<double>>;

struct StaffingResult {
  double mean_term_hz = 0.0;      // A
  double variance_term_hz2 = 0.0; // B
  double safety_coeff = 0.0;      // c
  double total_bandwidth_hz = 0.0;
};

/// Inverse of the standard normal tail Q. Throws for p outside (0,1).
double q_inverse(double p);

double awgn_capacity(double snr);          // log2(1+snr), bits per channel use
double channel_dispersion(double snr);     // ln^2(2) (1 - (1+snr)^-2)

/// Normal-approximation information bits after r channel uses.
double finite_blocklength_bits(double r, double beta, double snr);

/// Closed-form upper bound on the channel uses needed for L bits.
double channel_use_bound(double packet_bits, double beta, double snr);

/// Excess bits finite_blocklength_bits(channel_use_bound(L)) - L predicted by the
/// bound's unit dispersion: Q^-1(beta) sqrt(r) (1 - sqrt(V)).
double dispersion_slack_bits(double packet_bits, double beta, double snr);

/// r / (kappa D) in Hz; D in ms, kappa per ms per Hz.
double per_ue_bandwidth(double r, double deadline_ms, double kappa);

/// (omega/q, q d). Throws if q < 1, q d > deadline, or lambda d >= 1.
std::pair<double, double> recut_prbs(double omega, double d, int q, double deadline_ms,
                                     double arrival_rate = 0.0);

/// Safety coefficient of the staffing rule. Throws when varsigma <= alpha.
double staffing_coefficient(double varsigma, double alpha,
                            const std::vector<UrllcSliceSpec>& slices,
                            const std::vector<TrafficSpec>& traffic);

StaffingResult urllc_total_bandwidth(const ChannelUseVector& r,
                                     const std::vector<TrafficSpec>& traffic,
                                     const std::vector<double>& deadlines_ms, double kappa,
                                     double c);

/// Convenience: staffing for a scenario at the given channel uses.
StaffingResult scenario_staffing(const ScenarioConfig& cfg, const ChannelUseVector& r);

}  // namespace ranslice
