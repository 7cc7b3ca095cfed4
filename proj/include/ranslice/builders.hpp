#pragma once

#include <vector>

#include "ranslice/admm_state.hpp"
#include "ranslice/cone_program.hpp"
#include "ranslice/scenario.hpp"

namespace ranslice {

/// Variable indices of an assembled program. Entries are -1 where a variable
/// does not exist in that program (for example omega in the minislot problem).
struct ProgramLayout {
  std::vector<int> omega;                     // [s] eMBB bandwidth, MHz
  std::vector<int> v_block;                   // [s]
  std::vector<std::vector<int>> theta;        // [s][i]
  std::vector<std::vector<int>> lambar;       // [s][i] spectral efficiency slack
  std::vector<std::vector<int>> g_block;      // [s][i]
  std::vector<std::vector<int>> tau;          // [s][i]
  std::vector<std::vector<int>> f;            // [s][i] channel-use slack, in units of f_unit[s]
  std::vector<double> f_unit;                 // [s] channel uses per unit of f (the packet size)
  std::vector<std::vector<int>> d;            // [s][i]
  std::vector<std::vector<int>> x;            // [s][i]
  std::vector<double> omega_fixed_mhz;        // minislot problem only
  double objective_constant = 0.0;            // already folded into the objective
  double objective_scale = 1.0;               // minislot objective = -(U^e + rho U^u) / scale
};

struct BuiltProgram {
  ConeProgram program;
  ProgramLayout layout;
};

/// Per-sample augmented-Lagrangian subproblem. `sample_slot` selects the dual column;
/// the utility terms are weighted by 1/M with M = admm.samples().
BuiltProgram build_subproblem(const ChannelSample& sample, int sample_slot, const AdmmState& admm,
                              const ScenarioConfig& scenario);

/// Per-minislot beamforming problem at fixed eMBB bandwidths (Hz).
BuiltProgram build_minislot_problem(const ChannelSample& gains, const std::vector<double>& omega_fixed_hz,
                                    const ScenarioConfig& scenario);

/// Bandwidth-cone coefficients in MHz per channel use: mean weights a and spread weights b.
struct BandwidthCoefficients {
  std::vector<std::vector<double>> a;  // lambda / kappa
  std::vector<std::vector<double>> b;  // c sqrt(lambda / D) / kappa
  double c = 0.0;
};
BandwidthCoefficients bandwidth_coefficients(const ScenarioConfig& scenario);

/// Upper bound on |U^e + rho U^u| for one sample: total power times the larger of the
/// summed noise-normalized channel gains and the weighted energy price. Used to
/// normalize objectives.
double utility_bound(const ChannelSample& sample, const ScenarioConfig& scenario);

/// Log-sum-exp constant Y = Q^-1(beta)^2 used by the channel-use chain.
double channel_use_constant(double beta);

}  // namespace ranslice
