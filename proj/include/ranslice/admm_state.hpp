#pragma once

#include <string>
#include <vector>

namespace ranslice {

/// Consensus state. Bandwidths are held in MHz, the unit used inside the cone
/// programs; duals are per MHz accordingly.
struct AdmmState {
  std::vector<double> omega_global;       // [s], MHz
  std::vector<std::vector<double>> duals;  // [s][m]
  double penalty = 1.0;                    // mu
  /// Utilities enter the subproblem divided by this constant, so the penalty acts on
  /// normalized utility units (equivalent to a raw-unit penalty of mu * utility_scale).
  double utility_scale = 1.0;
  int iteration = 0;
  int sample_count = 0;  // M; kept separately so it survives an empty dual array

  static AdmmState initial(int embb_slices, int samples, double total_bandwidth_mhz, double penalty = 1.0);
  int slices() const { return static_cast<int>(omega_global.size()); }
  int samples() const { return sample_count; }
  double omega_hz(int s) const { return omega_global.at(s) * 1e6; }

  std::string to_json() const;
  static AdmmState from_json(const std::string& text);
};

}  // namespace ranslice
