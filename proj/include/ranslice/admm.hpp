#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/admm_state.hpp"
#include "ranslice/builders.hpp"
#include "ranslice/scenario.hpp"
#include "ranslice/solver.hpp"

namespace ranslice {

/// omega_s = (1/M) sum_m (omega_sm + psi_sm / mu). Throws for mu <= 0 or ragged input.
std::vector<double> global_update(const std::vector<std::vector<double>>& local,
                                  const std::vector<std::vector<double>>& duals, double mu);

/// psi + mu (local - global).
double dual_update(double local, double global, double psi_old, double mu);

struct ProgressRow {
  int iteration = 0;
  double delta_omega = 0.0;      // MHz
  double consensus_gap = 0.0;    // max |omega_sm - omega_s|, MHz
  std::vector<double> omega;     // MHz
  std::vector<double> sample_objectives;

  std::string csv() const;
  static std::string csv_header();
};

struct DboOptions {
  int max_iter = 250;
  double threshold_mhz = 1e-4;
  double consensus_factor = 10.0;
  double penalty = 1.0;  // initial mu
  /// Residual balancing: mu is multiplied (divided) by penalty_factor when the primal
  /// residual exceeds (falls below) the dual residual by balance_ratio, within
  /// [penalty * penalty_range, penalty / penalty_range].
  bool adaptive_penalty = true;
  double balance_ratio = 10.0;
  double penalty_factor = 2.0;
  double penalty_range = 1e-6;
  /// Divisor applied to sample utilities; <= 0 selects default_utility_scale.
  double utility_scale = 0.0;
  int threads = 0;
  SolverSettings solver;
  std::function<void(const ProgressRow&)> progress;
  std::string checkpoint_path;      // written after every iteration when set
  const AdmmState* resume = nullptr;
};

struct AdmmReport {
  std::vector<double> residuals;  // delta omega per iteration (MHz)
  std::vector<double> consensus_gaps;
  std::vector<double> penalties;  // mu after each iteration
  std::vector<std::vector<double>> objective_history;  // [k][m]
  std::vector<double> per_sample_objectives;           // last iteration
  std::vector<std::vector<double>> local_omegas;       // last iteration, [s][m] MHz
  int iterations_used = 0;
  bool converged = false;
};

struct DboResult {
  std::vector<double> omega_hz;
  AdmmReport report;
  AdmmState state;
};

/// Thrown when a sample subproblem cannot be solved; carries the sample index.
class SubproblemError : public std::runtime_error {
 public:
  SubproblemError(int sample, SolveStatus status, const std::string& what)
      : std::runtime_error(what), sample_(sample), status_(status) {}
  int sample() const { return sample_; }
  SolveStatus status() const { return status_; }

 private:
  int sample_;
  SolveStatus status_;
};

/// Default ADMM utility scale: the weighted energy price of the full power budget,
/// eta max(1, rho) sum E, over 4M. The 1/M keeps the per-iteration drift of the local
/// bandwidths independent of the sample count.
double default_utility_scale(const ScenarioConfig& scenario, int samples);

DboResult run_dbo(const ScenarioConfig& scenario, const SampleSet& samples, const DboOptions& options = {});

struct SlotResult {
  bool feasible = false;
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<CVector> embb_beams;               // [s]
  std::vector<std::vector<CVector>> urllc_beams; // [s][i]
  std::vector<double> rank_gaps;                 // every lifted matrix, in block order
  bool used_randomization = false;
  double utility_embb = 0.0;
  double utility_urllc = 0.0;
  std::vector<std::vector<double>> channel_uses;  // [s][i] at the extracted beamformers
  double urllc_bandwidth_hz = 0.0;                // staffing bound at those channel uses
  double max_violation = 0.0;
  std::string message;  // why a slot was flagged
};

struct SliceSolution {
  std::string algorithm;
  std::vector<double> omega_hz;
  std::vector<SlotResult> slots;
  AdmmReport dbo;
};

struct PipelineOptions {
  DboOptions dbo;
  double rank_gap_tolerance = 1e-6;
  int slot_threads = 0;
  std::uint64_t randomization_seed = 7;
};

/// DBO over `samples`, then per-minislot beamforming on each trace entry.
SliceSolution run_b2o(const ScenarioConfig& scenario, const SampleSet& samples, const SampleSet& minislot_traces,
                      const PipelineOptions& options = {});

/// Bandwidth fixed from a single-sample solve on the first minislot's gains.
SliceSolution run_no_admm(const ScenarioConfig& scenario, const SampleSet& minislot_traces,
                          const PipelineOptions& options = {});

/// Minislot loop at fixed eMBB bandwidths (shared by both pipelines).
std::vector<SlotResult> run_minislots(const ScenarioConfig& scenario, const std::vector<double>& omega_hz,
                                      const SampleSet& minislot_traces, const PipelineOptions& options);

}  // namespace ranslice
