#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranslice/admm.hpp"
#include "ranslice/scenario.hpp"

namespace ranslice {

/// sum SNR - eta * sum power.
double utility_value(double sum_snr, double eta, double sum_power);

struct SlotUtility {
  double embb = 0.0;
  double urllc = 0.0;
};

/// Utilities of one minislot from its beamformers and the slot's channels.
SlotUtility slot_utility(const SlotResult& slot, const ChannelSample& gains, const ScenarioConfig& scenario);

struct MetricsRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string algorithm;
  std::uint64_t seed = 0;
  double w_u_mhz = 0.0;        // mean URLLC staffing bandwidth over solved slots
  double e_u_w = 0.0;          // total URLLC transmit power summed over the slot
  double utility = 0.0;        // long-term total slice utility
  double utility_embb = 0.0;   // time average
  double utility_urllc = 0.0;  // time average
  int infeasible_slots = 0;
  int dbo_iterations = 0;
  bool dbo_converged = false;

  static std::string csv_header();
  std::string csv() const;
};

/// Long-term metrics of a solution with exactly T slots. Throws if slots are missing.
MetricsRow long_term_metrics(const SliceSolution& solution, const ScenarioConfig& scenario);

/// Inputs of one experiment cell derived from a replication seed.
struct CellInputs {
  Topology topology;
  SampleSet samples;  // M samples for the bandwidth stage
  SampleSet traces;   // T minislot draws
};
CellInputs make_cell_inputs(const ScenarioConfig& scenario, std::uint64_t seed);

/// Applies a sweep value: "lambda" (per-UE arrival rate, batch size kept), "rho", "eta".
ScenarioConfig apply_sweep_value(const ScenarioConfig& base, const std::string& var, double value);

struct ExperimentSpec {
  ScenarioConfig base;
  std::string sweep_var = "lambda";
  std::vector<double> values;
  std::vector<std::string> algorithms{"b2o_admm", "no_admm"};
  std::vector<std::uint64_t> seeds{1};
  PipelineOptions pipeline;
  int threads = 0;  // parallel cells

  void validate() const;
};

/// One row per (value, seed, algorithm), in that nesting order. Failures carry the cell.
std::vector<MetricsRow> run_sweep(const ExperimentSpec& spec);

/// Runs one algorithm on one cell.
SliceSolution run_algorithm(const std::string& algorithm, const ScenarioConfig& scenario, const CellInputs& inputs,
                            const PipelineOptions& options);

struct TrendPoint {
  double value = 0.0;
  double mean = 0.0;
  double halfwidth = 0.0;  // 95% over replications
  int count = 0;
};

/// Mean and half-width of `field` per sweep value for one algorithm.
std::vector<TrendPoint> aggregate(const std::vector<MetricsRow>& rows, const std::string& algorithm,
                                  double MetricsRow::*field);

struct TrendCheck {
  bool pass = false;
  int flagged_steps = 0;  // wrong-direction steps inside the replication CI
  int violations = 0;     // wrong-direction steps outside it
  std::string detail;
};

/// direction +1: nondecreasing, -1: nonincreasing. Passes with no violations and at most
/// one flagged step.
TrendCheck check_trend(const std::vector<TrendPoint>& points, int direction);

/// Budget audit of one row: W_u <= W and E^u <= T sum E_j.
bool row_within_budget(const MetricsRow& row, const ScenarioConfig& scenario);

void write_csv(const std::vector<MetricsRow>& rows, const std::string& path);
std::string manifest_json(const ExperimentSpec& spec);

}  // namespace ranslice
