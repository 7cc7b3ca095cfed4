#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ranslice/admm_state.hpp"
#include "ranslice/cone_program.hpp"
#include "ranslice/scenario.hpp"

namespace ranslice {

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

const char* status_name(SolveStatus s);

struct SolverSettings {
  int max_iter = 200;
  double time_limit_s = 0.0;  // 0 = none
  double tol_gap_abs = 1e-8;
  double tol_gap_rel = 1e-8;
  double tol_feas = 1e-8;
  // Clarabel tuning; values <= 0 keep the solver defaults.
  double equilibrate_max_scale = 10.0;  // wide ranges let residuals hide in PSD rows
  double static_reg_constant = 0.0;
  double max_step_fraction = 0.0;
  /// Post-solve audit: an "optimal" answer whose scaled violation exceeds this is
  /// downgraded to numerical_failure.
  double audit_tol = 1e-6;
  int retries = 4;  // re-solves after a numerical failure: regularization, shorter steps, looser gaps
  bool verbose = false;
};

struct SolverSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  double objective = 0.0;
  Eigen::VectorXd x;                   // every program variable
  std::vector<CMatrix> matrix_values;  // one per Hermitian block
  int iterations = 0;
  double solve_time_s = 0.0;
  double max_violation = 0.0;
  std::string message;

  bool ok() const { return status == SolveStatus::optimal; }
  double value(int index) const { return x(index); }
};

/// Backend contract: receive a program, return a solution. Implementations must be
/// safe to call concurrently on distinct programs.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual SolverSolution solve(const ConeProgram& program, const SolverSettings& settings) const = 0;
};

/// Reference backend: the Clarabel interior-point solver.
class ClarabelBackend final : public ConicBackend {
 public:
  std::string name() const override { return "clarabel"; }
  SolverSolution solve(const ConeProgram& program, const SolverSettings& settings) const override;
};

std::shared_ptr<const ConicBackend> default_backend();

/// Solves and audits: fills matrix_values and max_violation, downgrading an optimal
/// answer that fails the audit.
SolverSolution solve(const ConeProgram& program, const SolverSettings& settings = {},
                     const ConicBackend& backend = *default_backend());

/// Grid-search oracle for J = K = 1 scenarios with at most two UEs and one eMBB slice.
/// Evaluates the per-sample ADMM subproblem in its original (unlifted) form: powers on
/// each beamformer and the eMBB bandwidth are gridded (200 points per axis, then one
/// four zoom passes around the best point). Throws std::runtime_error when no grid point
/// is feasible.
struct BruteForceResult {
  double objective = 0.0;
  std::vector<double> embb_power;   // [s]
  std::vector<double> urllc_power;  // flattened URLLC UEs
  std::vector<double> omega_mhz;    // [s]
  long long evaluations = 0;
};
BruteForceResult brute_force_solve(const ScenarioConfig& scenario, const ChannelSample& sample,
                                   const AdmmState& admm, int sample_slot = 0, int grid = 200);

/// lambda_2 / lambda_1 of a Hermitian PSD matrix; 0 when lambda_1 <= zero_tol.
/// Throws std::invalid_argument for non-Hermitian input.
double rank1_gap(const CMatrix& v, double zero_tol = 1e-12);

enum class ExtractionMethod { principal_eig, randomization };

struct Rank1Request {
  std::vector<double> power_caps;  // per RRH
  int antennas_per_rrh = 1;
  CMatrix score;                   // maximize w^H score w over draws; empty -> use V
  std::vector<CMatrix> snr_lhs;    // each draw must satisfy w^H H_k w >= t_k
  std::vector<double> snr_rhs;
  int draws = 100;
  std::uint64_t seed = 7;
};

struct Rank1Report {
  double gap = 0.0;
  ExtractionMethod method = ExtractionMethod::principal_eig;
  CVector vector;
  bool feasible = true;
};

/// Principal-eigenvector recovery when the gap is within tolerance, Gaussian
/// randomization otherwise. Throws std::runtime_error if no randomized draw is feasible.
Rank1Report extract_rank1(const CMatrix& v, double gap_tolerance, const Rank1Request& request);
/// Principal-eigenvector path only (no feasibility data needed).
CVector principal_beamformer(const CMatrix& v);

/// One extracted beam for the joint power step: fixed direction, per-beam score and SNR floors.
struct BeamRequirement {
  CVector direction;
  CMatrix score;
  std::vector<CMatrix> snr_lhs;
  std::vector<double> snr_rhs;
};

/// Rescales fixed directions w_b to sqrt(p_b) w_b with p_b >= 0 chosen by the LP
/// max sum_b p_b w_b^H score_b w_b over per-RRH caps and every SNR floor. Caps are shrunk
/// and floors raised by `margin` (relative). Throws std::runtime_error if the LP is infeasible.
std::vector<CVector> power_control(const std::vector<BeamRequirement>& beams, const std::vector<double>& power_caps,
                                   int antennas_per_rrh, double margin = 1e-7, const SolverSettings& settings = {});

}  // namespace ranslice
