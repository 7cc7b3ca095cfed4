#include "ranslice/admm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ranslice/metrics.hpp"
#include "ranslice/parallel.hpp"
#include "ranslice/urllc.hpp"

namespace ranslice {

AdmmState AdmmState::initial(int embb_slices, int samples, double total_bandwidth_mhz, double penalty) {
  if (!(penalty > 0.0)) throw std::invalid_argument("AdmmState: penalty must be positive");
  AdmmState st;
  if (samples < 1) throw std::invalid_argument("AdmmState: need at least one sample");
  st.penalty = penalty;
  st.sample_count = samples;
  const double share = embb_slices > 0 ? 0.5 * total_bandwidth_mhz / embb_slices : 0.0;
  st.omega_global.assign(embb_slices, share);
  st.duals.assign(embb_slices, std::vector<double>(samples, 0.0));
  return st;
}

std::string AdmmState::to_json() const {
  nlohmann::json j;
  j["omega_global_mhz"] = omega_global;
  j["duals"] = duals;
  j["penalty"] = penalty;
  j["iteration"] = iteration;
  j["utility_scale"] = utility_scale;
  j["samples"] = sample_count;
  return j.dump(2);
}

AdmmState AdmmState::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  AdmmState st;
  st.omega_global = j.at("omega_global_mhz").get<std::vector<double>>();
  st.duals = j.at("duals").get<std::vector<std::vector<double>>>();
  st.penalty = j.at("penalty").get<double>();
  st.iteration = j.at("iteration").get<int>();
  st.utility_scale = j.value("utility_scale", 1.0);
  st.sample_count = j.value("samples", st.duals.empty() ? 0 : static_cast<int>(st.duals.front().size()));
  for (const auto& row : st.duals)
    if (static_cast<int>(row.size()) != st.sample_count) throw std::invalid_argument("AdmmState: ragged dual array");
  return st;
}

std::vector<double> global_update(const std::vector<std::vector<double>>& local,
                                  const std::vector<std::vector<double>>& duals, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("global_update: penalty must be positive");
  if (local.size() != duals.size()) throw std::invalid_argument("global_update: shape mismatch");
  std::vector<double> out(local.size(), 0.0);
  for (std::size_t s = 0; s < local.size(); ++s) {
    if (local[s].size() != duals[s].size() || local[s].empty())
      throw std::invalid_argument("global_update: shape mismatch");
    for (std::size_t m = 0; m < local[s].size(); ++m) out[s] += local[s][m] + duals[s][m] / mu;
    out[s] /= static_cast<double>(local[s].size());
  }
  return out;
}

double dual_update(double local, double global, double psi_old, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("dual_update: penalty must be positive");
  return psi_old + mu * (local - global);
}

std::string ProgressRow::csv_header() { return "iteration,delta_omega_mhz,consensus_gap_mhz,omega_mhz,mean_objective"; }

std::string ProgressRow::csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << iteration << ',' << delta_omega << ',' << consensus_gap << ',';
  for (std::size_t s = 0; s < omega.size(); ++s) os << (s ? ";" : "") << omega[s];
  double mean = 0.0;
  for (double v : sample_objectives) mean += v;
  if (!sample_objectives.empty()) mean /= sample_objectives.size();
  os << ',' << mean;
  return os.str();
}

double default_utility_scale(const ScenarioConfig& sc, int samples) {
  if (samples < 1) throw std::invalid_argument("default_utility_scale: need at least one sample");
  double power = 0.0;
  for (double e : sc.power_caps_w) power += e;
  return std::max(1e-12, sc.energy_coeff * std::max(1.0, sc.slice_priority) * power / (4.0 * samples));
}

DboResult run_dbo(const ScenarioConfig& sc, const SampleSet& samples, const DboOptions& opt) {
  if (samples.empty()) throw std::invalid_argument("run_dbo: need at least one sample");
  const int S = static_cast<int>(sc.embb_slices.size());
  const int M = static_cast<int>(samples.size());
  DboResult res;
  AdmmState st = opt.resume ? *opt.resume : AdmmState::initial(S, M, sc.total_bandwidth_mhz(), opt.penalty);
  if (!opt.resume) st.utility_scale = opt.utility_scale > 0.0 ? opt.utility_scale : default_utility_scale(sc, M);
  if (st.slices() != S || st.samples() != M)
    throw std::invalid_argument("run_dbo: resume state does not match scenario/samples");

  std::vector<std::vector<double>> local(S, std::vector<double>(M, 0.0));
  std::vector<double> objs(M, 0.0);
  AdmmReport& rep = res.report;
  const int start = st.iteration;
  for (int k = start; k < opt.max_iter; ++k) {
    parallel_for(M, opt.threads, [&](int m) {
      BuiltProgram bp = build_subproblem(samples[m], m, st, sc);
      SolverSolution sol = solve(bp.program, opt.solver);
      if (!sol.ok()) {
        std::ostringstream os;
        os << "run_dbo: sample " << m << " (index " << samples[m].index << ") subproblem "
           << status_name(sol.status) << " at iteration " << k + 1;
        if (!sol.message.empty()) os << ": " << sol.message;
        throw SubproblemError(m, sol.status, os.str());
      }
      for (int s = 0; s < S; ++s) local[s][m] = sol.value(bp.layout.omega[s]);
      objs[m] = sol.objective;
    });
    std::vector<double> next = S > 0 ? global_update(local, st.duals, st.penalty) : std::vector<double>{};
    double delta = 0.0, gap = 0.0;
    for (int s = 0; s < S; ++s) {
      delta += std::abs(next[s] - st.omega_global[s]);
      for (int m = 0; m < M; ++m) {
        st.duals[s][m] = dual_update(local[s][m], next[s], st.duals[s][m], st.penalty);
        gap = std::max(gap, std::abs(local[s][m] - next[s]));
      }
    }
    if (opt.adaptive_penalty && S > 0) {
      // residual balancing: primal = consensus spread, dual = mu sqrt(M) |step|
      double r2 = 0.0, step2 = 0.0;
      for (int s = 0; s < S; ++s) {
        step2 += (next[s] - st.omega_global[s]) * (next[s] - st.omega_global[s]);
        for (int m = 0; m < M; ++m) r2 += (local[s][m] - next[s]) * (local[s][m] - next[s]);
      }
      const double r = std::sqrt(r2), d = st.penalty * std::sqrt(M * step2);
      const double lo = opt.penalty * opt.penalty_range, hi = opt.penalty / opt.penalty_range;
      if (r > opt.balance_ratio * d)
        st.penalty = std::min(hi, st.penalty * opt.penalty_factor);
      else if (d > opt.balance_ratio * r)
        st.penalty = std::max(lo, st.penalty / opt.penalty_factor);
    }
    rep.penalties.push_back(st.penalty);
    st.omega_global = next;
    st.iteration = k + 1;
    rep.residuals.push_back(delta);
    rep.consensus_gaps.push_back(gap);
    rep.objective_history.push_back(objs);
    if (opt.progress) opt.progress({k + 1, delta, gap, next, objs});
    if (!opt.checkpoint_path.empty()) {
      std::ofstream out(opt.checkpoint_path);
      out << st.to_json();
    }
    if (delta <= opt.threshold_mhz && gap <= opt.consensus_factor * opt.threshold_mhz) {
      rep.converged = true;
      break;
    }
  }
  rep.iterations_used = st.iteration - start;
  rep.per_sample_objectives = objs;
  rep.local_omegas = local;
  for (double w : st.omega_global) res.omega_hz.push_back(w * 1e6);
  res.state = st;
  return res;
}

namespace {

SlotResult solve_slot(const ScenarioConfig& sc, const std::vector<double>& omega_hz, const ChannelSample& gains,
                      const PipelineOptions& opt, int t) {
  SlotResult out;
  BuiltProgram bp = build_minislot_problem(gains, omega_hz, sc);
  SolverSolution sol = solve(bp.program, opt.dbo.solver);
  out.status = sol.status;
  const int n = sc.dim();
  if (!sol.ok()) {
    for (std::size_t s = 0; s < sc.embb_slices.size(); ++s) out.embb_beams.push_back(CVector::Zero(n));
    for (const auto& sl : sc.urllc_slices) out.urllc_beams.emplace_back(sl.ue_count, CVector::Zero(n));
    return out;
  }
  out.max_violation = sol.max_violation;
  const int K = sc.antennas_per_rrh;
  const double s2 = sc.noise_power_w;

  // directions first (draws scaled against the whole RRH budget), then one joint power LP
  struct BlockSpec {
    int block;
    CMatrix score;
    std::vector<CMatrix> lhs;
    std::vector<double> rhs;
  };
  std::vector<BlockSpec> blocks;
  const CMatrix eye = CMatrix::Identity(n, n);
  for (std::size_t s = 0; s < sc.embb_slices.size(); ++s) {
    BlockSpec b{bp.layout.v_block[s], -sc.energy_coeff * eye, {}, {}};
    const double need = std::exp2(sc.embb_slices[s].rate_threshold_mbps / (omega_hz[s] * 1e-6)) - 1.0;
    for (const auto& h : gains.embb[s]) {
      CMatrix g = gain_matrix(h, s2);
      b.score += g;
      b.lhs.push_back(g);
      b.rhs.push_back(need);
    }
    blocks.push_back(std::move(b));
  }
  for (std::size_t s = 0; s < sc.urllc_slices.size(); ++s)
    for (std::size_t i = 0; i < gains.urllc[s].size(); ++i) {
      CMatrix g = gain_matrix(gains.urllc[s][i], s2) / sc.snr_loss;
      const double tau = sol.value(bp.layout.tau[s][i]);
      blocks.push_back({bp.layout.g_block[s][i], sc.slice_priority * (g - sc.energy_coeff * eye), {g}, {tau}});
    }
  auto directions = [&](double gap_tolerance, bool record) {
    std::vector<BeamRequirement> beams;
    for (const auto& b : blocks) {
      Rank1Request req;
      req.power_caps = sc.power_caps_w;
      req.antennas_per_rrh = K;
      req.score = b.score;
      req.snr_lhs = b.lhs;
      req.snr_rhs = b.rhs;
      req.seed = opt.randomization_seed + static_cast<std::uint64_t>(t) * 1000 + b.block;
      Rank1Report rep = extract_rank1(sol.matrix_values[b.block], gap_tolerance, req);
      if (record) {
        out.rank_gaps.push_back(rep.gap);
        if (rep.method == ExtractionMethod::randomization) out.used_randomization = true;
      }
      beams.push_back({rep.vector, b.score, b.lhs, b.rhs});
    }
    return beams;
  };
  std::vector<CVector> w;
  try {
    w = power_control(directions(opt.rank_gap_tolerance, true), sc.power_caps_w, K, 1e-7, opt.dbo.solver);
  } catch (const std::runtime_error&) {
    // draws chosen block by block can miss jointly; retry on the principal eigenvectors
    if (!out.used_randomization) throw;
    w = power_control(directions(std::numeric_limits<double>::infinity(), false), sc.power_caps_w, K, 1e-7,
                      opt.dbo.solver);
  }
  std::size_t next = 0;
  for (std::size_t s = 0; s < sc.embb_slices.size(); ++s) out.embb_beams.push_back(w[next++]);
  for (std::size_t s = 0; s < sc.urllc_slices.size(); ++s) {
    std::vector<CVector> b;
    for (std::size_t i = 0; i < gains.urllc[s].size(); ++i) b.push_back(w[next++]);
    out.urllc_beams.push_back(std::move(b));
  }
  out.feasible = true;
  SlotUtility u = slot_utility(out, gains, sc);
  out.utility_embb = u.embb;
  out.utility_urllc = u.urllc;
  ChannelUseVector r;
  for (std::size_t s = 0; s < sc.urllc_slices.size(); ++s) {
    std::vector<double> rs;
    const auto& spec = sc.urllc_slices[s];
    for (std::size_t i = 0; i < gains.urllc[s].size(); ++i) {
      double q = snr(gains.urllc[s][i], out.urllc_beams[s][i], s2, sc.snr_loss);
      rs.push_back(q > 0.0 ? channel_use_bound(spec.packet_bits, spec.decode_err_prob, q)
                           : std::numeric_limits<double>::infinity());
    }
    r.push_back(std::move(rs));
  }
  out.channel_uses = r;
  out.urllc_bandwidth_hz = sc.urllc_slices.empty() ? 0.0 : scenario_staffing(sc, r).total_bandwidth_hz;
  return out;
}

}  // namespace

std::vector<SlotResult> run_minislots(const ScenarioConfig& sc, const std::vector<double>& omega_hz,
                                      const SampleSet& traces, const PipelineOptions& opt) {
  std::vector<SlotResult> slots(traces.size());
  parallel_for(static_cast<int>(traces.size()), opt.slot_threads, [&](int t) {
    try {
      slots[t] = solve_slot(sc, omega_hz, traces[t], opt, t);
    } catch (const std::runtime_error& e) {
      // no feasible rank-1 beamformer: the slot is flagged and serves nobody
      SlotResult flagged;
      flagged.status = SolveStatus::infeasible;
      flagged.message = e.what();
      for (std::size_t s = 0; s < sc.embb_slices.size(); ++s) flagged.embb_beams.push_back(CVector::Zero(sc.dim()));
      for (const auto& sl : sc.urllc_slices) flagged.urllc_beams.emplace_back(sl.ue_count, CVector::Zero(sc.dim()));
      slots[t] = flagged;
    }
  });
  return slots;
}

SliceSolution run_b2o(const ScenarioConfig& sc, const SampleSet& samples, const SampleSet& traces,
                      const PipelineOptions& opt) {
  SliceSolution out;
  out.algorithm = "b2o_admm";
  DboResult dbo = run_dbo(sc, samples, opt.dbo);
  out.omega_hz = dbo.omega_hz;
  out.dbo = dbo.report;
  out.slots = run_minislots(sc, out.omega_hz, traces, opt);
  return out;
}

SliceSolution run_no_admm(const ScenarioConfig& sc, const SampleSet& traces, const PipelineOptions& opt) {
  if (traces.empty()) throw std::invalid_argument("run_no_admm: need at least one minislot");
  SliceSolution out;
  out.algorithm = "no_admm";
  // A single sample: there is nothing to reach consensus over.
  DboResult dbo = run_dbo(sc, SampleSet{traces.front()}, opt.dbo);
  out.omega_hz = dbo.omega_hz;
  out.dbo = dbo.report;
  out.slots = run_minislots(sc, out.omega_hz, traces, opt);
  return out;
}

}  // namespace ranslice
