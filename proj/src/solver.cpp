#include "ranslice/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "clarabel_shim.h"
#include "ranslice/urllc.hpp"

extern "C" void openblas_set_num_threads(int);

namespace ranslice {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

namespace {

struct Csc {
  std::vector<std::size_t> colptr, rowval;
  std::vector<double> nzval;
};

// Builds CSC from (row, col, value) triplets, summing duplicates.
Csc to_csc(std::size_t ncols, std::vector<std::tuple<std::size_t, std::size_t, double>> trip) {
  std::sort(trip.begin(), trip.end(), [](const auto& a, const auto& b) {
    return std::get<1>(a) != std::get<1>(b) ? std::get<1>(a) < std::get<1>(b) : std::get<0>(a) < std::get<0>(b);
  });
  Csc m;
  m.colptr.assign(ncols + 1, 0);
  for (std::size_t k = 0; k < trip.size(); ++k) {
    auto [r, c, v] = trip[k];
    if (!m.rowval.empty() && k > 0 && std::get<0>(trip[k - 1]) == r && std::get<1>(trip[k - 1]) == c) {
      m.nzval.back() += v;
      continue;
    }
    m.rowval.push_back(r);
    m.nzval.push_back(v);
    m.colptr[c + 1]++;
  }
  for (std::size_t c = 0; c < ncols; ++c) m.colptr[c + 1] += m.colptr[c];
  return m;
}

void limit_blas_threads() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

}  // namespace

SolverSolution ClarabelBackend::solve(const ConeProgram& prog, const SolverSettings& settings) const {
  limit_blas_threads();
  const std::size_t n = prog.num_vars();
  std::vector<std::tuple<std::size_t, std::size_t, double>> ptrip, atrip;
  for (const auto& [i, j, c] : prog.quadratic()) ptrip.push_back({std::size_t(i), std::size_t(j), c});
  std::vector<double> q(n, 0.0);
  for (const auto& [i, c] : prog.objective().terms) q[i] += c;

  std::vector<double> b;
  std::vector<int> types;
  std::vector<std::size_t> dims;
  auto push_row = [&](const AffineExpr& e) {
    std::size_t r = b.size();
    for (const auto& [i, c] : e.terms) atrip.push_back({r, std::size_t(i), -c});
    b.push_back(e.constant);
  };
  std::size_t nz = 0, nn = 0;
  for (const auto& c : prog.constraints())
    if (c.kind == ConeKind::zero) push_row(c.rows[0]), ++nz;
  if (nz) types.push_back(CLARABEL_SHIM_ZERO), dims.push_back(nz);
  for (const auto& c : prog.constraints())
    if (c.kind == ConeKind::nonneg) push_row(c.rows[0]), ++nn;
  if (nn) types.push_back(CLARABEL_SHIM_NONNEG), dims.push_back(nn);
  const double r2 = std::sqrt(0.5);
  for (const auto& c : prog.constraints()) {
    switch (c.kind) {
      case ConeKind::soc:
        for (const auto& r : c.rows) push_row(r);
        types.push_back(CLARABEL_SHIM_SOC);
        dims.push_back(c.rows.size());
        break;
      case ConeKind::rsoc: {
        // 2uv >= |x|^2  <=>  ((u+v)/sqrt2, (u-v)/sqrt2, x) in SOC
        push_row(r2 * (c.rows[0] + c.rows[1]));
        push_row(r2 * (c.rows[0] - c.rows[1]));
        for (std::size_t k = 2; k < c.rows.size(); ++k) push_row(c.rows[k]);
        types.push_back(CLARABEL_SHIM_SOC);
        dims.push_back(c.rows.size());
        break;
      }
      case ConeKind::exp:
        // x1 >= x2 exp(x3/x2) maps to the solver's (x, y, z) = (x3, x2, x1)
        push_row(c.rows[2]);
        push_row(c.rows[1]);
        push_row(c.rows[0]);
        types.push_back(CLARABEL_SHIM_EXP);
        dims.push_back(3);
        break;
      case ConeKind::psd: {
        for (const auto& r : prog.realified_svec(c.block)) push_row(r);
        types.push_back(CLARABEL_SHIM_PSD_TRI);
        dims.push_back(2 * prog.blocks()[c.block].n);
        break;
      }
      default: break;
    }
  }
  const std::size_t m = b.size();
  Csc P = to_csc(n, ptrip);
  Csc A = to_csc(n, atrip);

  ClarabelShimSettings cs{};
  cs.max_iter = static_cast<uint32_t>(settings.max_iter);
  cs.time_limit = settings.time_limit_s;
  cs.tol_gap_abs = settings.tol_gap_abs;
  cs.tol_gap_rel = settings.tol_gap_rel;
  cs.tol_feas = settings.tol_feas;
  cs.verbose = settings.verbose ? 1 : 0;
  cs.equilibrate_max_scale = settings.equilibrate_max_scale;
  cs.static_reg_constant = settings.static_reg_constant;
  cs.max_step_fraction = settings.max_step_fraction;

  SolverSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  std::vector<double> s(m), z(m);
  ClarabelShimResult res{};
  int rc = clarabel_shim_solve(n, m, P.colptr.data(), P.rowval.data(), P.nzval.data(), q.data(),
                               A.colptr.data(), A.rowval.data(), A.nzval.data(), b.data(), types.size(),
                               types.data(), dims.data(), &cs, sol.x.data(), s.data(), z.data(), &res);
  sol.iterations = static_cast<int>(res.iterations);
  sol.solve_time_s = res.solve_time;
  if (rc != 0) {
    sol.status = SolveStatus::numerical_failure;
    sol.message = rc == 1 ? "backend setup error" : "backend panic";
    return sol;
  }
  switch (res.status) {
    case 1: sol.status = SolveStatus::optimal; break;
    case 4: sol.status = SolveStatus::optimal; sol.message = "almost solved"; break;
    case 2: case 5: sol.status = SolveStatus::infeasible; break;
    case 3: case 6: sol.status = SolveStatus::unbounded; break;
    default:
      sol.status = SolveStatus::numerical_failure;
      sol.message = "backend status " + std::to_string(res.status);
  }
  sol.objective = res.obj_val + prog.objective().constant;
  return sol;
}

std::shared_ptr<const ConicBackend> default_backend() {
  static auto backend = std::make_shared<const ClarabelBackend>();
  return backend;
}

namespace {

SolverSolution solve_once(const ConeProgram& program, const SolverSettings& settings, const ConicBackend& backend) {
  SolverSolution sol = backend.solve(program, settings);
  if (sol.x.size() != program.num_vars()) {
    sol.status = SolveStatus::numerical_failure;
    sol.message = "backend returned wrong variable count";
    return sol;
  }
  for (int b = 0; b < static_cast<int>(program.blocks().size()); ++b)
    sol.matrix_values.push_back(program.herm_value(b, sol.x));
  if (sol.ok()) {
    std::string tag;
    sol.max_violation = program.max_violation(sol.x, &tag);
    sol.objective = program.objective_value(sol.x);
    if (sol.max_violation > settings.audit_tol) {
      sol.status = SolveStatus::numerical_failure;
      sol.message = "audit failed at " + tag + " (violation " + std::to_string(sol.max_violation) + ")";
    }
  }
  return sol;
}

}  // namespace

SolverSolution solve(const ConeProgram& program, const SolverSettings& settings, const ConicBackend& backend) {
  SolverSolution sol = solve_once(program, settings, backend);
  // Interior-point runs that stall near the tolerance sometimes return a drifted
  // iterate; retry with stronger regularization, then shorter steps, then looser gaps.
  for (int k = 0; k < settings.retries && sol.status == SolveStatus::numerical_failure; ++k) {
    SolverSettings retry = settings;
    switch (k % 4) {
      case 0:
        retry.static_reg_constant = std::max(settings.static_reg_constant, 1e-7);
        break;
      case 1:
        retry.max_step_fraction = 0.9;
        break;
      case 2:
        retry.max_step_fraction = 0.8;
        retry.equilibrate_max_scale = 1.0 + 1e-9;
        retry.tol_gap_rel = retry.tol_gap_abs = std::max(settings.tol_gap_rel, 1e-7);
        break;
      default:
        retry.tol_gap_rel = retry.tol_gap_abs = retry.tol_feas = std::max(settings.tol_feas, 1e-6);
        break;
    }
    SolverSolution again = solve_once(program, retry, backend);
    again.iterations += sol.iterations;
    again.solve_time_s += sol.solve_time_s;
    if (again.status != SolveStatus::numerical_failure) {
      again.message = (again.message.empty() ? "" : again.message + "; ") + "after retry " + std::to_string(k + 1);
      return again;
    }
    sol = again;
  }
  return sol;
}

// ---------------------------------------------------------------------------

BruteForceResult brute_force_solve(const ScenarioConfig& sc, const ChannelSample& smp, const AdmmState& admm,
                                   int slot, int grid) {
  if (sc.rrh_count != 1 || sc.antennas_per_rrh != 1)
    throw std::invalid_argument("brute_force_solve: needs J = K = 1");
  if (sc.embb_slices.size() > 1 || sc.embb_ue_count() + sc.urllc_ue_count() > 2)
    throw std::invalid_argument("brute_force_solve: at most one eMBB slice and two UEs");
  if (grid < 2) throw std::invalid_argument("brute_force_solve: grid too small");
  const double E = sc.power_caps_w.at(0);
  const double W = sc.total_bandwidth_mhz();
  const double weight = 1.0 / (admm.samples() * admm.utility_scale);
  const double mu = admm.penalty;
  const double s2 = sc.noise_power_w;
  const double eta = sc.energy_coeff;

  struct Ue {
    double gain;  // |h|^2 / sigma^2 (divided by phi for URLLC)
    double L, beta, a, b;
  };
  std::vector<double> embb_gain;
  double cth = 0.0;
  if (!sc.embb_slices.empty()) {
    cth = sc.embb_slices[0].rate_threshold_mbps;
    for (const auto& h : smp.embb[0]) embb_gain.push_back(std::norm(h(0)) / s2);
  }
  // Staffing bound in MHz: sum a r + || b r ||, a = lambda / kappa, b = c sqrt(lambda / D) / kappa.
  const double c = sc.urllc_slices.empty()
                       ? 0.0
                       : staffing_coefficient(sc.queueing_prob_cap, sc.staffing_alpha(), sc.urllc_slices, sc.traffic);
  const double kappa_mhz = sc.channel_use_density * 1e6;
  std::vector<Ue> urllc;
  for (std::size_t s = 0; s < sc.urllc_slices.size(); ++s) {
    const double lam = sc.traffic[s].arrival_rate();
    const double D = sc.urllc_slices[s].deadline_ms;
    for (std::size_t i = 0; i < smp.urllc[s].size(); ++i)
      urllc.push_back({std::norm(smp.urllc[s][i](0)) / (sc.snr_loss * s2), sc.urllc_slices[s].packet_bits,
                       sc.urllc_slices[s].decode_err_prob, lam / kappa_mhz, c * std::sqrt(lam / D) / kappa_mhz});
  }
  const bool has_embb = !sc.embb_slices.empty();

  // axes: [embb power, omega] if eMBB, then one power per URLLC UE
  std::vector<double> lo, hi;
  if (has_embb) {
    lo.insert(lo.end(), {0.0, 0.0});
    hi.insert(hi.end(), {E, W});
  }
  for (std::size_t k = 0; k < urllc.size(); ++k) lo.push_back(0.0), hi.push_back(E);
  const int dims = static_cast<int>(lo.size());

  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<double> best_pt;

  auto evaluate = [&](const std::vector<double>& pt) -> double {
    double power = 0.0, obj = 0.0;
    std::size_t u0 = 0;
    if (has_embb) {
      const double pe = pt[0], w = pt[1];
      power += pe;
      double sum_gain = 0.0;
      for (double g : embb_gain) {
        if (w * std::log2(1.0 + g * pe) < cth) return std::numeric_limits<double>::infinity();
        sum_gain += g;
      }
      obj -= (sum_gain - eta) * pe * weight;
      const double psi = admm.duals[0][slot], wg = admm.omega_global[0];
      obj += psi * (w - wg) + 0.5 * mu * (w - wg) * (w - wg);
      u0 = 2;
    }
    if (power > E) return std::numeric_limits<double>::infinity();
    double mean = 0.0, spread2 = 0.0;
    for (std::size_t k = 0; k < urllc.size(); ++k) {
      const double pu = pt[u0 + k];
      power += pu;
      if (power > E * (1.0 + 1e-12) || pu <= 0.0) return std::numeric_limits<double>::infinity();
      const double r = channel_use_bound(urllc[k].L, urllc[k].beta, urllc[k].gain * pu);
      mean += urllc[k].a * r;
      spread2 += urllc[k].b * urllc[k].b * r * r;
      obj -= sc.slice_priority * (urllc[k].gain - eta) * pu * weight;
    }
    const double used = has_embb ? pt[1] : 0.0;
    if (used + mean + std::sqrt(spread2) > W) return std::numeric_limits<double>::infinity();
    return obj;
  };

  auto sweep = [&](const std::vector<double>& l, const std::vector<double>& h) {
    std::vector<int> idx(dims, 0);
    std::vector<double> pt(dims);
    while (true) {
      for (int a = 0; a < dims; ++a) pt[a] = l[a] + (h[a] - l[a]) * idx[a] / (grid - 1);
      double v = evaluate(pt);
      ++best.evaluations;
      if (v < best.objective) {
        best.objective = v;
        best_pt = pt;
      }
      int a = 0;
      while (a < dims && ++idx[a] == grid) idx[a++] = 0;
      if (a == dims) break;
    }
  };
  sweep(lo, hi);
  if (!std::isfinite(best.objective)) throw std::runtime_error("brute_force_solve: no feasible grid point");
  // zoom around the incumbent; boundary optima at small power need several rounds
  std::vector<double> l2 = lo, h2 = hi;
  for (int round = 0; round < 4; ++round) {
    const std::vector<double> centre = best_pt;
    for (int a = 0; a < dims; ++a) {
      const double step = (h2[a] - l2[a]) / (grid - 1);
      l2[a] = std::max(lo[a], centre[a] - step);
      h2[a] = std::min(hi[a], centre[a] + step);
    }
    sweep(l2, h2);
  }

  std::size_t u0 = 0;
  if (has_embb) {
    best.embb_power.push_back(best_pt[0]);
    best.omega_mhz.push_back(best_pt[1]);
    u0 = 2;
  }
  for (std::size_t k = 0; k < urllc.size(); ++k) best.urllc_power.push_back(best_pt[u0 + k]);
  return best;
}

// ---------------------------------------------------------------------------

double rank1_gap(const CMatrix& v, double zero_tol) {
  if (v.rows() != v.cols()) throw std::invalid_argument("rank1_gap: matrix must be square");
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  if ((v - v.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("rank1_gap: matrix is not Hermitian");
  if (v.rows() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(v, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  const double l1 = ev(ev.size() - 1);
  if (l1 <= zero_tol) return 0.0;
  return std::clamp(ev(ev.size() - 2) / l1, 0.0, 1.0);
}

CVector principal_beamformer(const CMatrix& v) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(v);
  const int n = static_cast<int>(v.rows());
  const double l1 = std::max(0.0, es.eigenvalues()(n - 1));
  CVector u = es.eigenvectors().col(n - 1);
  // fix the global phase so the largest entry is real and positive
  Eigen::Index k;
  u.cwiseAbs().maxCoeff(&k);
  if (std::abs(u(k)) > 0.0) u *= std::conj(u(k)) / std::abs(u(k));
  return std::sqrt(l1) * u;
}

Rank1Report extract_rank1(const CMatrix& v, double gap_tolerance, const Rank1Request& req) {
  Rank1Report rep;
  rep.gap = rank1_gap(v);
  if (rep.gap <= gap_tolerance) {
    rep.method = ExtractionMethod::principal_eig;
    rep.vector = principal_beamformer(v);
    return rep;
  }
  rep.method = ExtractionMethod::randomization;
  const int n = static_cast<int>(v.rows());
  const int K = req.antennas_per_rrh;
  if (K < 1 || static_cast<int>(req.power_caps.size()) * K != n)
    throw std::invalid_argument("extract_rank1: power caps do not match matrix size");
  if (req.snr_lhs.size() != req.snr_rhs.size()) throw std::invalid_argument("extract_rank1: constraint mismatch");
  const CMatrix& score = req.score.size() ? req.score : v;

  // Draws xi = V^{1/2} z with z ~ CN(0, I).
  Eigen::SelfAdjointEigenSolver<CMatrix> es(v);
  Eigen::VectorXd sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  CMatrix root = es.eigenvectors() * sq.asDiagonal();
  auto rng = make_rng(req.seed, 0x3a9d);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));

  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < req.draws; ++t) {
    CVector z(n);
    for (int a = 0; a < n; ++a) z(a) = {g(rng), g(rng)};
    CVector xi = root * z;
    double tmax = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < req.power_caps.size(); ++j) {
      double pj = xi.segment(j * K, K).squaredNorm();
      if (pj > 0.0) tmax = std::min(tmax, std::sqrt(req.power_caps[j] / pj));
    }
    if (!std::isfinite(tmax)) continue;
    double tmin = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < req.snr_lhs.size(); ++k) {
      double q = (xi.adjoint() * req.snr_lhs[k] * xi)(0, 0).real();
      if (q <= 0.0) {
        ok = ok && req.snr_rhs[k] <= 0.0;
        continue;
      }
      tmin = std::max(tmin, std::sqrt(std::max(0.0, req.snr_rhs[k]) / q));
    }
    if (!ok || tmin > tmax) continue;
    double curv = (xi.adjoint() * score * xi)(0, 0).real();
    double scale = curv >= 0.0 ? tmax : tmin;
    double val = curv * scale * scale;
    if (val > best) {
      best = val;
      rep.vector = scale * xi;
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("extract_rank1: no feasible randomized draw");
  return rep;
}

std::vector<CVector> power_control(const std::vector<BeamRequirement>& beams, const std::vector<double>& caps,
                                   int K, double margin, const SolverSettings& settings) {
  const int J = static_cast<int>(caps.size());
  if (K < 1) throw std::invalid_argument("power_control: antennas_per_rrh must be positive");
  const std::size_t B = beams.size();
  // p_b = unit_b x_b: unit_b is the floor-meeting power of beam b (or its lone-beam cap),
  // so every row of the LP is O(1)
  std::vector<double> unit(B), gain(B), floor_p(B, 0.0);
  std::vector<std::vector<double>> share(B, std::vector<double>(J));
  for (std::size_t b = 0; b < B; ++b) {
    const auto& bm = beams[b];
    if (bm.direction.size() != J * K) throw std::invalid_argument("power_control: direction size mismatch");
    if (bm.snr_lhs.size() != bm.snr_rhs.size()) throw std::invalid_argument("power_control: constraint mismatch");
    double lone = std::numeric_limits<double>::infinity();
    for (int j = 0; j < J; ++j) {
      share[b][j] = bm.direction.segment(j * K, K).squaredNorm();
      if (share[b][j] > 0.0) lone = std::min(lone, caps[j] / share[b][j]);
    }
    if (!std::isfinite(lone)) lone = 1.0;
    for (std::size_t k = 0; k < bm.snr_lhs.size(); ++k) {
      const double need = std::max(0.0, bm.snr_rhs[k]) * (1.0 + margin);
      if (need <= 0.0) continue;
      const double q = (bm.direction.adjoint() * bm.snr_lhs[k] * bm.direction)(0, 0).real();
      if (!(q > 0.0)) throw std::runtime_error("power_control: beam " + std::to_string(b) + " cannot reach its floor");
      floor_p[b] = std::max(floor_p[b], need / q);
    }
    if (floor_p[b] > lone) throw std::runtime_error("power_control: beam " + std::to_string(b) + " floor exceeds the caps");
    unit[b] = floor_p[b] > 0.0 ? floor_p[b] : lone;
    gain[b] = bm.score.size() ? (bm.direction.adjoint() * bm.score * bm.direction)(0, 0).real() * unit[b] : 0.0;
  }
  ConeProgram lp;
  std::vector<int> x;
  std::vector<AffineExpr> load(J);
  double scale = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    x.push_back(lp.add_scalar("x" + std::to_string(b)));
    lp.add_nonneg(AffineExpr::var(x[b]) - (floor_p[b] > 0.0 ? 1.0 : 0.0), "floor");
    for (int j = 0; j < J; ++j) load[j].add(x[b], share[b][j] * unit[b] / caps[j]);
    scale = std::max(scale, std::abs(gain[b]));
  }
  for (int j = 0; j < J; ++j) lp.add_nonneg(AffineExpr(1.0 - margin) - load[j], "cap");
  if (scale <= 0.0) scale = 1.0;
  AffineExpr obj;
  for (std::size_t b = 0; b < B; ++b) obj.add(x[b], -gain[b] / scale);
  lp.add_objective(obj);
  SolverSolution sol = solve(lp, settings);
  if (!sol.ok()) throw std::runtime_error(std::string("power_control: ") + status_name(sol.status));

  // snap onto the floors, then pull the above-floor part back by one common factor
  // so that every cap holds exactly
  std::vector<double> p(B);
  for (std::size_t b = 0; b < B; ++b) p[b] = std::max(sol.value(x[b]) * unit[b], floor_p[b]);
  double f = 1.0;
  for (int j = 0; j < J; ++j) {
    double base = 0.0, extra = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      base += floor_p[b] * share[b][j];
      extra += (p[b] - floor_p[b]) * share[b][j];
    }
    if (base > caps[j]) throw std::runtime_error("power_control: floors exceed the cap of RRH " + std::to_string(j));
    if (base + extra > caps[j]) f = std::min(f, (caps[j] - base) / extra);
  }
  for (std::size_t b = 0; b < B; ++b) p[b] = floor_p[b] + f * (p[b] - floor_p[b]);
  std::vector<CVector> out;
  for (std::size_t b = 0; b < B; ++b) out.push_back(std::sqrt(p[b]) * beams[b].direction);
  return out;
}

}  // namespace ranslice
