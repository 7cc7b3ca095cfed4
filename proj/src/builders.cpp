#include "ranslice/builders.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ranslice/urllc.hpp"

namespace ranslice {

namespace {

std::string key(const char* base, std::size_t s, std::size_t i) {
  return std::string(base) + "_" + std::to_string(s) + "_" + std::to_string(i);
}

void check_sample(const ChannelSample& smp, const ScenarioConfig& sc) {
  if (smp.embb.size() != sc.embb_slices.size() || smp.urllc.size() != sc.urllc_slices.size())
    throw std::invalid_argument("builder: sample slice counts do not match scenario");
  for (std::size_t s = 0; s < smp.embb.size(); ++s) {
    if (static_cast<int>(smp.embb[s].size()) != sc.embb_slices[s].ue_count)
      throw std::invalid_argument("builder: eMBB UE count mismatch");
    for (const auto& h : smp.embb[s])
      if (h.size() != sc.dim()) throw std::invalid_argument("builder: channel length mismatch");
  }
  for (std::size_t s = 0; s < smp.urllc.size(); ++s) {
    if (static_cast<int>(smp.urllc[s].size()) != sc.urllc_slices[s].ue_count)
      throw std::invalid_argument("builder: URLLC UE count mismatch");
    for (const auto& h : smp.urllc[s])
      if (h.size() != sc.dim()) throw std::invalid_argument("builder: channel length mismatch");
  }
}

CMatrix identity(int n) { return CMatrix::Identity(n, n); }

// Beamformer blocks, the utility objective (scaled by `weight`), PSD membership and
// per-RRH power. Returns nothing; fills layout.v_block / g_block.
void add_beamformers(ConeProgram& p, ProgramLayout& lay, const ChannelSample& smp, const ScenarioConfig& sc,
                     double weight) {
  const int n = sc.dim();
  const double eta = sc.energy_coeff;
  for (std::size_t s = 0; s < sc.embb_slices.size(); ++s) {
    int b = p.add_herm("V_" + std::to_string(s), n);
    lay.v_block.push_back(b);
    CMatrix w = -eta * identity(n);
    for (const auto& h : smp.embb[s]) w += gain_matrix(h, sc.noise_power_w);
    p.add_objective(-weight * p.trace_inner(w, b));
  }
  for (std::size_t s = 0; s < sc.urllc_slices.size(); ++s) {
    std::vector<int> blocks;
    for (std::size_t i = 0; i < smp.urllc[s].size(); ++i) {
      int b = p.add_herm(key("G", s, i), n);
      blocks.push_back(b);
      CMatrix w = gain_matrix(smp.urllc[s][i], sc.noise_power_w) / sc.snr_loss - eta * identity(n);
      p.add_objective(-weight * sc.slice_priority * p.trace_inner(w, b));
    }
    lay.g_block.push_back(blocks);
  }
  for (int b : lay.v_block) p.add_psd(b, "psd_V");
  for (const auto& gs : lay.g_block)
    for (int b : gs) p.add_psd(b, "psd_G");
  const int K = sc.antennas_per_rrh;
  for (int j = 0; j < sc.rrh_count; ++j) {
    AffineExpr e(sc.power_caps_w.at(j));
    for (int b : lay.v_block) e = e - p.partial_trace(b, j * K, K);
    for (const auto& gs : lay.g_block)
      for (int b : gs) e = e - p.partial_trace(b, j * K, K);
    p.add_nonneg(e, "power_rrh_" + std::to_string(j));
  }
}

// Channel-use chain per URLLC UE and the bandwidth cone with `budget` (MHz, affine).
void add_urllc_chain(ConeProgram& p, ProgramLayout& lay, const ChannelSample& smp, const ScenarioConfig& sc,
                     AffineExpr budget) {
  const double lnln2 = std::log(std::numbers::ln2);
  const auto coef = bandwidth_coefficients(sc);
  std::vector<AffineExpr> spread;
  for (std::size_t s = 0; s < sc.urllc_slices.size(); ++s) {
    const auto& spec = sc.urllc_slices[s];
    const double L = spec.packet_bits;
    const double Y = channel_use_constant(spec.decode_err_prob);
    std::vector<int> taus, fs, ds, xs;
    for (std::size_t i = 0; i < smp.urllc[s].size(); ++i) {
      int tau = p.add_scalar(key("tau", s, i));
      int d = p.add_scalar(key("d", s, i));
      int vphi = p.add_scalar(key("varphi", s, i));
      int nu = p.add_scalar(key("nu", s, i));
      int x = p.add_scalar(key("x", s, i));
      int f = p.add_scalar(key("f", s, i));
      int b = lay.g_block[s][i];
      CMatrix h = gain_matrix(smp.urllc[s][i], sc.noise_power_w) / sc.snr_loss;
      p.add_nonneg(p.trace_inner(h, b) - AffineExpr::var(tau), "snr_tau");
      // ln ln(1 + tau) >= -d + ln ln 2, i.e. exp(d) >= 1 / log2(1 + tau)
      p.add_exp(AffineExpr::var(vphi), 1.0, AffineExpr::var(d, -1.0) + lnln2, "nested_log_inner");
      p.add_exp(AffineExpr::var(tau) + 1.0, 1.0, AffineExpr::var(vphi), "nested_log_outer");
      // 2 nu >= ln(1 + exp(-d + ln(4L/Y)))
      int mu1 = p.add_scalar(key("mu1", s, i));
      p.add_exp(AffineExpr::var(mu1), 1.0, AffineExpr::var(nu, -2.0), "lse_nu_1");
      AffineExpr mu_sum = AffineExpr::var(mu1);
      if (L > 0.0) {
        int mu2 = p.add_scalar(key("mu2", s, i));
        p.add_exp(AffineExpr::var(mu2), 1.0,
                  AffineExpr::var(d, -1.0) + AffineExpr::var(nu, -2.0) + std::log(4.0 * L / Y), "lse_nu_2");
        mu_sum += AffineExpr::var(mu2);
      }
      p.add_nonneg(1.0 - mu_sum, "lse_nu_sum");
      // x >= ln(L e^d + (Y/2) e^{2d} + (Y/2) e^{2d + nu})
      AffineExpr zeta_sum;
      if (L > 0.0) {
        int z1 = p.add_scalar(key("zeta1", s, i));
        p.add_exp(AffineExpr::var(z1), 1.0, AffineExpr::var(d) - AffineExpr::var(x) + std::log(L), "lse_x_1");
        zeta_sum += AffineExpr::var(z1);
      }
      int z2 = p.add_scalar(key("zeta2", s, i));
      int z3 = p.add_scalar(key("zeta3", s, i));
      p.add_exp(AffineExpr::var(z2), 1.0, AffineExpr::var(d, 2.0) - AffineExpr::var(x) + std::log(Y / 2.0),
                "lse_x_2");
      p.add_exp(AffineExpr::var(z3), 1.0,
                AffineExpr::var(d, 2.0) + AffineExpr::var(nu) - AffineExpr::var(x) + std::log(Y / 2.0), "lse_x_3");
      zeta_sum += AffineExpr::var(z2);
      zeta_sum += AffineExpr::var(z3);
      p.add_nonneg(1.0 - zeta_sum, "lse_x_sum");
      // f counts channel uses in units of f_unit: f_unit * f >= exp(x)
      const double fu = L > 0.0 ? L : 1.0;
      p.add_exp(AffineExpr::var(f), 1.0, AffineExpr::var(x) - std::log(fu), "channel_use");

      budget = budget - AffineExpr::var(f, coef.a[s][i] * fu);
      spread.push_back(AffineExpr::var(f, coef.b[s][i] * fu));
      taus.push_back(tau);
      fs.push_back(f);
      ds.push_back(d);
      xs.push_back(x);
    }
    lay.tau.push_back(taus);
    lay.f.push_back(fs);
    lay.f_unit.push_back(L > 0.0 ? L : 1.0);
    lay.d.push_back(ds);
    lay.x.push_back(xs);
  }
  if (spread.empty())
    p.add_nonneg(budget, "bandwidth");
  else
    p.add_soc(budget, spread, "bandwidth");
}

}  // namespace

double utility_bound(const ChannelSample& smp, const ScenarioConfig& sc) {
  double power = 0.0;
  for (double e : sc.power_caps_w) power += e;
  double g = 0.0;
  for (const auto& sl : smp.embb)
    for (const auto& h : sl) g += h.squaredNorm() / sc.noise_power_w;
  for (const auto& sl : smp.urllc)
    for (const auto& h : sl) g += sc.slice_priority * h.squaredNorm() / (sc.snr_loss * sc.noise_power_w);
  return std::max(1.0, power * std::max(g, sc.energy_coeff * std::max(1.0, sc.slice_priority)));
}

double channel_use_constant(double beta) {
  double q = q_inverse(beta);
  return q * q;
}

BandwidthCoefficients bandwidth_coefficients(const ScenarioConfig& sc) {
  BandwidthCoefficients out;
  if (!sc.urllc_slices.empty())
    out.c = staffing_coefficient(sc.queueing_prob_cap, sc.staffing_alpha(), sc.urllc_slices, sc.traffic);
  const double k = sc.channel_use_density * 1e6;
  for (std::size_t s = 0; s < sc.urllc_slices.size(); ++s) {
    const double lam = sc.traffic[s].arrival_rate();
    const double D = sc.urllc_slices[s].deadline_ms;
    out.a.emplace_back(sc.urllc_slices[s].ue_count, lam / k);
    out.b.emplace_back(sc.urllc_slices[s].ue_count, out.c * std::sqrt(lam / D) / k);
  }
  return out;
}

BuiltProgram build_subproblem(const ChannelSample& sample, int slot, const AdmmState& admm,
                              const ScenarioConfig& sc) {
  check_sample(sample, sc);
  if (!(admm.penalty > 0.0)) throw std::invalid_argument("build_subproblem: penalty must be positive");
  if (admm.slices() != static_cast<int>(sc.embb_slices.size()))
    throw std::invalid_argument("build_subproblem: ADMM state does not match eMBB slices");
  if (slot < 0 || slot >= admm.samples()) throw std::invalid_argument("build_subproblem: sample slot out of range");
  BuiltProgram out;
  ConeProgram& p = out.program;
  ProgramLayout& lay = out.layout;
  const double M = admm.samples();
  const double mu = admm.penalty;

  for (std::size_t s = 0; s < sc.embb_slices.size(); ++s) {
    int w = p.add_scalar("omega_" + std::to_string(s));
    lay.omega.push_back(w);
    const double psi = admm.duals[s][slot];
    const double wg = admm.omega_global[s];
    // psi (w - wg) + mu/2 (w - wg)^2
    p.add_objective(AffineExpr::var(w, psi - mu * wg));
    p.add_quadratic(w, w, mu);
    lay.objective_constant += -psi * wg + 0.5 * mu * wg * wg;
  }
  p.add_objective(AffineExpr(lay.objective_constant));
  add_beamformers(p, lay, sample, sc, 1.0 / (M * admm.utility_scale));

  for (std::size_t s = 0; s < sc.embb_slices.size(); ++s) {
    std::vector<int> th, lb;
    const double cth = sc.embb_slices[s].rate_threshold_mbps;
    for (std::size_t i = 0; i < sample.embb[s].size(); ++i) {
      int t = p.add_scalar(key("theta", s, i));
      int l = p.add_scalar(key("lambar", s, i));
      CMatrix h = gain_matrix(sample.embb[s][i], sc.noise_power_w);
      p.add_nonneg(p.trace_inner(h, lay.v_block[s]) - AffineExpr::var(t), "snr_theta");
      p.add_exp(AffineExpr::var(t) + 1.0, 1.0, AffineExpr::var(l, std::numbers::ln2), "embb_log_rate");
      p.add_rsoc(AffineExpr::var(lay.omega[s]), AffineExpr::var(l), {AffineExpr(std::sqrt(2.0 * cth))},
                 "embb_rate");
      th.push_back(t);
      lb.push_back(l);
    }
    lay.theta.push_back(th);
    lay.lambar.push_back(lb);
  }
  AffineExpr budget(sc.total_bandwidth_mhz());
  for (int w : lay.omega) budget = budget - AffineExpr::var(w);
  add_urllc_chain(p, lay, sample, sc, budget);
  return out;
}

BuiltProgram build_minislot_problem(const ChannelSample& gains, const std::vector<double>& omega_fixed_hz,
                                    const ScenarioConfig& sc) {
  check_sample(gains, sc);
  if (omega_fixed_hz.size() != sc.embb_slices.size())
    throw std::invalid_argument("build_minislot_problem: one bandwidth per eMBB slice");
  double used = 0.0;
  for (double w : omega_fixed_hz) {
    if (!(w > 0.0)) throw std::invalid_argument("build_minislot_problem: eMBB bandwidth must be positive");
    used += w;
  }
  if (used > sc.total_bandwidth_hz * (1.0 + 1e-12))
    throw std::invalid_argument("build_minislot_problem: eMBB bandwidth exceeds W");
  BuiltProgram out;
  ConeProgram& p = out.program;
  ProgramLayout& lay = out.layout;
  for (double w : omega_fixed_hz) lay.omega_fixed_mhz.push_back(w * 1e-6);
  lay.objective_scale = utility_bound(gains, sc);
  add_beamformers(p, lay, gains, sc, 1.0 / lay.objective_scale);
  for (std::size_t s = 0; s < sc.embb_slices.size(); ++s) {
    const double need = std::exp2(sc.embb_slices[s].rate_threshold_mbps / lay.omega_fixed_mhz[s]) - 1.0;
    for (const auto& h : gains.embb[s])
      p.add_nonneg(p.trace_inner(gain_matrix(h, sc.noise_power_w), lay.v_block[s]) - need, "embb_rate");
  }
  add_urllc_chain(p, lay, gains, sc, AffineExpr(sc.total_bandwidth_mhz() - used * 1e-6));
  return out;
}

}  // namespace ranslice
