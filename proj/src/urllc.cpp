#include "ranslice/urllc.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace ranslice {

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("q_inverse: p must lie in (0,1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double awgn_capacity(double snr) {
  if (!(snr > 0.0)) throw std::domain_error("capacity: snr must be positive");
  return std::log2(1.0 + snr);
}

double channel_dispersion(double snr) {
  const double l2 = std::numbers::ln2 * std::numbers::ln2;
  return l2 * (1.0 - 1.0 / ((1.0 + snr) * (1.0 + snr)));
}

double finite_blocklength_bits(double r, double beta, double snr) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("finite_blocklength_bits: beta outside (0,1)");
  if (!(r > 0.0)) throw std::domain_error("finite_blocklength_bits: r must be positive");
  return r * awgn_capacity(snr) - q_inverse(beta) * std::sqrt(r * channel_dispersion(snr));
}

double channel_use_bound(double L, double beta, double snr) {
  if (!(beta > 0.0 && beta < 0.5 + 1e-15)) throw std::domain_error("channel_use_bound: beta outside (0,0.5)");
  if (L < 0.0) throw std::domain_error("channel_use_bound: negative packet size");
  const double C = awgn_capacity(snr);
  const double Q = beta >= 0.5 ? 0.0 : q_inverse(beta);
  const double Y = Q * Q;
  if (Y == 0.0) return L / C;
  return L / C + Y / (2.0 * C * C) * (1.0 + std::sqrt(1.0 + 4.0 * L * C / Y));
}

double dispersion_slack_bits(double L, double beta, double snr) {
  double r = channel_use_bound(L, beta, snr);
  double Q = beta >= 0.5 ? 0.0 : q_inverse(beta);
  return Q * std::sqrt(r) * (1.0 - std::sqrt(channel_dispersion(snr)));
}

double per_ue_bandwidth(double r, double deadline_ms, double kappa) {
  if (!(deadline_ms > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("per_ue_bandwidth: deadline and kappa must be positive");
  return r / (kappa * deadline_ms);
}

std::pair<double, double> recut_prbs(double omega, double d, int q, double deadline_ms,
                                     double arrival_rate) {
  if (q < 1) throw std::invalid_argument("recut_prbs: q must be >= 1");
  const double nd = q * d;
  if (nd > deadline_ms * (1.0 + 1e-12)) throw std::invalid_argument("recut_prbs: q*d exceeds deadline");
  if (arrival_rate * d >= 1.0) throw std::invalid_argument("recut_prbs: lambda*d must be < 1");
  return {omega / q, nd};
}

double staffing_coefficient(double varsigma, double alpha, const std::vector<UrllcSliceSpec>& slices,
                            const std::vector<TrafficSpec>& traffic) {
  if (!(alpha > 0.0) || !(varsigma > alpha))
    throw std::invalid_argument("staffing_coefficient: need varsigma > alpha > 0");
  if (slices.size() != traffic.size() || slices.empty())
    throw std::invalid_argument("staffing_coefficient: slice/traffic mismatch");
  double num = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < slices.size(); ++s) {
    double lD = traffic[s].arrival_rate() * slices[s].deadline_ms;
    num += slices[s].ue_count * lD * lD;
    mn = std::min(mn, lD);
  }
  return (alpha - varsigma * alpha) / (varsigma - alpha) * std::sqrt(num / mn);
}

StaffingResult urllc_total_bandwidth(const ChannelUseVector& r, const std::vector<TrafficSpec>& traffic,
                                     const std::vector<double>& deadlines_ms, double kappa, double c) {
  if (r.size() != traffic.size() || r.size() != deadlines_ms.size())
    throw std::invalid_argument("urllc_total_bandwidth: slice dimension mismatch");
  StaffingResult out;
  out.safety_coeff = c;
  for (std::size_t s = 0; s < r.size(); ++s) {
    const double lam = traffic[s].arrival_rate();
    for (double ri : r[s]) {
      out.mean_term_hz += lam * ri / kappa;
      out.variance_term_hz2 += lam * ri * ri / (kappa * kappa * deadlines_ms[s]);
    }
  }
  out.total_bandwidth_hz = out.mean_term_hz + c * std::sqrt(out.variance_term_hz2);
  return out;
}

StaffingResult scenario_staffing(const ScenarioConfig& cfg, const ChannelUseVector& r) {
  std::vector<double> deadlines;
  for (const auto& s : cfg.urllc_slices) deadlines.push_back(s.deadline_ms);
  double c = cfg.urllc_slices.empty()
                 ? 0.0
                 : staffing_coefficient(cfg.queueing_prob_cap, cfg.staffing_alpha(), cfg.urllc_slices, cfg.traffic);
  return urllc_total_bandwidth(r, cfg.traffic, deadlines, cfg.channel_use_density, c);
}

}  // namespace ranslice
