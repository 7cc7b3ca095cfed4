#include "ranslice/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace ranslice {

double QueueConfig::offered_load() const {
  double a = 0.0;
  for (const auto& c : classes) a += c.arrival.arrival_rate() * c.service_mean_ms;
  return a;
}

double erlang_c(double a, int n) {
  if (n < 1) throw std::invalid_argument("erlang_c: need at least one server");
  if (a < 0.0 || a >= n) throw std::domain_error("erlang_c: offered load must be below server count");
  if (a == 0.0) return 0.0;
  double b = 1.0;  // Erlang-B recursion
  for (int k = 1; k <= n; ++k) b = a * b / (k + a * b);
  return n * b / (n - a * (1.0 - b));
}

double erlang_c_wait_tail(double a, int n, double d, double t) {
  double lambda = a / d;
  return erlang_c(a, n) * std::exp(-(n / d - lambda) * t);
}

namespace {

constexpr int kBatches = 20;

struct Arrival {
  double time;
  int cls;
};

double t_quantile_975(int dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, 0.975);
}

void batch_ci(const std::vector<double>& hits, const std::vector<double>& counts, double& mean,
              double& halfwidth) {
  double tot_h = 0.0, tot_n = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    tot_h += hits[b];
    tot_n += counts[b];
  }
  mean = tot_n > 0 ? tot_h / tot_n : 0.0;
  std::vector<double> p;
  for (int b = 0; b < kBatches; ++b)
    if (counts[b] > 0) p.push_back(hits[b] / counts[b]);
  if (p.size() < 2) {
    halfwidth = 0.0;
    return;
  }
  double m = 0.0;
  for (double x : p) m += x;
  m /= p.size();
  double v = 0.0;
  for (double x : p) v += (x - m) * (x - m);
  v /= (p.size() - 1);
  halfwidth = t_quantile_975(static_cast<int>(p.size()) - 1) * std::sqrt(v / p.size());
}

}  // namespace

QueueStats simulate_queue(const QueueConfig& config, double horizon_ms, std::uint64_t seed) {
  if (config.server_count < 1) throw std::invalid_argument("simulate_queue: need at least one server");
  if (!(horizon_ms > 0.0)) throw std::invalid_argument("simulate_queue: horizon must be positive");
  auto rng = make_rng(seed, 0x9e7e);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto expo = [&](double mean) { return -mean * std::log1p(-unif(rng)); };

  // Event list of next batch per class; arrivals are released in time order.
  using Ev = std::pair<double, int>;
  std::priority_queue<Ev, std::vector<Ev>, std::greater<>> next_batch;
  const std::size_t nc = config.classes.size();
  std::vector<double> inter(nc), batch_mean(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    const auto& a = config.classes[k].arrival;
    if (config.batch_mode == BatchMode::poisson) {
      inter[k] = a.mean_batch_interval_ms / a.mean_batch_size;
      batch_mean[k] = 1.0;
    } else {
      inter[k] = a.mean_batch_interval_ms;
      batch_mean[k] = a.mean_batch_size;
    }
    if (a.mean_batch_size > 0.0 && std::isfinite(inter[k])) next_batch.push({expo(inter[k]), static_cast<int>(k)});
  }

  // Server free times; FIFO order means each arrival takes the earliest free server.
  std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
  for (int s = 0; s < config.server_count; ++s) free_at.push(0.0);

  const double warm = 0.1 * horizon_ms;
  const double span = horizon_ms - warm;
  std::vector<double> n_b(kBatches, 0.0), q_b(kBatches, 0.0), p_b(kBatches, 0.0);
  QueueStats st;
  double wait_sum = 0.0;

  while (!next_batch.empty() && next_batch.top().first < horizon_ms) {
    auto [t, k] = next_batch.top();
    next_batch.pop();
    next_batch.push({t + expo(inter[k]), k});
    long long size = 1;
    if (batch_mean[k] > 1.0) {
      std::geometric_distribution<long long> geo(1.0 / batch_mean[k]);
      size = 1 + geo(rng);
    }
    const auto& cls = config.classes[k];
    for (long long p = 0; p < size; ++p) {
      double earliest = free_at.top();
      free_at.pop();
      bool busy = earliest > t;
      double start = busy ? earliest : t;
      double wait = start - t;
      free_at.push(start + expo(cls.service_mean_ms));
      if (t >= warm) {
        int b = std::min(kBatches - 1, static_cast<int>((t - warm) / span * kBatches));
        n_b[b] += 1.0;
        if (busy) q_b[b] += 1.0;
        if (wait > cls.deadline_ms) p_b[b] += 1.0;
        wait_sum += wait;
        ++st.samples_observed;
      }
    }
  }
  batch_ci(q_b, n_b, st.queueing_prob, st.pq_halfwidth);
  batch_ci(p_b, n_b, st.blocking_prob, st.pb_halfwidth);
  st.mean_wait_ms = st.samples_observed > 0 ? wait_sum / st.samples_observed : 0.0;
  st.enough_samples = st.samples_observed >= 10000;
  return st;
}

namespace {

std::vector<QueueClass> staffing_classes(const ScenarioConfig& sc, const ChannelUseVector& r,
                                         std::vector<double>& widths) {
  std::vector<QueueClass> out;
  widths.clear();
  for (std::size_t s = 0; s < sc.urllc_slices.size(); ++s) {
    const double D = sc.urllc_slices[s].deadline_ms;
    for (double ri : r[s]) {
      out.push_back({sc.traffic[s], D, D});
      widths.push_back(per_ue_bandwidth(ri, D, sc.channel_use_density));
    }
  }
  return out;
}

}  // namespace

StaffingReport validate_staffing(const ScenarioConfig& scenario, const ChannelUseVector& r,
                                 std::uint64_t seed, const StaffingCheckOptions& opts) {
  if (scenario.urllc_slices.empty()) throw std::invalid_argument("validate_staffing: no URLLC slices");
  if (r.size() != scenario.urllc_slices.size())
    throw std::invalid_argument("validate_staffing: channel-use vector does not match slices");
  StaffingReport rep;
  rep.alpha = scenario.staffing_alpha();
  rep.varsigma = scenario.queueing_prob_cap;
  rep.staffing = scenario_staffing(scenario, r);
  rep.stripped = rep.staffing;
  rep.stripped.safety_coeff = 0.0;
  rep.stripped.total_bandwidth_hz = rep.staffing.mean_term_hz;

  std::vector<double> widths;
  auto classes = staffing_classes(scenario, r, widths);
  double load = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    double a = classes[k].arrival.arrival_rate() * classes[k].service_mean_ms;
    load += a;
    weighted += a * widths[k];
  }
  rep.offered_load = load;
  rep.omega_bar_hz = weighted / load;
  rep.servers = std::max(1, static_cast<int>(std::lround(rep.staffing.total_bandwidth_hz / rep.omega_bar_hz)));
  rep.stripped_servers = std::max(1, static_cast<int>(std::lround(rep.stripped.total_bandwidth_hz / rep.omega_bar_hz)));
  rep.erlang_c_pq = load < rep.servers ? erlang_c(load, rep.servers) : 1.0;

  QueueConfig qc{rep.servers, classes, opts.batch_mode};
  rep.measured = simulate_queue(qc, opts.horizon_ms, seed);
  qc.server_count = rep.stripped_servers;
  rep.measured_stripped = simulate_queue(qc, opts.horizon_ms, seed + 1);

  rep.staffed_pass = rep.measured.blocking_prob + rep.measured.pb_halfwidth <= rep.alpha &&
                     rep.measured.queueing_prob <= rep.varsigma + rep.measured.pq_halfwidth;
  rep.stripped_exceeds = rep.measured_stripped.blocking_prob - rep.measured_stripped.pb_halfwidth > rep.alpha;

  if (opts.run_recut_check) {
    auto half = classes;
    for (auto& c : half) c.service_mean_ms = c.deadline_ms / 2.0;
    rep.recut = recut_comparison(half, rep.servers, opts.horizon_ms, seed + 2, opts.batch_mode);
    rep.has_recut = true;
  }
  return rep;
}

RecutPoint recut_comparison(const std::vector<QueueClass>& classes, int servers, double horizon_ms,
                            std::uint64_t seed, BatchMode mode) {
  RecutPoint pt;
  pt.servers = servers;
  QueueConfig orig{servers, classes, mode};
  pt.offered_load = orig.offered_load();
  QueueConfig cut{2 * servers, classes, mode};
  for (auto& c : cut.classes) {
    auto [w, d] = recut_prbs(1.0, c.service_mean_ms, 2, c.deadline_ms, c.arrival.arrival_rate());
    (void)w;
    c.service_mean_ms = d;
  }
  pt.original = simulate_queue(orig, horizon_ms, seed);
  pt.recut = simulate_queue(cut, horizon_ms, seed);
  pt.recut_not_worse = pt.recut.blocking_prob <= pt.original.blocking_prob;
  return pt;
}

RecutSweep recut_crossover_sweep(const std::vector<int>& server_counts, double utilization,
                                 double deadline_ms, double horizon_ms, std::uint64_t seed) {
  RecutSweep sw;
  for (std::size_t i = 0; i < server_counts.size(); ++i) {
    int n = server_counts[i];
    double d = deadline_ms / 2.0;
    // one class per UE, each at lambda d = utilization
    std::vector<QueueClass> cls(n, QueueClass{TrafficSpec::with_rate(utilization / d), d, deadline_ms});
    sw.points.push_back(recut_comparison(cls, n, horizon_ms, seed + i));
  }
  for (std::size_t i = sw.points.size(); i-- > 0;) {
    if (!sw.points[i].recut_not_worse) break;
    sw.crossover_servers = sw.points[i].servers;
  }
  return sw;
}

std::string StaffingReport::text() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "staffing: A=" << staffing.mean_term_hz << " Hz, B=" << staffing.variance_term_hz2
     << " Hz^2, c=" << staffing.safety_coeff << ", W_u=" << staffing.total_bandwidth_hz << " Hz\n";
  os << "mapping: omega_bar=" << omega_bar_hz << " Hz, offered load=" << offered_load
     << " Erl, servers=" << servers << " (stripped " << stripped_servers << ")\n";
  os << "erlang-c P_Q=" << erlang_c_pq << "\n";
  os << "staffed: p_b=" << measured.blocking_prob << " +/- " << measured.pb_halfwidth
     << ", P_Q=" << measured.queueing_prob << " +/- " << measured.pq_halfwidth
     << ", arrivals=" << measured.samples_observed << " -> " << (staffed_pass ? "PASS" : "FAIL")
     << " (alpha=" << alpha << ", varsigma=" << varsigma << ")\n";
  os << "stripped: p_b=" << measured_stripped.blocking_prob << " +/- " << measured_stripped.pb_halfwidth
     << " -> " << (stripped_exceeds ? "exceeds alpha" : "within alpha") << "\n";
  if (has_recut)
    os << "recut q=2 at N=" << recut.servers << ": p_b " << recut.original.blocking_prob << " -> "
       << recut.recut.blocking_prob << (recut.recut_not_worse ? " (not worse)" : " (worse)") << "\n";
  return os.str();
}

std::string StaffingReport::csv_header() {
  return "w_u_hz,servers,measured_pb,pb_halfwidth,measured_pq,pq_halfwidth,alpha,varsigma,"
         "stripped_pb,recut_pb_before,recut_pb_after,pass";
}

std::string StaffingReport::csv_row() const {
  std::ostringstream os;
  os << std::setprecision(8) << staffing.total_bandwidth_hz << ',' << servers << ','
     << measured.blocking_prob << ',' << measured.pb_halfwidth << ',' << measured.queueing_prob << ','
     << measured.pq_halfwidth << ',' << alpha << ',' << varsigma << ',' << measured_stripped.blocking_prob
     << ',' << (has_recut ? recut.original.blocking_prob : -1.0) << ','
     << (has_recut ? recut.recut.blocking_prob : -1.0) << ','
     << ((staffed_pass && stripped_exceeds && (!has_recut || recut.recut_not_worse)) ? 1 : 0);
  return os.str();
}

}  // namespace ranslice
