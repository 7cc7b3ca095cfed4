#include "ranslice/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "ranslice/parallel.hpp"

namespace ranslice {

double utility_value(double sum_snr, double eta, double sum_power) { return sum_snr - eta * sum_power; }

SlotUtility slot_utility(const SlotResult& slot, const ChannelSample& gains, const ScenarioConfig& sc) {
  SlotUtility u;
  const double s2 = sc.noise_power_w;
  for (std::size_t s = 0; s < slot.embb_beams.size(); ++s) {
    const CVector& v = slot.embb_beams[s];
    double sum = 0.0;
    for (const auto& h : gains.embb.at(s)) sum += snr(h, v, s2, 1.0);
    u.embb += utility_value(sum, sc.energy_coeff, v.squaredNorm());
  }
  for (std::size_t s = 0; s < slot.urllc_beams.size(); ++s)
    for (std::size_t i = 0; i < slot.urllc_beams[s].size(); ++i) {
      const CVector& g = slot.urllc_beams[s][i];
      u.urllc += utility_value(snr(gains.urllc.at(s).at(i), g, s2, sc.snr_loss), sc.energy_coeff, g.squaredNorm());
    }
  return u;
}

std::string MetricsRow::csv_header() {
  return "sweep_var,sweep_value,algorithm,seed,w_u_mhz,e_u_w,utility,utility_embb,utility_urllc,"
         "infeasible_slots,dbo_iterations,dbo_converged";
}

std::string MetricsRow::csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << sweep_var << ',' << sweep_value << ',' << algorithm << ',' << seed << ','
     << w_u_mhz << ',' << e_u_w << ',' << utility << ',' << utility_embb << ',' << utility_urllc << ','
     << infeasible_slots << ',' << dbo_iterations << ',' << (dbo_converged ? 1 : 0);
  return os.str();
}

MetricsRow long_term_metrics(const SliceSolution& sol, const ScenarioConfig& sc) {
  const int T = sc.minislots_per_slot;
  if (static_cast<int>(sol.slots.size()) != T)
    throw std::invalid_argument("long_term_metrics: expected " + std::to_string(T) + " slots, got " +
                                std::to_string(sol.slots.size()));
  MetricsRow row;
  row.algorithm = sol.algorithm;
  int solved = 0;
  for (const auto& slot : sol.slots) {
    row.utility_embb += slot.utility_embb;
    row.utility_urllc += slot.utility_urllc;
    for (const auto& beams : slot.urllc_beams)
      for (const auto& g : beams) row.e_u_w += g.squaredNorm();
    if (slot.feasible) {
      row.w_u_mhz += slot.urllc_bandwidth_hz * 1e-6;
      ++solved;
    } else {
      ++row.infeasible_slots;
    }
  }
  row.utility_embb /= T;
  row.utility_urllc /= T;
  row.utility = row.utility_embb + sc.slice_priority * row.utility_urllc;
  if (solved) row.w_u_mhz /= solved;
  row.dbo_iterations = sol.dbo.iterations_used;
  row.dbo_converged = sol.dbo.converged;
  return row;
}

CellInputs make_cell_inputs(const ScenarioConfig& sc, std::uint64_t seed) {
  CellInputs in;
  in.topology = place_topology(sc, seed);
  in.samples = draw_sample_set(sc, in.topology, seed * 2654435761ULL + 1, sc.sample_count);
  in.traces = draw_sample_set(sc, in.topology, seed * 2654435761ULL + 2, sc.minislots_per_slot);
  return in;
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, const std::string& var, double value) {
  ScenarioConfig c = base;
  if (var == "lambda") {
    for (auto& t : c.traffic) t = TrafficSpec::with_rate(value, t.mean_batch_size);
  } else if (var == "rho") {
    c.slice_priority = value;
  } else if (var == "eta") {
    c.energy_coeff = value;
  } else {
    throw std::invalid_argument("unknown sweep variable " + var + " (expected lambda, rho or eta)");
  }
  return c;
}

void ExperimentSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("experiment: empty value list");
  if (seeds.empty()) throw std::invalid_argument("experiment: no replication seeds");
  if (algorithms.empty()) throw std::invalid_argument("experiment: no algorithms");
  for (const auto& a : algorithms)
    if (a != "b2o_admm" && a != "no_admm") throw std::invalid_argument("experiment: unknown algorithm " + a);
  for (double v : values) apply_sweep_value(base, sweep_var, v).validate();
}

SliceSolution run_algorithm(const std::string& algorithm, const ScenarioConfig& sc, const CellInputs& in,
                            const PipelineOptions& opt) {
  if (algorithm == "b2o_admm") return run_b2o(sc, in.samples, in.traces, opt);
  if (algorithm == "no_admm") return run_no_admm(sc, in.traces, opt);
  throw std::invalid_argument("unknown algorithm " + algorithm);
}

std::vector<MetricsRow> run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const int nv = static_cast<int>(spec.values.size());
  const int ns = static_cast<int>(spec.seeds.size());
  const int na = static_cast<int>(spec.algorithms.size());
  std::vector<MetricsRow> rows(static_cast<std::size_t>(nv) * ns * na);
  PipelineOptions opt = spec.pipeline;
  // cells run in parallel; keep each cell single-threaded
  opt.dbo.threads = 1;
  opt.slot_threads = 1;
  parallel_for(nv * ns, spec.threads, [&](int cell) {
    const int vi = cell / ns, si = cell % ns;
    const double value = spec.values[vi];
    const std::uint64_t seed = spec.seeds[si];
    ScenarioConfig sc = apply_sweep_value(spec.base, spec.sweep_var, value);
    CellInputs in = make_cell_inputs(sc, seed);
    for (int a = 0; a < na; ++a) {
      try {
        MetricsRow row = long_term_metrics(run_algorithm(spec.algorithms[a], sc, in, opt), sc);
        row.sweep_var = spec.sweep_var;
        row.sweep_value = value;
        row.seed = seed;
        rows[static_cast<std::size_t>(cell) * na + a] = row;
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "sweep cell " << spec.sweep_var << "=" << value << " seed=" << seed << " algorithm="
           << spec.algorithms[a] << ": " << e.what();
        throw std::runtime_error(os.str());
      }
    }
  });
  return rows;
}

std::vector<TrendPoint> aggregate(const std::vector<MetricsRow>& rows, const std::string& algorithm,
                                  double MetricsRow::*field) {
  std::map<double, std::vector<double>> by;
  for (const auto& r : rows)
    if (r.algorithm == algorithm) by[r.sweep_value].push_back(r.*field);
  std::vector<TrendPoint> out;
  for (const auto& [v, xs] : by) {
    TrendPoint p;
    p.value = v;
    p.count = static_cast<int>(xs.size());
    for (double x : xs) p.mean += x;
    p.mean /= p.count;
    if (p.count > 1) {
      double var = 0.0;
      for (double x : xs) var += (x - p.mean) * (x - p.mean);
      var /= (p.count - 1);
      boost::math::students_t t(p.count - 1);
      p.halfwidth = boost::math::quantile(t, 0.975) * std::sqrt(var / p.count);
    }
    out.push_back(p);
  }
  return out;
}

TrendCheck check_trend(const std::vector<TrendPoint>& pts, int direction) {
  TrendCheck c;
  std::ostringstream os;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double step = (pts[k].mean - pts[k - 1].mean) * direction;
    // relative slack for values that agree to rounding
    const double tiny = 1e-9 * std::max({1.0, std::abs(pts[k].mean), std::abs(pts[k - 1].mean)});
    if (step >= -tiny) continue;
    const double ci = std::hypot(pts[k].halfwidth, pts[k - 1].halfwidth);
    if (-step <= ci) {
      ++c.flagged_steps;
      os << "flagged step at " << pts[k].value << " (" << step * direction << " within CI " << ci << "); ";
    } else {
      ++c.violations;
      os << "violation at " << pts[k].value << " (" << step * direction << ", CI " << ci << "); ";
    }
  }
  c.pass = c.violations == 0 && c.flagged_steps <= 1;
  c.detail = os.str();
  return c;
}

bool row_within_budget(const MetricsRow& row, const ScenarioConfig& sc) {
  double cap = 0.0;
  for (double e : sc.power_caps_w) cap += e;
  const double tol = 1e-6;
  return row.w_u_mhz <= sc.total_bandwidth_mhz() * (1.0 + tol) &&
         row.e_u_w <= sc.minislots_per_slot * cap * (1.0 + tol);
}

void write_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << MetricsRow::csv_header() << '\n';
  for (const auto& r : rows) out << r.csv() << '\n';
}

std::string manifest_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["scenario_hash"] = scenario_hash(spec.base);
  j["sweep_var"] = spec.sweep_var;
  j["values"] = spec.values;
  j["algorithms"] = spec.algorithms;
  j["seeds"] = spec.seeds;
  j["solver"] = {{"backend", default_backend()->name()},
                 {"tol_gap_rel", spec.pipeline.dbo.solver.tol_gap_rel},
                 {"tol_feas", spec.pipeline.dbo.solver.tol_feas},
                 {"max_iter", spec.pipeline.dbo.solver.max_iter}};
  j["admm"] = {{"penalty", spec.pipeline.dbo.penalty},
               {"adaptive_penalty", spec.pipeline.dbo.adaptive_penalty},
               {"utility_scale", spec.pipeline.dbo.utility_scale},
               {"threshold_mhz", spec.pipeline.dbo.threshold_mhz},
               {"max_iter", spec.pipeline.dbo.max_iter}};
  j["versions"] = {{"ranslice", "0.1.0"}, {"clarabel", "0.11.1"}};
  j["csv_columns"] = MetricsRow::csv_header();
  return j.dump(2);
}

}  // namespace ranslice
