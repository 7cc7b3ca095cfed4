// ranslice: dimensioning, queue validation, single-scenario solves, sweeps and cone census.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ranslice/admm.hpp"
#include "ranslice/builders.hpp"
#include "ranslice/metrics.hpp"
#include "ranslice/queueing.hpp"
#include "ranslice/urllc.hpp"

using namespace ranslice;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string scenario_file;
  bool full_size = false;
  std::uint64_t seed = 1;
  std::string out = "ranslice_out";
  int threads = 0;
};

ScenarioConfig load(const Common& c) {
  if (!c.scenario_file.empty()) return load_scenario(c.scenario_file);
  return c.full_size ? full_scenario() : acceptance_scenario();
}

fs::path out_dir(const Common& c) {
  fs::path p(c.out);
  fs::create_directories(p);
  return p;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  return v;
}

ChannelUseVector bound_channel_uses(const ScenarioConfig& sc, double snr) {
  ChannelUseVector r;
  for (const auto& s : sc.urllc_slices)
    r.emplace_back(s.ue_count, channel_use_bound(s.packet_bits, s.decode_err_prob, snr));
  return r;
}

int cmd_dimension(const Common& c, double snr) {
  const ScenarioConfig sc = load(c);
  const ChannelUseVector r = bound_channel_uses(sc, snr);
  const StaffingResult st = scenario_staffing(sc, r);
  nlohmann::json j;
  j["snr"] = snr;
  j["channel_uses"] = r;
  j["mean_term_hz"] = st.mean_term_hz;
  j["variance_term_hz2"] = st.variance_term_hz2;
  j["safety_coeff"] = st.safety_coeff;
  j["w_u_hz"] = st.total_bandwidth_hz;
  j["fits"] = st.total_bandwidth_hz <= sc.total_bandwidth_hz;
  j["scenario_hash"] = scenario_hash(sc);
  std::ofstream(out_dir(c) / "dimension.json") << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return st.total_bandwidth_hz <= sc.total_bandwidth_hz ? 0 : 1;
}

int cmd_validate_queue(const Common& c, double snr, double horizon, bool batched) {
  const ScenarioConfig sc = load(c);
  StaffingCheckOptions opt;
  opt.horizon_ms = horizon;
  opt.batch_mode = batched ? BatchMode::batched : BatchMode::poisson;
  const StaffingReport rep = validate_staffing(sc, bound_channel_uses(sc, snr), c.seed, opt);
  std::ofstream csv(out_dir(c) / "validate_queue.csv");
  csv << StaffingReport::csv_header() << "\n" << rep.csv_row() << "\n";
  std::cout << rep.text();
  return rep.staffed_pass ? 0 : 1;
}

// Slot-level audit shared by solve and sweep output.
bool slots_within_budget(const ScenarioConfig& sc, const SliceSolution& sol, std::string& why) {
  const int J = sc.rrh_count, K = sc.antennas_per_rrh;
  double used = 0.0;
  for (double w : sol.omega_hz) used += w;
  for (std::size_t t = 0; t < sol.slots.size(); ++t) {
    const SlotResult& s = sol.slots[t];
    if (!s.feasible) continue;
    std::vector<double> p(J, 0.0);
    auto add = [&](const CVector& w) {
      for (int j = 0; j < J; ++j) p[j] += w.segment(j * K, K).squaredNorm();
    };
    for (const auto& v : s.embb_beams) add(v);
    for (const auto& gs : s.urllc_beams)
      for (const auto& g : gs) add(g);
    for (int j = 0; j < J; ++j)
      if (p[j] > sc.power_caps_w[j] * (1.0 + 1e-6)) {
        why = "slot " + std::to_string(t) + " exceeds the power cap of RRH " + std::to_string(j);
        return false;
      }
    if (used + s.urllc_bandwidth_hz > sc.total_bandwidth_hz * (1.0 + 1e-6)) {
      why = "slot " + std::to_string(t) + " exceeds the bandwidth budget";
      return false;
    }
  }
  return true;
}

int cmd_solve(const Common& c, const std::vector<std::string>& algos) {
  const ScenarioConfig sc = load(c);
  const CellInputs in = make_cell_inputs(sc, c.seed);
  PipelineOptions po;
  po.slot_threads = c.threads;
  std::vector<MetricsRow> rows;
  bool ok = true;
  nlohmann::json bw = nlohmann::json::object();
  for (const auto& a : algos) {
    SliceSolution sol = run_algorithm(a, sc, in, po);
    MetricsRow row = long_term_metrics(sol, sc);
    row.seed = c.seed;
    std::string why;
    if (!slots_within_budget(sc, sol, why) || !row_within_budget(row, sc)) {
      ok = false;
      std::cerr << a << ": audit failed: " << (why.empty() ? "row budget" : why) << "\n";
    }
    bw[a] = sol.omega_hz;
    std::cout << a << ": utility=" << row.utility << " W_u=" << row.w_u_mhz << " MHz E_u=" << row.e_u_w
              << " W infeasible_slots=" << row.infeasible_slots << " dbo_iterations=" << row.dbo_iterations
              << (row.dbo_converged ? "" : " (not converged)") << "\n";
    rows.push_back(row);
  }
  const fs::path dir = out_dir(c);
  write_csv(rows, (dir / "solve.csv").string());
  ExperimentSpec spec;
  spec.base = sc;
  spec.values = {0.0};
  spec.algorithms = algos;
  spec.seeds = {c.seed};
  auto manifest = nlohmann::json::parse(manifest_json(spec));
  manifest["embb_bandwidth_hz"] = bw;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
  return ok ? 0 : 1;
}

int cmd_sweep(const Common& c, const std::string& sweep, const std::vector<std::string>& algos, int reps) {
  const auto eq = sweep.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("--sweep expects var=v1,v2,...");
  ExperimentSpec spec;
  spec.base = load(c);
  spec.sweep_var = sweep.substr(0, eq);
  spec.values = parse_values(sweep.substr(eq + 1));
  spec.algorithms = algos;
  spec.seeds.clear();
  for (int k = 0; k < reps; ++k) spec.seeds.push_back(c.seed + k);
  spec.threads = c.threads;
  spec.validate();
  const auto rows = run_sweep(spec);
  const fs::path dir = out_dir(c);
  write_csv(rows, (dir / ("sweep_" + spec.sweep_var + ".csv")).string());
  std::ofstream(dir / "manifest.json") << manifest_json(spec) << "\n";
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << r.csv() << "\n";
    if (!row_within_budget(r, apply_sweep_value(spec.base, spec.sweep_var, r.sweep_value))) {
      ok = false;
      std::cerr << "budget audit failed: " << r.csv() << "\n";
    }
  }
  return ok ? 0 : 1;
}

int cmd_census(const Common& c, bool dump) {
  const ScenarioConfig sc = load(c);
  const CellInputs in = make_cell_inputs(sc, c.seed);
  const int M = static_cast<int>(in.samples.size());
  AdmmState st = AdmmState::initial(static_cast<int>(sc.embb_slices.size()), M, sc.total_bandwidth_mhz());
  st.utility_scale = default_utility_scale(sc, M);
  std::vector<double> omega(sc.embb_slices.size(),
                            0.5 * sc.total_bandwidth_hz / std::max<std::size_t>(1, sc.embb_slices.size()));
  const BuiltProgram sub = build_subproblem(in.samples[0], 0, st, sc);
  const BuiltProgram slot = build_minislot_problem(in.traces[0], omega, sc);
  auto to_json = [](const ConeCensus& k) {
    return nlohmann::json{{"zero", k.zero}, {"nonneg", k.nonneg}, {"soc", k.soc},         {"rsoc", k.rsoc},
                          {"exp", k.exp},   {"psd", k.psd},       {"scalar_vars", k.scalar_vars},
                          {"psd_vars", k.psd_vars}};
  };
  nlohmann::json j{{"subproblem", to_json(cone_census(sub.program))},
                   {"minislot", to_json(cone_census(slot.program))}};
  const fs::path dir = out_dir(c);
  std::ofstream(dir / "census.json") << j.dump(2) << "\n";
  if (dump) {
    std::ofstream a(dir / "subproblem.prog"), b(dir / "minislot.prog");
    sub.program.write(a);
    slot.program.write(b);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAN slicing dimensioning and optimization"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--scenario", c.scenario_file, "scenario YAML file")->check(CLI::ExistingFile);
  app.add_flag("--full-config,--full-paper-config", c.full_size, "use the full-size scenario instead of the acceptance one");
  app.add_option("--seed", c.seed, "seed for topology, channels and traffic");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--threads", c.threads, "worker threads (0 = hardware)");

  double snr = 3.0, horizon = 2e5;
  bool batched = false, dump = false;
  int reps = 1;
  std::string sweep;
  std::vector<std::string> algos{"b2o_admm", "no_admm"};

  auto* dim = app.add_subcommand("dimension", "URLLC bandwidth from the staffing rule");
  dim->add_option("--snr", snr, "SNR at which channel uses are bounded");

  auto* vq = app.add_subcommand("validate-queue", "check the staffing against the queue simulator");
  vq->add_option("--snr", snr, "SNR at which channel uses are bounded");
  vq->add_option("--horizon-ms", horizon, "simulated time");
  vq->add_flag("--batched", batched, "batch arrivals instead of Poisson");

  auto* sv = app.add_subcommand("solve", "run the pipeline on one scenario");
  sv->add_option("--algo", algos, "algorithms: b2o_admm, no_admm")->delimiter(',');

  auto* sw = app.add_subcommand("sweep", "parameter sweep");
  sw->add_option("--sweep", sweep, "var=v1,v2,... with var in lambda, rho, eta")->required();
  sw->add_option("--algo", algos, "algorithms: b2o_admm, no_admm")->delimiter(',');
  sw->add_option("--reps", reps, "replication seeds starting at --seed");

  auto* cs = app.add_subcommand("census", "cone counts of the built programs");
  cs->add_flag("--dump", dump, "also write the program text");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*dim) return cmd_dimension(c, snr);
    if (*vq) return cmd_validate_queue(c, snr, horizon, batched);
    if (*sv) return cmd_solve(c, algos);
    if (*sw) return cmd_sweep(c, sweep, algos, reps);
    if (*cs) return cmd_census(c, dump);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
