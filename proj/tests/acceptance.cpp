// Acceptance run: one PASS/FAIL line per criterion on stdout, details in <out>/report.txt.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ranslice/admm.hpp"
#include "ranslice/builders.hpp"
#include "ranslice/metrics.hpp"
#include "ranslice/queueing.hpp"
#include "ranslice/solver.hpp"
#include "ranslice/urllc.hpp"

using namespace ranslice;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::ofstream g_report;
fs::path g_out;

std::ostream& report() { return g_report; }

// ---------------------------------------------------------------------------
// 1. staffing validation at desk-scale targets

Outcome staffing_validation(std::uint64_t seed) {
  ScenarioConfig sc = acceptance_scenario();
  sc.urllc_slices = {{3, 1.0, 1e-2, 2e-8, 160.0}, {5, 2.0, 1e-2, 2e-8, 160.0}};
  sc.traffic = {TrafficSpec::with_rate(0.4), TrafficSpec::with_rate(0.4)};
  sc.queueing_prob_cap = 2e-2;
  sc.validate();
  ChannelUseVector r;
  for (const auto& s : sc.urllc_slices)
    r.emplace_back(s.ue_count, channel_use_bound(s.packet_bits, s.decode_err_prob, 3.0));
  StaffingCheckOptions opt;
  opt.horizon_ms = 2e5;
  StaffingReport rep = validate_staffing(sc, r, seed, opt);
  report() << "[1] staffing\n" << rep.text() << "\n";
  std::ostringstream os;
  os << std::setprecision(4) << "p_b=" << rep.measured.blocking_prob << "+/-" << rep.measured.pb_halfwidth
     << " P_Q=" << rep.measured.queueing_prob << " with N=" << rep.servers << "; stripped N=" << rep.stripped_servers
     << " p_b=" << rep.measured_stripped.blocking_prob << " (alpha=" << rep.alpha << ")";
  return {rep.staffed_pass && rep.stripped_exceeds && rep.measured.enough_samples, os.str()};
}

// ---------------------------------------------------------------------------
// 2. re-cut monotonicity above the crossover

Outcome recut_monotonicity(std::uint64_t seed) {
  const std::vector<int> counts{1, 2, 3, 4, 6, 8, 12, 16};
  const double util = 0.8, deadline = 1.0, horizon = 1e5;
  RecutSweep sw = recut_crossover_sweep(counts, util, deadline, horizon, seed);
  report() << "[2] recut sweep (utilization " << util << ", deadline " << deadline << " ms)\n";
  for (const auto& p : sw.points)
    report() << "  N=" << p.servers << " p_b " << p.original.blocking_prob << " -> " << p.recut.blocking_prob
             << (p.recut_not_worse ? "" : "  (recut worse)") << "\n";
  report() << "  crossover N=" << sw.crossover_servers << "\n";
  if (sw.crossover_servers < 0) return {false, "no crossover observed in the sweep"};
  int n = counts.back();
  for (int c : counts)
    if (c > sw.crossover_servers) {
      n = c;
      break;
    }
  if (n <= sw.crossover_servers) n = 2 * sw.crossover_servers;
  const double d = deadline / 2.0;
  std::vector<QueueClass> cls(n, QueueClass{TrafficSpec::with_rate(util / d), d, deadline});
  RecutPoint pt = recut_comparison(cls, n, horizon, seed + 1000);
  const bool enough = pt.original.samples_observed >= 100000 && pt.recut.samples_observed >= 100000;
  report() << "  confirmation at N=" << n << ": " << pt.original.blocking_prob << " -> " << pt.recut.blocking_prob
           << " arrivals " << pt.original.samples_observed << "/" << pt.recut.samples_observed << "\n\n";
  std::ostringstream os;
  os << "crossover N=" << sw.crossover_servers << "; at N=" << n << " p_b " << pt.original.blocking_prob << " -> "
     << pt.recut.blocking_prob << " (" << pt.original.samples_observed << " arrivals)";
  return {pt.recut_not_worse && enough, os.str()};
}

// ---------------------------------------------------------------------------
// 3. finite-blocklength round trip

Outcome blocklength_round_trip(std::uint64_t seed) {
  auto rng = make_rng(seed, 3);
  std::uniform_real_distribution<double> L(32.0, 512.0), s(0.5, 10.0), lb(-9.0, -3.0);
  int bad = 0;
  double worst_excess = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double l = L(rng), snr = s(rng), beta = std::pow(10.0, lb(rng));
    const double r = channel_use_bound(l, beta, snr);
    const double got = finite_blocklength_bits(r, beta, snr);
    const double slack = dispersion_slack_bits(l, beta, snr);
    const double tol = 1e-9 * l;
    if (got < l - tol || got - l > slack + tol) ++bad;
    worst_excess = std::max(worst_excess, (got - l) / slack);
  }
  std::ostringstream os;
  os << bad << "/100 outside [L, L + slack]; max excess/slack=" << worst_excess;
  report() << "[3] " << os.str() << "\n\n";
  return {bad == 0, os.str()};
}

// ---------------------------------------------------------------------------
// 4. conic solve versus grid search on J = K = 1

Outcome oracle_equivalence(std::uint64_t seed) {
  auto rng = make_rng(seed, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::pair<int, int>> shapes{{1, 1}, {0, 2}, {2, 0}, {1, 0}, {0, 1}};
  int bad = 0;
  double worst = 0.0;
  report() << "[4] oracle equivalence\n";
  for (int k = 0; k < 20; ++k) {
    auto [e, u] = shapes[k % shapes.size()];
    ScenarioConfig sc = acceptance_scenario();
    sc.rrh_count = 1;
    sc.antennas_per_rrh = 1;
    sc.power_caps_w = {0.5 + unit(rng)};
    sc.embb_slices.clear();
    if (e > 0) sc.embb_slices = {{e, 1.0 + 3.0 * unit(rng)}};
    if (u > 0) {
      sc.urllc_slices[0].ue_count = u;
      sc.traffic = {TrafficSpec::with_rate(0.05 + 0.4 * unit(rng))};
    } else {
      sc.urllc_slices.clear();
      sc.traffic.clear();
    }
    const std::uint64_t s = seed * 100 + k;
    Topology topo = place_topology(sc, s);
    ChannelSample smp = draw_sample_set(sc, topo, s, 1)[0];
    const int M = 2;
    AdmmState st = AdmmState::initial(static_cast<int>(sc.embb_slices.size()), M, sc.total_bandwidth_mhz());
    st.utility_scale = default_utility_scale(sc, M);
    if (e > 0) {
      st.omega_global[0] = 1.0 + 2.0 * unit(rng);
      st.duals[0][0] = unit(rng) - 0.5;
    }
    SolverSolution sol = solve(build_subproblem(smp, 0, st, sc).program);
    double rel = 1.0;
    std::string note;
    try {
      BruteForceResult bf = brute_force_solve(sc, smp, st, 0, 200);
      if (sol.ok()) {
        rel = std::abs(sol.objective - bf.objective) / std::max(std::abs(bf.objective), 1e-9);
      } else {
        note = std::string(" conic ") + status_name(sol.status);
      }
      report() << "  case " << k << " (" << e << " eMBB, " << u << " URLLC): conic " << sol.objective << " grid "
               << bf.objective << " rel " << rel << note << "\n";
    } catch (const std::runtime_error& ex) {
      // both infeasible counts as agreement
      const bool agree = sol.status == SolveStatus::infeasible;
      rel = agree ? 0.0 : 1.0;
      report() << "  case " << k << ": grid infeasible, conic " << status_name(sol.status) << "\n";
    }
    if (!(rel <= 0.01)) ++bad;
    worst = std::max(worst, rel);
  }
  report() << "\n";
  std::ostringstream os;
  os << bad << "/20 cases off by more than 1%; worst relative gap " << worst;
  return {bad == 0, os.str()};
}

// ---------------------------------------------------------------------------
// 5. rank-one tightness of the lifted matrices

struct GapStats {
  int problems = 0;
  int blocks = 0;
  int loose = 0;
  double worst = 0.0;
  int loose_multicast = 0;
  int loose_single = 0;
  int above_floor = 0;  // loose blocks whose absolute lambda_2 also exceeds 1e-6
};

void audit_program(const std::string& label, const BuiltProgram& bp, const ScenarioConfig& sc, GapStats& st,
                   nlohmann::json& counterexamples) {
  SolverSolution sol = solve(bp.program);
  if (!sol.ok()) {
    report() << "  " << label << ": not solved (" << status_name(sol.status) << ")\n";
    return;
  }
  ++st.problems;
  nlohmann::json bad = nlohmann::json::array();
  for (std::size_t b = 0; b < sol.matrix_values.size(); ++b) {
    const CMatrix& m = sol.matrix_values[b];
    const double gap = rank1_gap(m);
    ++st.blocks;
    st.worst = std::max(st.worst, gap);
    if (gap <= 1e-6) continue;
    ++st.loose;
    const std::string name = bp.program.blocks()[b].name;
    bool multicast = false;
    for (std::size_t s = 0; s < bp.layout.v_block.size(); ++s)
      if (bp.layout.v_block[s] == static_cast<int>(b) && sc.embb_slices[s].ue_count > 1) multicast = true;
    (multicast ? st.loose_multicast : st.loose_single)++;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    if (ev[ev.size() - 2] > 1e-6) ++st.above_floor;
    bad.push_back({{"block", name}, {"gap", gap}, {"eigenvalues", ev}, {"trace", m.trace().real()},
                   {"multicast", multicast}});
  }
  if (!bad.empty()) {
    const std::string file = label + ".prog";
    std::ofstream(g_out / "counterexamples" / file) << [&] {
      std::ostringstream os;
      bp.program.write(os);
      return os.str();
    }();
    counterexamples.push_back({{"problem", label}, {"program_file", file}, {"status_message", sol.message},
                               {"blocks", bad}});
  }
}

Outcome sdr_tightness(std::uint64_t seed) {
  fs::create_directories(g_out / "counterexamples");
  GapStats st;
  nlohmann::json cex = nlohmann::json::array();
  report() << "[5] rank-one tightness\n";
  ScenarioConfig j2 = acceptance_scenario();
  ScenarioConfig j3 = acceptance_scenario();
  j3.rrh_count = 3;
  j3.power_caps_w = {1.0, 1.0, 1.0};
  ScenarioConfig full = full_scenario();
  struct Source {
    std::string tag;
    ScenarioConfig sc;
    int count;
  };
  const std::vector<Source> sources{{"j2", j2, 10}, {"j3", j3, 10}, {"full", full, 5}};
  for (const auto& src : sources) {
    CellInputs in = make_cell_inputs(src.sc, seed);
    const int M = static_cast<int>(in.samples.size());
    AdmmState admm = AdmmState::initial(static_cast<int>(src.sc.embb_slices.size()), M, src.sc.total_bandwidth_mhz());
    admm.utility_scale = default_utility_scale(src.sc, M);
    std::vector<double> omega_hz(src.sc.embb_slices.size(), 0.5 * src.sc.total_bandwidth_hz / src.sc.embb_slices.size());
    for (int k = 0; k < src.count; ++k) {
      audit_program(src.tag + "_sub_" + std::to_string(k), build_subproblem(in.samples[k], k, admm, src.sc), src.sc,
                    st, cex);
      audit_program(src.tag + "_slot_" + std::to_string(k),
                    build_minislot_problem(in.traces[k % in.traces.size()], omega_hz, src.sc), src.sc, st, cex);
    }
  }
  std::ofstream(g_out / "counterexamples" / "index.json") << cex.dump(2);
  std::ostringstream os;
  os << st.problems << " problems, " << st.blocks << " matrices, " << st.loose << " with gap > 1e-6 ("
     << st.loose_multicast << " multicast V, " << st.loose_single << " other; " << st.above_floor
     << " with absolute lambda_2 > 1e-6); worst gap " << st.worst;
  report() << "  " << os.str() << "\n  counterexamples: " << (g_out / "counterexamples").string() << "\n\n";
  return {st.problems >= 50 && st.loose == 0, os.str()};
}

// ---------------------------------------------------------------------------
// 6. ADMM convergence; 7. feasibility audit (shared pipeline run)

struct AuditTotals {
  int slots = 0;
  int failed = 0;
  double worst_power = 0.0;
  double worst_bandwidth = 0.0;
  double worst_rate = 0.0;
  std::vector<std::string> notes;
};

void audit_slots(const ScenarioConfig& sc, const std::vector<double>& omega_hz, const SampleSet& traces,
                 const std::vector<SlotResult>& slots, const std::string& label, AuditTotals& tot) {
  const double tol = 1e-6;
  const int J = sc.rrh_count, K = sc.antennas_per_rrh;
  double used = 0.0;
  for (double w : omega_hz) used += w;
  for (std::size_t t = 0; t < slots.size(); ++t) {
    const SlotResult& s = slots[t];
    ++tot.slots;
    bool ok = s.feasible;
    std::vector<double> p(J, 0.0);
    auto add = [&](const CVector& w) {
      for (int j = 0; j < J; ++j) p[j] += w.segment(j * K, K).squaredNorm();
    };
    for (const auto& v : s.embb_beams) add(v);
    for (const auto& gs : s.urllc_beams)
      for (const auto& g : gs) add(g);
    for (int j = 0; j < J; ++j) {
      const double excess = p[j] / sc.power_caps_w[j] - 1.0;
      tot.worst_power = std::max(tot.worst_power, excess);
      ok = ok && excess <= tol;
    }
    const double bw = (used + s.urllc_bandwidth_hz) / sc.total_bandwidth_hz - 1.0;
    tot.worst_bandwidth = std::max(tot.worst_bandwidth, bw);
    ok = ok && bw <= tol;
    for (std::size_t e = 0; e < sc.embb_slices.size(); ++e)
      for (const auto& h : traces[t].embb[e]) {
        const double rate = embb_rate(omega_hz[e], snr(h, s.embb_beams[e], sc.noise_power_w)) * 1e-6;
        const double shortfall = 1.0 - rate / sc.embb_slices[e].rate_threshold_mbps;
        tot.worst_rate = std::max(tot.worst_rate, shortfall);
        ok = ok && shortfall <= tol;
      }
    if (!ok) {
      ++tot.failed;
      std::ostringstream os;
      os << label << " slot " << t << (s.feasible ? "" : " (flagged infeasible)") << " bw_excess=" << bw;
      tot.notes.push_back(os.str());
    }
  }
}

Outcome admm_convergence(const DboResult& r, double seconds) {
  const auto& res = r.report.residuals;
  const int n = static_cast<int>(res.size());
  // envelope: maxima of consecutive 10-iteration windows over the final 50 iterations
  const int first = std::max(0, n - 50);
  std::vector<double> env;
  for (int a = first; a < n; a += 10) {
    double m = 0.0;
    for (int k = a; k < std::min(n, a + 10); ++k) m = std::max(m, res[k]);
    env.push_back(m);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < env.size(); ++k) monotone = monotone && env[k] <= env[k - 1];
  std::ostringstream os;
  os << std::setprecision(4) << "converged=" << r.report.converged << " after " << r.report.iterations_used
     << " iterations, final delta=" << (n ? res.back() : 0.0) << " MHz, omega=" << r.omega_hz[0] * 1e-6
     << " MHz, window maxima";
  for (double v : env) os << " " << v;
  os << ", " << seconds << " s";
  report() << "[6] " << os.str() << "\n  penalties:";
  for (std::size_t k = 0; k < r.report.penalties.size(); k += 10) report() << " " << r.report.penalties[k];
  report() << "\n\n";
  const bool pass = r.report.converged && r.report.iterations_used <= 250 && monotone && seconds <= 600.0;
  return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 8. algorithm ordering and sweep trends

Outcome ordering_and_trends(std::uint64_t seed, AuditTotals& audit, int pairs, int reps) {
  const ScenarioConfig base = acceptance_scenario();
  PipelineOptions po;
  int wins = 0;
  std::vector<MetricsRow> paired;
  report() << "[8] paired seeds\n";
  for (int k = 0; k < pairs; ++k) {
    const std::uint64_t s = seed + 1 + k;
    CellInputs in = make_cell_inputs(base, s);
    SliceSolution b = run_b2o(base, in.samples, in.traces, po);
    SliceSolution n = run_no_admm(base, in.traces, po);
    audit_slots(base, b.omega_hz, in.traces, b.slots, "pair seed " + std::to_string(s), audit);
    MetricsRow rb = long_term_metrics(b, base), rn = long_term_metrics(n, base);
    rb.seed = rn.seed = s;
    paired.push_back(rb);
    paired.push_back(rn);
    const bool win = rb.utility >= rn.utility - 1e-9 * std::abs(rn.utility);
    wins += win;
    report() << "  seed " << s << ": B2O " << rb.utility << " (omega " << b.omega_hz[0] * 1e-6 << " MHz, "
             << rb.dbo_iterations << " it) vs NoADMM " << rn.utility << " (omega " << n.omega_hz[0] * 1e-6
             << " MHz)" << (win ? "" : "  <- NoADMM ahead") << "\n";
  }
  write_csv(paired, (g_out / "paired.csv").string());

  struct Sweep {
    std::string var;
    std::vector<double> values;
    std::vector<std::string> algos;
    double MetricsRow::*field;
    int direction;
    std::string label;
  };
  const std::vector<Sweep> sweeps{
      {"lambda", {0.1, 0.3, 0.5, 0.7}, {"b2o_admm"}, &MetricsRow::w_u_mhz, +1, "W_u(lambda)"},
      {"eta", {250.0, 500.0, 1000.0, 2000.0}, {"b2o_admm", "no_admm"}, &MetricsRow::utility, -1, "U(eta)"},
      {"rho", {100.0, 250.0, 500.0, 1000.0}, {"b2o_admm"}, &MetricsRow::utility, +1, "U(rho)"}};
  bool trends = true;
  std::ostringstream tr;
  for (const auto& sw : sweeps) {
    ExperimentSpec spec;
    spec.base = base;
    spec.sweep_var = sw.var;
    spec.values = sw.values;
    spec.algorithms = sw.algos;
    for (int r = 0; r < reps; ++r) spec.seeds.push_back(seed + 101 + r);
    spec.pipeline = po;
    spec.threads = 1;
    auto rows = run_sweep(spec);
    write_csv(rows, (g_out / ("sweep_" + sw.var + ".csv")).string());
    std::ofstream(g_out / ("sweep_" + sw.var + ".json")) << manifest_json(spec);
    for (const auto& row : rows)
      if (!row_within_budget(row, apply_sweep_value(base, sw.var, row.sweep_value))) {
        trends = false;
        report() << "  budget violation in " << sw.var << " row " << row.csv() << "\n";
      }
    for (const auto& algo : sw.algos) {
      TrendCheck c = check_trend(aggregate(rows, algo, sw.field), sw.direction);
      trends = trends && c.pass;
      tr << " " << sw.label << "[" << algo << "]=" << (c.pass ? "ok" : "FAIL");
      if (c.flagged_steps) tr << "(" << c.flagged_steps << " flagged)";
      report() << "  " << sw.label << " " << algo << ":";
      for (const auto& p : aggregate(rows, algo, sw.field))
        report() << " " << p.value << ":" << p.mean << "+/-" << p.halfwidth;
      report() << " -> " << (c.pass ? "pass" : "fail") << " " << c.detail << "\n";
    }
  }
  report() << "\n";
  const bool order = wins * 10 >= 9 * pairs;
  std::ostringstream os;
  os << "B2O >= NoADMM in " << wins << "/" << pairs << " pairs;" << tr.str();
  return {order && trends, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria run"};
  std::string out = "acceptance_out";
  std::uint64_t seed = 1;
  bool strict = false;
  std::vector<int> only;
  int pairs = 20, reps = 3;
  app.add_option("--out", out, "directory for the report, CSVs and counterexamples");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--only", only, "run only these criteria (1-8)");
  app.add_option("--pairs", pairs, "paired seeds for criterion 8");
  app.add_option("--reps", reps, "replications per sweep value for criterion 8");
  app.add_flag("--strict", strict, "exit nonzero when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  g_out = out;
  fs::create_directories(g_out);
  g_report.open(g_out / "report.txt");
  auto wanted = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };

  int failed = 0, ran = 0;
  std::vector<std::string> verdicts;
  auto run = [&](int k, const std::string& name, const std::function<Outcome()>& fn) {
    if (!wanted(k)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++ran;
    failed += !o.pass;
    std::ostringstream line;
    line << "criterion " << k << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << " - " << o.summary << " ("
         << std::fixed << std::setprecision(1) << dt << " s)";
    std::cout << line.str() << std::endl;
    verdicts.push_back(line.str());
    report() << "== criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "\n\n";
    g_report.flush();
  };

  run(1, "staffing validation", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = staffing_validation(seed);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > 120.0) o = {false, o.summary + "; over the 2 min budget"};
    return o;
  });
  run(2, "recut monotonicity", [&] { return recut_monotonicity(seed); });
  run(3, "blocklength round trip", [&] { return blocklength_round_trip(seed); });
  run(4, "oracle equivalence", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = oracle_equivalence(seed);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > 300.0) o = {false, o.summary + "; over the 5 min budget"};
    return o;
  });
  run(5, "rank-one tightness", [&] { return sdr_tightness(seed); });

  AuditTotals audit;
  if (wanted(6) || wanted(7)) {
    const ScenarioConfig sc = acceptance_scenario();
    CellInputs in = make_cell_inputs(sc, seed);
    PipelineOptions po;
    std::ofstream progress(g_out / "dbo_progress.csv");
    progress << ProgressRow::csv_header() << "\n";
    po.dbo.progress = [&](const ProgressRow& r) { progress << r.csv() << "\n"; };
    DboResult dbo;
    double secs = 0.0;
    std::string err;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      dbo = run_dbo(sc, in.samples, po.dbo);
      secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      auto slots = run_minislots(sc, dbo.omega_hz, in.traces, po);
      audit_slots(sc, dbo.omega_hz, in.traces, slots, "seed " + std::to_string(seed), audit);
    } catch (const std::exception& e) {
      err = e.what();
    }
    run(6, "admm convergence", [&] {
      if (!err.empty()) return Outcome{false, "error: " + err};
      return admm_convergence(dbo, secs);
    });
  }
  Outcome ordering;
  const bool want8 = wanted(8);
  if (want8) {
    // criterion 8 also feeds the feasibility audit with every B2O run it makes
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ordering = ordering_and_trends(seed, audit, pairs, reps);
    } catch (const std::exception& e) {
      ordering = {false, std::string("error: ") + e.what()};
    }
    ordering.summary += " [" + std::to_string(static_cast<int>(
                                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count())) +
                        " s]";
  }
  run(7, "feasibility audit", [&] {
    report() << "[7] audited " << audit.slots << " slots\n";
    for (const auto& n : audit.notes) report() << "  " << n << "\n";
    report() << "\n";
    std::ostringstream os;
    os << audit.failed << "/" << audit.slots << " slots fail; worst power excess " << audit.worst_power
       << ", bandwidth excess " << audit.worst_bandwidth << ", rate shortfall " << audit.worst_rate;
    return Outcome{audit.slots > 0 && audit.failed == 0, os.str()};
  });
  if (want8) run(8, "ordering and trends", [&] { return ordering; });

  std::cout << "acceptance: " << ran - failed << "/" << ran << " criteria passed; details in "
            << (g_out / "report.txt").string() << std::endl;
  report() << "== summary\n";
  for (const auto& v : verdicts) report() << v << "\n";
  report() << "acceptance: " << ran - failed << "/" << ran << " criteria passed\n";
  return strict && failed > 0 ? 1 : 0;
}
