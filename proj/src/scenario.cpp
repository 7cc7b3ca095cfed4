#include "ranslice/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

namespace ranslice {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument("scenario: " + what);
}

// splitmix64 finalizer, used to derive stream seeds.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Point uniform_in_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double rr = radius * std::sqrt(u(rng));
  double th = 2.0 * std::numbers::pi * u(rng);
  return {rr * std::cos(th), rr * std::sin(th)};
}

}  // namespace

TrafficSpec TrafficSpec::with_rate(double rate_per_ms, double batch_size) {
  if (!(rate_per_ms > 0.0) || !(batch_size > 0.0))
    throw std::invalid_argument("traffic: rate and batch size must be positive");
  return TrafficSpec{batch_size / rate_per_ms, batch_size};
}

int ScenarioConfig::embb_ue_count() const {
  int n = 0;
  for (const auto& s : embb_slices) n += s.ue_count;
  return n;
}

int ScenarioConfig::urllc_ue_count() const {
  int n = 0;
  for (const auto& s : urllc_slices) n += s.ue_count;
  return n;
}

double ScenarioConfig::staffing_alpha() const {
  double a = 0.0;
  for (const auto& s : urllc_slices) a = std::max(a, s.blocking_prob);
  return a;
}

void ScenarioConfig::validate() const {
  require(rrh_count >= 1, "rrh_count must be >= 1");
  require(antennas_per_rrh >= 1, "antennas_per_rrh must be >= 1");
  require(circle_radius_km > 0.0, "circle_radius must be positive");
  require(total_bandwidth_hz > 0.0, "total_bandwidth must be positive");
  require(static_cast<int>(power_caps_w.size()) == rrh_count, "one power cap per RRH");
  for (double e : power_caps_w) require(e > 0.0, "power caps must be positive");
  require(noise_power_w > 0.0, "noise_power must be positive");
  require(snr_loss > 1.0, "snr_loss must exceed 1");
  require(channel_use_density > 0.0, "channel_use_density must be positive");
  require(energy_coeff > 0.0, "energy_coeff must be positive");
  require(slice_priority > 0.0, "slice_priority must be positive");
  require(sample_count >= 1, "sample_count must be >= 1");
  require(minislots_per_slot >= 1, "minislots_per_slot must be >= 1");
  require(min_distance_km >= 0.0, "min_distance must be nonnegative");
  require(shadowing_std_db >= 0.0, "shadowing std must be nonnegative");
  for (const auto& s : embb_slices) {
    require(s.ue_count >= 1, "eMBB ue_count must be >= 1");
    require(s.rate_threshold_mbps > 0.0, "eMBB rate_threshold must be positive");
  }
  require(traffic.size() == urllc_slices.size(), "one traffic entry per URLLC slice");
  for (std::size_t k = 0; k < urllc_slices.size(); ++k) {
    const auto& s = urllc_slices[k];
    const auto& t = traffic[k];
    require(s.ue_count >= 1, "URLLC ue_count must be >= 1");
    require(s.deadline_ms > 0.0, "URLLC deadline must be positive");
    require(s.blocking_prob > 0.0 && s.blocking_prob < 1.0, "blocking_prob must lie in (0,1)");
    require(s.decode_err_prob > 0.0 && s.decode_err_prob < 0.5, "decode_err_prob must lie in (0,0.5)");
    require(s.packet_bits >= 0.0, "packet_bits must be nonnegative");
    require(t.mean_batch_interval_ms > 0.0 && t.mean_batch_size > 0.0,
            "traffic interval and batch size must be positive");
    require(t.arrival_rate() * s.deadline_ms < 1.0, "arrival_rate * deadline must be < 1");
    require(queueing_prob_cap > s.blocking_prob, "queueing_prob_cap must exceed blocking_prob");
  }
}

ScenarioConfig full_scenario() {
  ScenarioConfig c;
  c.rrh_count = 3;
  c.antennas_per_rrh = 2;
  c.circle_radius_km = 0.5;
  c.embb_slices = {{4, 6.0}, {6, 4.0}, {8, 2.0}};
  c.urllc_slices = {{3, 1.0, 1e-5, 2e-8, 160.0}, {5, 2.0, 1e-5, 2e-8, 160.0}};
  c.traffic = {TrafficSpec::with_rate(0.1), TrafficSpec::with_rate(0.1)};
  c.total_bandwidth_hz = 4e6;
  c.power_caps_w = {1.0, 1.0, 1.0};
  c.noise_power_w = 1e-14;
  c.snr_loss = 1.5;
  c.channel_use_density = 5.12e-4;
  c.energy_coeff = 1000.0;
  c.slice_priority = 500.0;
  c.sample_count = 100;
  c.minislots_per_slot = 60;
  c.queueing_prob_cap = 2e-5;
  c.rng_seed = 1;
  return c;
}

ScenarioConfig acceptance_scenario() {
  ScenarioConfig c = full_scenario();
  c.rrh_count = 2;
  c.power_caps_w = {1.0, 1.0};
  c.embb_slices = {{2, 4.0}};
  c.urllc_slices = {{2, 1.0, 1e-5, 2e-8, 160.0}};
  c.traffic = {TrafficSpec::with_rate(0.1)};
  c.sample_count = 20;
  c.minislots_per_slot = 10;
  return c;
}

double distance_km(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Topology place_topology(const ScenarioConfig& config, std::uint64_t seed) {
  if (config.rrh_count < 1 || !(config.circle_radius_km > 0.0))
    throw std::invalid_argument("place_topology: need J >= 1 and positive radius");
  Topology topo;
  const double r = config.circle_radius_km;
  for (int j = 0; j < config.rrh_count; ++j) {
    double th = 2.0 * std::numbers::pi * j / config.rrh_count;
    topo.rrh_positions.push_back({r * std::cos(th), r * std::sin(th)});
  }
  auto rng = make_rng(seed, 0x70b0);
  for (const auto& s : config.embb_slices) {
    std::vector<Point> ues;
    for (int i = 0; i < s.ue_count; ++i) ues.push_back(uniform_in_disk(rng, r));
    topo.embb_ues.push_back(std::move(ues));
  }
  for (const auto& s : config.urllc_slices) {
    std::vector<Point> ues;
    for (int i = 0; i < s.ue_count; ++i) ues.push_back(uniform_in_disk(rng, r));
    topo.urllc_ues.push_back(std::move(ues));
  }
  return topo;
}

double path_loss_db(double d) {
  if (!(d > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  return 128.1 + 37.6 * std::log10(d);
}

namespace {

CVector draw_channel(const ScenarioConfig& cfg, const Topology& topo, const Point& ue,
                     std::mt19937_64& rng) {
  const int K = cfg.antennas_per_rrh;
  CVector h(cfg.dim());
  std::normal_distribution<double> shadow(0.0, cfg.shadowing_std_db);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  for (int j = 0; j < cfg.rrh_count; ++j) {
    double d = std::max(distance_km(ue, topo.rrh_positions[j]), cfg.min_distance_km);
    double gain_db = -path_loss_db(d) + cfg.antenna_gain_db + shadow(rng);
    double amp = std::pow(10.0, gain_db / 20.0);
    for (int k = 0; k < K; ++k) h(j * K + k) = amp * std::complex<double>(g(rng), g(rng));
  }
  return h;
}

}  // namespace

SampleSet draw_sample_set(const ScenarioConfig& config, const Topology& topology,
                          std::uint64_t seed, int count) {
  if (count < 0) count = config.sample_count;
  if (topology.rrh_positions.size() != static_cast<std::size_t>(config.rrh_count) ||
      topology.embb_ues.size() != config.embb_slices.size() ||
      topology.urllc_ues.size() != config.urllc_slices.size())
    throw std::invalid_argument("draw_sample_set: topology does not match scenario");
  SampleSet out;
  out.reserve(count);
  for (int m = 0; m < count; ++m) {
    auto rng = make_rng(seed, 0x5a3e0000ULL + static_cast<std::uint64_t>(m));
    ChannelSample smp;
    smp.index = m;
    for (const auto& ues : topology.embb_ues) {
      std::vector<CVector> hs;
      for (const auto& p : ues) hs.push_back(draw_channel(config, topology, p, rng));
      smp.embb.push_back(std::move(hs));
    }
    for (const auto& ues : topology.urllc_ues) {
      std::vector<CVector> hs;
      for (const auto& p : ues) hs.push_back(draw_channel(config, topology, p, rng));
      smp.urllc.push_back(std::move(hs));
    }
    out.push_back(std::move(smp));
  }
  return out;
}

double snr(const CVector& h, const CVector& w, double noise_power, double snr_loss) {
  if (h.size() != w.size()) throw std::invalid_argument("snr: length mismatch");
  if (!(noise_power > 0.0)) throw std::invalid_argument("snr: noise power must be positive");
  return std::norm(h.dot(w)) / (snr_loss * noise_power);
}

double embb_rate(double bandwidth_hz, double s) { return bandwidth_hz * std::log2(1.0 + s); }

CMatrix gain_matrix(const CVector& h, double noise_power) {
  return (h * h.adjoint()) / noise_power;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(mix(seed)), static_cast<std::uint32_t>(mix(seed) >> 32),
                    static_cast<std::uint32_t>(mix(stream ^ 0xa5a5a5a5ULL)),
                    static_cast<std::uint32_t>(mix(stream ^ 0xa5a5a5a5ULL) >> 32)};
  return std::mt19937_64(seq);
}

// --- YAML ---------------------------------------------------------------

std::string scenario_to_yaml(const ScenarioConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "rrh_count" << YAML::Value << c.rrh_count;
  out << YAML::Key << "antennas_per_rrh" << YAML::Value << c.antennas_per_rrh;
  out << YAML::Key << "circle_radius_km" << YAML::Value << c.circle_radius_km;
  out << YAML::Key << "embb_slices" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : c.embb_slices) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "ue_count" << YAML::Value << s.ue_count;
    out << YAML::Key << "rate_threshold_mbps" << YAML::Value << s.rate_threshold_mbps;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "urllc_slices" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : c.urllc_slices) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "ue_count" << YAML::Value << s.ue_count;
    out << YAML::Key << "deadline_ms" << YAML::Value << s.deadline_ms;
    out << YAML::Key << "blocking_prob" << YAML::Value << s.blocking_prob;
    out << YAML::Key << "decode_err_prob" << YAML::Value << s.decode_err_prob;
    out << YAML::Key << "packet_bits" << YAML::Value << s.packet_bits;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "traffic" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : c.traffic) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "mean_batch_interval_ms" << YAML::Value << t.mean_batch_interval_ms;
    out << YAML::Key << "mean_batch_size" << YAML::Value << t.mean_batch_size;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "total_bandwidth_hz" << YAML::Value << c.total_bandwidth_hz;
  out << YAML::Key << "power_caps_w" << YAML::Value << YAML::Flow << c.power_caps_w;
  out << YAML::Key << "noise_power_w" << YAML::Value << c.noise_power_w;
  out << YAML::Key << "snr_loss" << YAML::Value << c.snr_loss;
  out << YAML::Key << "channel_use_density" << YAML::Value << c.channel_use_density;
  out << YAML::Key << "energy_coeff" << YAML::Value << c.energy_coeff;
  out << YAML::Key << "slice_priority" << YAML::Value << c.slice_priority;
  out << YAML::Key << "sample_count" << YAML::Value << c.sample_count;
  out << YAML::Key << "minislots_per_slot" << YAML::Value << c.minislots_per_slot;
  out << YAML::Key << "queueing_prob_cap" << YAML::Value << c.queueing_prob_cap;
  out << YAML::Key << "rng_seed" << YAML::Value << c.rng_seed;
  out << YAML::Key << "antenna_gain_db" << YAML::Value << c.antenna_gain_db;
  out << YAML::Key << "shadowing_std_db" << YAML::Value << c.shadowing_std_db;
  out << YAML::Key << "min_distance_km" << YAML::Value << c.min_distance_km;
  out << YAML::EndMap;
  std::string header =
      "# Scenario file. Units: time in ms, arrival rates in packets/ms,\n"
      "# bandwidth in Hz, power in W, rate thresholds in Mb/s, distances in km,\n"
      "# channel_use_density in channel uses per ms per Hz.\n";
  return header + out.c_str() + "\n";
}

ScenarioConfig scenario_from_yaml(const std::string& text) {
  YAML::Node n = YAML::Load(text);
  ScenarioConfig c;
  auto get = [&](const char* key, auto& field) {
    if (n[key]) field = n[key].as<std::decay_t<decltype(field)>>();
  };
  get("rrh_count", c.rrh_count);
  get("antennas_per_rrh", c.antennas_per_rrh);
  get("circle_radius_km", c.circle_radius_km);
  if (n["embb_slices"])
    for (const auto& s : n["embb_slices"])
      c.embb_slices.push_back({s["ue_count"].as<int>(), s["rate_threshold_mbps"].as<double>()});
  if (n["urllc_slices"])
    for (const auto& s : n["urllc_slices"]) {
      UrllcSliceSpec u;
      u.ue_count = s["ue_count"].as<int>();
      u.deadline_ms = s["deadline_ms"].as<double>();
      if (s["blocking_prob"]) u.blocking_prob = s["blocking_prob"].as<double>();
      if (s["decode_err_prob"]) u.decode_err_prob = s["decode_err_prob"].as<double>();
      if (s["packet_bits"]) u.packet_bits = s["packet_bits"].as<double>();
      c.urllc_slices.push_back(u);
    }
  if (n["traffic"])
    for (const auto& t : n["traffic"]) {
      if (t["arrival_rate"])
        c.traffic.push_back(TrafficSpec::with_rate(
            t["arrival_rate"].as<double>(), t["mean_batch_size"] ? t["mean_batch_size"].as<double>() : 1.0));
      else
        c.traffic.push_back({t["mean_batch_interval_ms"].as<double>(), t["mean_batch_size"].as<double>()});
    }
  get("total_bandwidth_hz", c.total_bandwidth_hz);
  get("power_caps_w", c.power_caps_w);
  get("noise_power_w", c.noise_power_w);
  get("snr_loss", c.snr_loss);
  get("channel_use_density", c.channel_use_density);
  get("energy_coeff", c.energy_coeff);
  get("slice_priority", c.slice_priority);
  get("sample_count", c.sample_count);
  get("minislots_per_slot", c.minislots_per_slot);
  get("queueing_prob_cap", c.queueing_prob_cap);
  get("rng_seed", c.rng_seed);
  get("antenna_gain_db", c.antenna_gain_db);
  get("shadowing_std_db", c.shadowing_std_db);
  get("min_distance_km", c.min_distance_km);
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ScenarioConfig c = scenario_from_yaml(ss.str());
  c.validate();
  return c;
}

void save_scenario(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file " + path);
  out << scenario_to_yaml(config);
}

std::string scenario_hash(const ScenarioConfig& config) {
  // FNV-1a over the canonical YAML text.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : scenario_to_yaml(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace ranslice
