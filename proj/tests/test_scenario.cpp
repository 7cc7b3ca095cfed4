#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ranslice/scenario.hpp"

using namespace ranslice;

TEST_CASE("path loss formula") {
  CHECK(path_loss_db(1.0) == doctest::Approx(128.1));
  CHECK(path_loss_db(0.1) == doctest::Approx(90.5));
  CHECK(path_loss_db(0.5) == doctest::Approx(116.78).epsilon(1e-4));
  CHECK_THROWS_AS(path_loss_db(0.0), std::domain_error);
  CHECK_THROWS_AS(path_loss_db(-1.0), std::domain_error);
}

TEST_CASE("topology placement") {
  ScenarioConfig c = full_scenario();
  c.rrh_count = 3;
  c.circle_radius_km = 0.5;
  c.power_caps_w = {1, 1, 1};
  Topology t = place_topology(c, 11);
  REQUIRE(t.rrh_positions.size() == 3);
  // chord of an equilateral triangle inscribed in radius R
  const double chord = 2.0 * 0.5 * std::sin(std::numbers::pi / 3.0);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      CHECK(distance_km(t.rrh_positions[a], t.rrh_positions[b]) == doctest::Approx(chord).epsilon(1e-12));
  for (const auto& p : t.rrh_positions) CHECK(std::hypot(p.x, p.y) == doctest::Approx(0.5));
  for (const auto& ues : t.embb_ues)
    for (const auto& p : ues) CHECK(std::hypot(p.x, p.y) <= 0.5);
  for (const auto& ues : t.urllc_ues)
    for (const auto& p : ues) CHECK(std::hypot(p.x, p.y) <= 0.5);

  Topology again = place_topology(c, 11);
  for (std::size_t s = 0; s < t.embb_ues.size(); ++s)
    for (std::size_t i = 0; i < t.embb_ues[s].size(); ++i) {
      CHECK(t.embb_ues[s][i].x == again.embb_ues[s][i].x);
      CHECK(t.embb_ues[s][i].y == again.embb_ues[s][i].y);
    }

  c.rrh_count = 1;
  c.power_caps_w = {1};
  Topology one = place_topology(c, 3);
  REQUIRE(one.rrh_positions.size() == 1);
  CHECK(one.rrh_positions[0].x == doctest::Approx(0.5));
  CHECK(one.rrh_positions[0].y == doctest::Approx(0.0));
}

TEST_CASE("snr and rate") {
  CVector h(2), w(2);
  h << 1.0, 0.0;
  w << 2.0, 0.0;
  CHECK(snr(h, w, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(snr(h, w, 1.0, 1.5) == doctest::Approx(8.0 / 3.0));
  h << 1.0, 1.0;
  w << 1.0, 1.0;
  CHECK(snr(h, w, 1.0) == doctest::Approx(4.0));
  CVector w3(3);
  w3.setOnes();
  CHECK_THROWS_AS(snr(h, w3, 1.0), std::invalid_argument);

  CHECK(embb_rate(1e6, 3.0) == doctest::Approx(2e6));
  CHECK(embb_rate(1e6, 0.0) == 0.0);
  CHECK(embb_rate(2.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("snr properties") {
  auto rng = make_rng(5, 1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    CVector h(4), w(4);
    for (int k = 0; k < 4; ++k) {
      h(k) = {n(rng), n(rng)};
      w(k) = {n(rng), n(rng)};
    }
    const double theta = n(rng);
    CVector rotated = std::polar(1.0, theta) * w;
    CHECK(snr(h, rotated, 0.3) == doctest::Approx(snr(h, w, 0.3)).epsilon(1e-12));
    CHECK(snr(h, w, 0.3, 1.5) < snr(h, w, 0.3, 1.0));
  }
  double prev = -1.0;
  for (double s = 0.0; s < 20.0; s += 0.5) {
    double r = embb_rate(1e6, s);
    CHECK(r >= prev);
    CHECK(embb_rate(2e6, s) >= r);
    prev = r;
  }
}

TEST_CASE("scenario validation") {
  ScenarioConfig c = acceptance_scenario();
  CHECK_NOTHROW(c.validate());
  CHECK(c.dim() == 4);
  CHECK(c.embb_ue_count() == 2);
  CHECK(c.urllc_ue_count() == 2);

  ScenarioConfig bad = c;
  bad.snr_loss = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.queueing_prob_cap = bad.urllc_slices[0].blocking_prob;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.traffic[0] = TrafficSpec::with_rate(1.5);  // lambda D >= 1
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.power_caps_w.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.urllc_slices[0].decode_err_prob = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  TrafficSpec t = TrafficSpec::with_rate(0.25, 2.0);
  CHECK(t.arrival_rate() == doctest::Approx(0.25));
  CHECK(t.mean_batch_size == 2.0);
}

TEST_CASE("full-size configuration") {
  ScenarioConfig p = full_scenario();
  CHECK_NOTHROW(p.validate());
  CHECK(p.sample_count == 100);
  CHECK(p.minislots_per_slot == 60);
  CHECK(p.rrh_count == 3);
  CHECK(p.embb_slices.size() == 3);
  CHECK(p.urllc_slices.size() == 2);
}

TEST_CASE("sample sets are deterministic and sized") {
  ScenarioConfig c = acceptance_scenario();
  Topology t = place_topology(c, 4);
  SampleSet a = draw_sample_set(c, t, 99);
  SampleSet b = draw_sample_set(c, t, 99);
  REQUIRE(a.size() == static_cast<std::size_t>(c.sample_count));
  for (std::size_t m = 0; m < a.size(); ++m) {
    CHECK(a[m].index == static_cast<int>(m));
    for (std::size_t s = 0; s < a[m].urllc.size(); ++s)
      for (std::size_t i = 0; i < a[m].urllc[s].size(); ++i) {
        CHECK(a[m].urllc[s][i].size() == c.dim());
        CHECK(a[m].urllc[s][i] == b[m].urllc[s][i]);
        CHECK(a[m].urllc[s][i].allFinite());
      }
  }
  SampleSet other = draw_sample_set(c, t, 100);
  CHECK(other[0].embb[0][0] != a[0].embb[0][0]);
  CHECK(draw_sample_set(c, t, 1, 7).size() == 7);

  ScenarioConfig wrong = c;
  wrong.rrh_count = 3;
  wrong.power_caps_w = {1, 1, 1};
  CHECK_THROWS_AS(draw_sample_set(wrong, t, 1), std::invalid_argument);
}

namespace {

// Channel-entry power divided by the deterministic large-scale gain, for one antenna
// per (UE, RRH) pair. Requires UEs farther than the clamp distance.
std::vector<double> normalized_powers(const ScenarioConfig& c, const Topology& t, const SampleSet& set) {
  std::vector<double> out;
  const int K = c.antennas_per_rrh;
  for (const auto& smp : set)
    for (std::size_t s = 0; s < smp.embb.size(); ++s)
      for (std::size_t i = 0; i < smp.embb[s].size(); ++i)
        for (int j = 0; j < c.rrh_count; ++j) {
          double d = std::max(distance_km(t.embb_ues[s][i], t.rrh_positions[j]), c.min_distance_km);
          double g = std::pow(10.0, (-(128.1 + 37.6 * std::log10(d)) + c.antenna_gain_db) / 10.0);
          out.push_back(std::norm(smp.embb[s][i](j * K)) / g);
        }
  return out;
}

}  // namespace

TEST_CASE("small-scale fading has unit mean power") {
  ScenarioConfig c = acceptance_scenario();
  c.shadowing_std_db = 0.0;
  c.embb_slices = {{5, 1.0}};
  Topology t = place_topology(c, 8);
  auto p = normalized_powers(c, t, draw_sample_set(c, t, 3, 10000));
  REQUIRE(p.size() >= 100000);
  double mean = 0.0;
  for (double v : p) mean += v;
  mean /= p.size();
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("log-normal shadowing spread") {
  ScenarioConfig c = acceptance_scenario();
  c.embb_slices = {{5, 1.0}};
  Topology t = place_topology(c, 8);
  auto p = normalized_powers(c, t, draw_sample_set(c, t, 5, 10000));
  double mean = 0.0, sq = 0.0;
  for (double v : p) {
    double db = 10.0 * std::log10(v);
    mean += db;
    sq += db * db;
  }
  mean /= p.size();
  const double sd = std::sqrt(sq / p.size() - mean * mean);
  // dB of an Exp(1) variable has variance (10/ln 10)^2 pi^2/6; shadowing adds 10^2
  const double fading_var = std::pow(10.0 / std::numbers::ln10, 2) * std::numbers::pi * std::numbers::pi / 6.0;
  CHECK(sd == doctest::Approx(std::sqrt(100.0 + fading_var)).epsilon(0.05));
  // remove the fading part: the shadowing std itself within 5% of 10 dB
  CHECK(std::sqrt(sd * sd - fading_var) == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("gain matrix") {
  CVector h(2);
  h << std::complex<double>(1, 1), std::complex<double>(0, 2);
  CMatrix g = gain_matrix(h, 0.5);
  CHECK(g.isApprox(g.adjoint()));
  CHECK(g.trace().real() == doctest::Approx(h.squaredNorm() / 0.5));
  CVector w(2);
  w << 0.3, std::complex<double>(0.1, -0.2);
  CHECK((w.adjoint() * g * w)(0).real() == doctest::Approx(snr(h, w, 0.5)));
}

TEST_CASE("scenario yaml round trip") {
  ScenarioConfig c = full_scenario();
  c.traffic[1] = TrafficSpec{3.0, 2.0};
  c.rng_seed = 1234567;
  ScenarioConfig back = scenario_from_yaml(scenario_to_yaml(c));
  CHECK(scenario_to_yaml(back) == scenario_to_yaml(c));
  CHECK(scenario_hash(back) == scenario_hash(c));
  CHECK(back.traffic[1].mean_batch_interval_ms == 3.0);
  CHECK(back.urllc_slices[1].deadline_ms == c.urllc_slices[1].deadline_ms);

  ScenarioConfig changed = c;
  changed.energy_coeff *= 2.0;
  CHECK(scenario_hash(changed) != scenario_hash(c));
  CHECK_THROWS(scenario_from_yaml("rrh_count: [unterminated"));
}

TEST_CASE("rng streams are independent and reproducible") {
  auto a = make_rng(1, 2);
  auto b = make_rng(1, 2);
  auto c = make_rng(1, 3);
  auto x = a();
  CHECK(x == b());
  CHECK(x != c());
}
