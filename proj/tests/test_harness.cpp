#include <doctest.h>

#include <cmath>

#include "cpmb/harness.hpp"

using cpmb::Detector;
using cpmb::SimConfig;
using cpmb::SimMode;

namespace {

SimConfig small_uncoded() {
  SimConfig cfg;
  cfg.tx = cfg.rx = cfg.streams = cfg.precoded = 2;
  cfg.bits_per_symbol = 2;
  cfg.mode = SimMode::umb;
  cfg.detector = Detector::psd;
  cfg.snr_db = {5.0, 10.0};
  cfg.stop.min_bit_errors = 100;
  cfg.stop.max_bits = 40000;
  cfg.seed = 77;
  return cfg;
}

SimConfig small_coded() {
  SimConfig cfg;
  cfg.tx = cfg.rx = cfg.streams = cfg.precoded = 2;
  cfg.bits_per_symbol = 2;
  cfg.mode = SimMode::bicmb;
  cfg.detector = Detector::psd;
  cfg.snr_db = {8.0};
  cfg.stop.min_bit_errors = 60;
  cfg.stop.max_bits = 30000;
  cfg.seed = 5;
  cfg.code.constraint_length = 3;
  cfg.code.generators = {05, 07};
  cfg.frame_info_bits = 30;  // (30 + 2) * 2 = 64 coded bits = 16 symbols
  return cfg;
}

}  // namespace

TEST_CASE("config parsing applies defaults and validates") {
  const std::string text = R"({
    "schema": 1, "tx": 4, "rx": 4, "streams": 4, "precoded": 2,
    "eta": [1, 3], "bits_per_symbol": 2, "mode": "umb", "detector": "csd",
    "snr_db": [0, 5, 10], "seed": 3, "burst_length": 8
  })";
  const SimConfig cfg = cpmb::parse_config(text);
  CHECK(cfg.tx == 4);
  CHECK(cfg.eta == std::vector<int>{1, 3});
  CHECK(cfg.detector == Detector::csd);
  CHECK(cfg.burst_length == 8);
  CHECK(cfg.stop.min_bit_errors == 200);  // default

  CHECK_THROWS_AS((void)cpmb::parse_config("{\"schema\": 2}"), std::invalid_argument);
  CHECK_THROWS_AS((void)cpmb::parse_config(R"({"schema":1,"snr_db":[5,5]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      (void)cpmb::parse_config(R"({"schema":1,"snr_db":[5],"precoded":3})"),
      std::invalid_argument);
}

TEST_CASE("octal generator literals parse both ways") {
  const std::string text = R"({
    "schema": 1, "mode": "bicmb", "snr_db": [10],
    "code": {"constraint_length": 7, "generators": [133, "171"], "puncture": "2/3"},
    "frame_info_bits": 42
  })";
  const SimConfig cfg = cpmb::parse_config(text);
  CHECK(cfg.code.generators == std::vector<std::uint32_t>{0133, 0171});
  CHECK(cfg.code.build().rate() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("slope estimation on synthetic power-law data") {
  cpmb::SweepResult res;
  for (double snr : {10.0, 15.0, 20.0, 25.0}) {
    cpmb::SweepPoint p;
    p.snr_db = snr;
    p.ber = std::pow(10.0, -snr / 10.0);  // BER = 1/SNR
    res.points.push_back(p);
  }
  const auto est = cpmb::estimate_slope(res, 10.0, 25.0);
  CHECK(est.order == doctest::Approx(1.0).epsilon(0.01));
  CHECK(est.std_error <= 0.01);

  for (auto& p : res.points) p.ber = 3.0 * std::pow(10.0, -4.0 * p.snr_db / 10.0);
  const auto est4 = cpmb::estimate_slope(res, 10.0, 25.0);
  CHECK(est4.order == doctest::Approx(4.0).epsilon(0.01));

  CHECK_THROWS_AS((void)cpmb::estimate_slope(res, 24.0, 25.0), std::invalid_argument);
}

TEST_CASE("sweeps are reproducible and worker-count independent") {
  SimConfig cfg = small_uncoded();
  const std::string csv1 = cpmb::to_csv(cpmb::run_sweep(cfg));
  const std::string csv2 = cpmb::to_csv(cpmb::run_sweep(cfg));
  CHECK(csv1 == csv2);

  cfg.workers = 3;
  const std::string csv3 = cpmb::to_csv(cpmb::run_sweep(cfg));
  CHECK(csv1 == csv3);

  SimConfig other = cfg;
  other.seed = 78;
  CHECK(cpmb::to_csv(cpmb::run_sweep(other)) != csv1);
}

TEST_CASE("ber is detector invariant under a shared seed") {
  SimConfig cfg = small_uncoded();
  cfg.stop.min_bit_errors = 150;
  std::vector<std::string> bers;
  std::vector<double> mults;
  for (Detector d : {Detector::exh, Detector::csd, Detector::psd}) {
    cfg.detector = d;
    const auto res = cpmb::run_sweep(cfg);
    std::string col;
    for (const auto& p : res.points) {
      col += std::to_string(p.bit_errors) + "/";
      col += std::to_string(p.trials) + ";";
    }
    bers.push_back(col);
    mults.push_back(res.points.back().mean_mults);
  }
  CHECK(bers[0] == bers[1]);
  CHECK(bers[0] == bers[2]);
  // complexity separates them even though decisions match
  CHECK(mults[2] < mults[1]);
  CHECK(mults[1] < mults[0]);
}

TEST_CASE("effectively noiseless operation is error free") {
  SimConfig cfg = small_uncoded();
  cfg.snr_db = {200.0};
  cfg.stop.min_bit_errors = 1;
  cfg.stop.max_trials = 1000;
  cfg.stop.max_bits = 1'000'000'000;
  const auto res = cpmb::run_sweep(cfg);
  CHECK(res.points[0].bit_errors == 0);
  CHECK(res.points[0].trials == 1000);

  SimConfig coded = small_coded();
  coded.snr_db = {200.0};
  coded.stop.min_bit_errors = 1;
  coded.stop.max_trials = 100;
  coded.stop.max_bits = 1'000'000'000;
  const auto cres = cpmb::run_sweep(coded);
  CHECK(cres.points[0].bit_errors == 0);
}

TEST_CASE("coded sweeps produce metrics-per-bit accounting") {
  const SimConfig cfg = small_coded();
  const auto res = cpmb::run_sweep(cfg);
  REQUIRE(res.points.size() == 1);
  const auto& p = res.points[0];
  CHECK(p.trials > 0);
  CHECK(p.ber > 0.0);
  CHECK(p.ber < 0.5);
  CHECK(p.mean_mults > 0.0);
  CHECK(p.mean_nodes > 0.0);
  CHECK(p.table_build_mults > 0.0);
}

TEST_CASE("coded ber decreases with snr") {
  SimConfig cfg = small_coded();
  cfg.snr_db = {5.0, 14.0};
  cfg.stop.min_bit_errors = 120;
  cfg.stop.max_bits = 120000;
  const auto res = cpmb::run_sweep(cfg);
  CHECK(res.points[0].ber > res.points[1].ber);
}

TEST_CASE("csv has the documented column order") {
  SimConfig cfg = small_uncoded();
  cfg.snr_db = {5.0};
  cfg.stop.max_bits = 4000;
  const std::string csv = cpmb::to_csv(cpmb::run_sweep(cfg));
  CHECK(csv.rfind("snr_db,trials,bit_errors,ber,mean_mults,std_mults,"
                  "mean_nodes,table_build_mults\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("single beamforming runs and detectors agree on it") {
  SimConfig cfg;
  cfg.tx = cfg.rx = 2;
  cfg.streams = cfg.precoded = 1;
  cfg.bits_per_symbol = 2;
  cfg.mode = SimMode::umb;
  cfg.snr_db = {8.0};
  cfg.stop.min_bit_errors = 80;
  cfg.stop.max_bits = 40000;
  cfg.seed = 21;
  std::vector<long long> errors;
  for (Detector d : {Detector::exh, Detector::csd, Detector::psd}) {
    cfg.detector = d;
    const auto res = cpmb::run_sweep(cfg);
    errors.push_back(res.points[0].bit_errors);
    CHECK(res.points[0].ber > 0.0);
  }
  CHECK(errors[0] == errors[1]);
  CHECK(errors[0] == errors[2]);
}

TEST_CASE("a raw puncture matrix overrides the named pattern") {
  const std::string text = R"({
    "schema": 1, "mode": "bicmb", "snr_db": [10],
    "code": {"constraint_length": 7, "generators": [133, 171],
             "puncture_matrix": [[1, 1], [1, 0], [1, 0], [1, 0]]},
    "frame_info_bits": 58
  })";
  const SimConfig cfg = cpmb::parse_config(text);
  CHECK(cfg.code.build().rate() == doctest::Approx(4.0 / 5.0));

  const std::string bad = R"({
    "schema": 1, "mode": "bicmb", "snr_db": [10],
    "code": {"constraint_length": 7, "generators": [133, 171],
             "puncture_matrix": [[1, 1], [0, 0]]},
    "frame_info_bits": 58
  })";
  CHECK_THROWS_AS((void)cpmb::parse_config(bad), std::invalid_argument);
}

TEST_CASE("burst length amortizes the table build") {
  SimConfig cfg = small_uncoded();
  cfg.snr_db = {10.0};
  cfg.stop.max_bits = 20000;
  cfg.burst_length = 1;
  const auto r1 = cpmb::run_sweep(cfg);
  cfg.burst_length = 16;
  const auto r16 = cpmb::run_sweep(cfg);
  CHECK(r16.points[0].table_build_mults <
        0.25 * r1.points[0].table_build_mults);
}
