#include <benchmark/benchmark.h>

#include "cpmb/channel.hpp"
#include "cpmb/detect.hpp"
#include "cpmb/fec.hpp"
#include "cpmb/modem.hpp"
#include "cpmb/precoding.hpp"
#include "cpmb/rng.hpp"

namespace {

struct DetectFixture {
  cpmb::Constellation c;
  cpmb::PrecoderConfig pre;
  cpmb::ChannelRealization cr;
  std::vector<double> lambdas_eta;
  std::vector<cpmb::cplx> y;
  double radius = 0.0;

  DetectFixture(int n, int m_bits, double snr_db) {
    cpmb::Rng rng(7);
    c = cpmb::build_constellation(m_bits);
    pre = cpmb::build_precoder(n, n, [n] {
      std::vector<int> e(n);
      for (int i = 0; i < n; ++i) e[i] = i + 1;
      return e;
    }());
    cr = cpmb::beamform(cpmb::sample_channel(n, n, rng), n);
    for (int e : pre.eta) lambdas_eta.push_back(cr.lambdas[e - 1]);

    const cpmb::NoiseModel noise = cpmb::NoiseModel::from_snr_db(snr_db, n);
    std::vector<cpmb::cplx> x(n);
    for (int i = 0; i < n; ++i)
      x[i] = c.energy_scale * c.points[rng.next_u64() % c.points.size()];
    y = cpmb::transmit(cr, pre, x, noise, rng);
    radius = 2.0 * noise.n0 * n;
  }
};

void BM_CsdDetect(benchmark::State& state) {
  DetectFixture fx(static_cast<int>(state.range(0)), 4, 20.0);
  cpmb::PrecodedDetector det(cpmb::Detector::csd, fx.lambdas_eta,
                             fx.c.energy_scale, fx.pre.theta_tilde, fx.c, false);
  for (auto _ : state) {
    auto dec = det.detect(fx.y, fx.radius);
    benchmark::DoNotOptimize(dec.weight);
  }
}
BENCHMARK(BM_CsdDetect)->Arg(2)->Arg(4);

void BM_PsdDetect(benchmark::State& state) {
  DetectFixture fx(static_cast<int>(state.range(0)), 4, 20.0);
  cpmb::PrecodedDetector det(cpmb::Detector::psd, fx.lambdas_eta,
                             fx.c.energy_scale, fx.pre.theta_tilde, fx.c, false);
  for (auto _ : state) {
    auto dec = det.detect(fx.y, fx.radius);
    benchmark::DoNotOptimize(dec.weight);
  }
}
BENCHMARK(BM_PsdDetect)->Arg(2)->Arg(4);

void BM_TableBuild(benchmark::State& state) {
  DetectFixture fx(static_cast<int>(state.range(0)), 6, 20.0);
  cpmb::ComplexMatrix f(fx.pre.precoded, fx.pre.precoded);
  for (int i = 0; i < fx.pre.precoded; ++i)
    for (int j = 0; j < fx.pre.precoded; ++j)
      f(i, j) = fx.c.energy_scale * fx.lambdas_eta[i] * fx.pre.theta_tilde(i, j);
  const cpmb::LatticeSystem ls = cpmb::realify_interleaved(f, fx.y, fx.c.omega);
  for (auto _ : state) {
    auto table = cpmb::build_table(ls);
    benchmark::DoNotOptimize(table.size());
  }
}
BENCHMARK(BM_TableBuild)->Arg(2)->Arg(4);

void BM_Svd(benchmark::State& state) {
  cpmb::Rng rng(11);
  const cpmb::ComplexMatrix h =
      cpmb::sample_channel(static_cast<int>(state.range(0)),
                           static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    auto f = cpmb::svd(h);
    benchmark::DoNotOptimize(f.sigma[0]);
  }
}
BENCHMARK(BM_Svd)->Arg(2)->Arg(4);

void BM_ViterbiDecode(benchmark::State& state) {
  const cpmb::CodeConfig code = cpmb::make_code(7, {0133, 0171});
  cpmb::Rng rng(3);
  std::vector<std::uint8_t> info(120);
  for (auto& b : info) b = rng.next_u64() & 1;
  const auto coded = cpmb::conv_encode(info, code);
  std::vector<std::array<double, 2>> metrics(coded.size());
  for (std::size_t i = 0; i < coded.size(); ++i) {
    metrics[i][coded[i]] = 0.1 * rng.uniform();
    metrics[i][coded[i] ^ 1] = 1.0 + rng.uniform();
  }
  for (auto _ : state) {
    auto out = cpmb::viterbi_decode(metrics, code, info.size());
    benchmark::DoNotOptimize(out.size());
  }
}
BENCHMARK(BM_ViterbiDecode);

}  // namespace

BENCHMARK_MAIN();
