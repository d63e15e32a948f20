// Matched filter over a noisy frame: OpenMP kernel against the serial reference.
#include <benchmark/benchmark.h>

#include "uwbicl/channel.hpp"
#include "uwbicl/detection.hpp"
#include "uwbicl/network.hpp"

using namespace uwbicl;

namespace {

struct Fixture {
  FrameConfig cfg;
  Pulse pulse = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  std::vector<THCode> codes = anchor_codes(cfg, 7, 1, 4);
  SampledSignal tmpl = synth_template(cfg, pulse, codes[0], 0);
  SampledSignal rx;

  explicit Fixture(double span) {
    Rng rng(7);
    rx = render_links(cfg, pulse, {}, {0.0, span}, noise_variance_for(cfg, 11.0), rng);
  }
};

void bm_parallel(benchmark::State& st) {
  const Fixture f(static_cast<double>(st.range(0)) * 1e-9);
  const TimeWindow w{0.0, f.rx.end_time() - (f.tmpl.end_time() - f.tmpl.t0)};
  for (auto _ : st) benchmark::DoNotOptimize(matched_filter(f.rx, f.tmpl, w));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.rx.samples.size()));
}

void bm_serial(benchmark::State& st) {
  const Fixture f(static_cast<double>(st.range(0)) * 1e-9);
  const TimeWindow w{0.0, f.rx.end_time() - (f.tmpl.end_time() - f.tmpl.t0)};
  for (auto _ : st) benchmark::DoNotOptimize(matched_filter_serial(f.rx, f.tmpl, w));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.rx.samples.size()));
}

}  // namespace

BENCHMARK(bm_parallel)->Arg(2000)->Arg(20000)->Arg(200000)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_serial)->Arg(2000)->Arg(20000)->Arg(200000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
