// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP kernel. Set OMP_NUM_THREADS to vary the team.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "uhredit/curation/flow.hpp"
#include "uhredit/image.hpp"
#include "uhredit/numerics/attention.hpp"
#include "uhredit/numerics/dft.hpp"
#include "uhredit/quality/quality.hpp"

using namespace uhredit;

namespace {

GrayImage noise_gray(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  GrayImage g(side, side);
  for (double& v : g.data) v = d(rng);
  return box_blur(g, 2);
}

numerics::Matrix noise_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  numerics::Matrix m(r, c);
  for (double& v : m.data) v = d(rng);
  return m;
}

const std::vector<quality::GlcmOffset> kOffsets{{0, 1}, {1, 0}, {1, 1}, {1, -1}};

template <bool Parallel>
void BM_Tenengrad(benchmark::State& st) {
  const auto img = noise_gray(static_cast<int>(st.range(0)), 1);
  for (auto _ : st) benchmark::DoNotOptimize(Parallel ? quality::tenengrad(img) : quality::serial::tenengrad(img));
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

template <bool Parallel>
void BM_GlcmCounts(benchmark::State& st) {
  const auto img = noise_gray(static_cast<int>(st.range(0)), 2);
  for (auto _ : st) {
    auto c = Parallel ? quality::glcm_counts(img, 32, kOffsets) : quality::serial::glcm_counts(img, 32, kOffsets);
    benchmark::DoNotOptimize(c.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

template <bool Parallel>
void BM_Dft2(benchmark::State& st) {
  const auto img = noise_gray(static_cast<int>(st.range(0)), 3);
  const auto h = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) {
    auto f = Parallel ? numerics::dft2_ortho(img.data, h, h) : numerics::serial::dft2_ortho(img.data, h, h);
    benchmark::DoNotOptimize(f.data());
  }
}

template <bool Parallel>
void BM_Attention(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto q = noise_matrix(n, 64, 4), k = noise_matrix(n, 64, 5), v = noise_matrix(n, 64, 6);
  for (auto _ : st) {
    auto r = Parallel ? numerics::scaled_attention(q, k, v, 1.3) : numerics::serial::scaled_attention(q, k, v, 1.3);
    benchmark::DoNotOptimize(r.output.data.data());
  }
}

template <bool Parallel>
void BM_OpticalFlow(benchmark::State& st) {
  const int side = static_cast<int>(st.range(0));
  const auto a = noise_gray(side + 4, 7);
  GrayImage fa(side, side), fb(side, side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      fa.at(y, x) = a.at(y, x + 3);
      fb.at(y, x) = a.at(y + 1, x);
    }
  for (auto _ : st) {
    auto f = Parallel ? curation::optical_flow(fa, fb) : curation::serial::optical_flow(fa, fb);
    benchmark::DoNotOptimize(f.u.data());
  }
}

}  // namespace

BENCHMARK(BM_Tenengrad<false>)->Name("tenengrad/serial")->Arg(512)->Arg(2048);
BENCHMARK(BM_Tenengrad<true>)->Name("tenengrad/omp")->Arg(512)->Arg(2048);
BENCHMARK(BM_GlcmCounts<false>)->Name("glcm_counts/serial")->Arg(512)->Arg(2048);
BENCHMARK(BM_GlcmCounts<true>)->Name("glcm_counts/omp")->Arg(512)->Arg(2048);
BENCHMARK(BM_Dft2<false>)->Name("dft2/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_Dft2<true>)->Name("dft2/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_Attention<false>)->Name("attention/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_Attention<true>)->Name("attention/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_OpticalFlow<false>)->Name("optical_flow/serial")->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OpticalFlow<true>)->Name("optical_flow/omp")->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
