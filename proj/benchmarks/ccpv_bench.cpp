// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ccpv/common.hpp"
#include "ccpv/losses.hpp"
#include "ccpv/matching.hpp"
#include "ccpv/metrics.hpp"
#include "ccpv/model.hpp"

namespace {

std::vector<ccpv::ImageArray> random_images(int n, int side, std::uint64_t seed) {
  ccpv::Rng rng = ccpv::make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<ccpv::ImageArray> images;
  images.reserve(n);
  for (int i = 0; i < n; ++i) {
    ccpv::ImageArray img(1, side, side);
    for (double& v : img.data) v = uni(rng);
    images.push_back(std::move(img));
  }
  return images;
}

Eigen::MatrixXd random_unit_rows(int n, int d, std::uint64_t seed) {
  ccpv::Rng rng = ccpv::make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = normal(rng);
    m.row(i).normalize();
  }
  return m;
}

void BM_BackboneEmbed(benchmark::State& state) {
  ccpv::BackboneConfig config;
  config.embedding_dim = 64;
  config.image_side = static_cast<int>(state.range(0));
  auto model = ccpv::create_backbone(config, 1);
  auto images = random_images(8, config.image_side, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->embed(images));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_BackboneEmbed)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CcLoss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ccpv::CCBatch batch;
  batch.e_l = random_unit_rows(n, 64, 10);
  batch.e_r = random_unit_rows(n, 64, 11);
  batch.e_fl = random_unit_rows(n, 64, 12);
  batch.e_fr = random_unit_rows(n, 64, 13);
  for (int i = 0; i < n; ++i) batch.labels.push_back(i);
  ccpv::CCGrads grads;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ccpv::cc_loss(batch, &grads));
  }
}
BENCHMARK(BM_CcLoss)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_FourMatch(benchmark::State& state) {
  Eigen::MatrixXd rows = random_unit_rows(4, 128, 20);
  ccpv::TemplatePair g{rows.row(0), rows.row(1), "g", std::nullopt};
  ccpv::TemplatePair q{rows.row(2), rows.row(3), "q", std::nullopt};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ccpv::four_match(g, q, 1.0));
  }
}
BENCHMARK(BM_FourMatch);

void BM_Eer(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ccpv::Rng rng = ccpv::make_rng(30);
  std::normal_distribution<double> gen(0.4, 0.15), imp(1.0, 0.2);
  ccpv::ScoreSet scores;
  for (int i = 0; i < n; ++i) scores.genuine.push_back(gen(rng));
  for (int i = 0; i < 10 * n; ++i) scores.impostor.push_back(imp(rng));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ccpv::eer(scores));
  }
}
BENCHMARK(BM_Eer)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
