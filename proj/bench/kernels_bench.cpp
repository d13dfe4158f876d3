// Copyright 2026 The salient-reid Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// OpenMP kernels against their serial references on training-sized shapes.

#include <benchmark/benchmark.h>

#include "sreid/kernels.hpp"
#include "sreid/rng.hpp"

namespace {

using namespace sreid;

Tensor filled(std::vector<std::size_t> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.values()) v = rng.uniform(1e-3, 1.0);
  return t;
}

// {batch, channels, height, width}: the second stage of the desk model.
const std::vector<std::size_t> kActivation{16, 32, 32, 16};

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const Tensor x = filled(kActivation, 1);
  const Tensor w = filled({32, 32, 3, 3}, 2);
  for (auto _ : state) {
    Tensor y = Parallel ? kernels::conv3x3_forward(x, w, 1) : kernels::serial::conv3x3_forward(x, w, 1);
    benchmark::DoNotOptimize(y.values().data());
  }
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  const Tensor x = filled(kActivation, 1);
  const Tensor w = filled({32, 32, 3, 3}, 2);
  const Tensor dy = filled(kActivation, 3);
  const auto shape = kernels::ConvShape::of(x, w, 1);
  Tensor dw(w.shape());
  for (auto _ : state) {
    Tensor dx = Parallel ? kernels::conv3x3_backward_input(dy, w, shape)
                         : kernels::serial::conv3x3_backward_input(dy, w, shape);
    if (Parallel) {
      kernels::conv3x3_backward_weight(x, dy, 1, dw);
    } else {
      kernels::serial::conv3x3_backward_weight(x, dy, 1, dw);
    }
    benchmark::DoNotOptimize(dx.values().data());
    benchmark::DoNotOptimize(dw.values().data());
  }
}

template <bool Parallel>
void BM_PPool(benchmark::State& state) {
  const Tensor A = filled({16, 64, 8, 4}, 4);
  const Tensor g = filled({16, 64}, 5);
  PPoolingLayer layer;
  for (auto _ : state) {
    Tensor f = Parallel ? kernels::pool_forward(PoolingMode::kPPool, A, layer)
                        : kernels::serial::pool_forward(PoolingMode::kPPool, A, layer);
    kernels::PoolGrad d = Parallel ? kernels::pool_backward(PoolingMode::kPPool, A, layer, g)
                                   : kernels::serial::pool_backward(PoolingMode::kPPool, A, layer, g);
    benchmark::DoNotOptimize(f.values().data());
    benchmark::DoNotOptimize(d.input.values().data());
  }
}

BENCHMARK(BM_ConvForward<false>)->Name("conv3x3_forward/serial");
BENCHMARK(BM_ConvForward<true>)->Name("conv3x3_forward/openmp");
BENCHMARK(BM_ConvBackward<false>)->Name("conv3x3_backward/serial");
BENCHMARK(BM_ConvBackward<true>)->Name("conv3x3_backward/openmp");
BENCHMARK(BM_PPool<false>)->Name("ppool_forward_backward/serial");
BENCHMARK(BM_PPool<true>)->Name("ppool_forward_backward/openmp");

}  // namespace

BENCHMARK_MAIN();
