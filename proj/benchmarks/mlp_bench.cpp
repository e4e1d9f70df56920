// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/attribute_nets.hpp"
#include "agnet/rng.hpp"

#include <benchmark/benchmark.h>

namespace {

// One V2A training step at the default widths on a 32-row batch.
void BM_V2AStep(benchmark::State& state) {
    agnet::Rng rng(7);
    const std::size_t l = 64;
    const std::size_t d = 32;
    agnet::MlpModel model = agnet::make_attribute_net(l, agnet::kV2AHidden, d, rng);
    agnet::Matrix x(32, l);
    agnet::Matrix a(32, d);
    for (double& v : x.data()) {
        v = rng.normal();
    }
    for (double& v : a.data()) {
        v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    }
    for (auto _ : state) {
        const auto trace = model.forward_trace(x);
        const auto grads = model.backward(trace, agnet::attribute_loss_gradient(trace.result(), a));
        model.apply_gradients(grads, 1e-6);
    }
}
BENCHMARK(BM_V2AStep)->Unit(benchmark::kMillisecond);

} // namespace
