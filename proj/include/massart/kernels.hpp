#pragma once

// Monte-Carlo expectation kernels. Samples are drawn in fixed-size chunks,
// chunk c from Rng::stream(seed, c), and per-chunk partial sums are reduced in
// chunk order, so the OpenMP kernel reproduces the serial one bit for bit.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "massart/instance.hpp"

namespace massart::kernels {

using Evaluator = std::function<double(std::span<const double> x, int y)>;

inline constexpr std::size_t kChunk = 8192;

struct McRequest {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Means of every evaluator over one shared set of `samples` draws.
std::vector<double> mc_means_serial(const LabeledSource& source, std::span<const Evaluator> f,
                                    const McRequest& request);
std::vector<double> mc_means(const LabeledSource& source, std::span<const Evaluator> f,
                             const McRequest& request);

/// Caps the OpenMP team size; 0 keeps the runtime default.
void set_thread_cap(int threads);
int max_threads();

}  // namespace massart::kernels
