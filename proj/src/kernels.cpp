#include "massart/kernels.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "massart/numeric.hpp"

namespace massart::kernels {
namespace {

std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

// Fills partial[q] with the compensated sum of evaluator q over chunk c.
void run_chunk(const LabeledSource& source, std::span<const Evaluator> f, const McRequest& req,
               std::size_t c, std::span<double> partial) {
  Rng rng = Rng::stream(req.seed, c);
  const std::size_t begin = c * kChunk;
  const std::size_t n = std::min(kChunk, req.samples - begin);
  const LabeledBatch batch = source.draw_batch(rng, n);
  for (std::size_t q = 0; q < f.size(); ++q) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < n; ++i) acc += f[q](batch.row(i), batch.y[i]);
    partial[q] = acc.value();
  }
}

std::vector<double> reduce(const std::vector<double>& partials, std::size_t chunks,
                           std::size_t queries, std::size_t samples) {
  std::vector<double> out(queries);
  for (std::size_t q = 0; q < queries; ++q) {
    CompensatedSum acc;
    for (std::size_t c = 0; c < chunks; ++c) acc += partials[c * queries + q];
    out[q] = acc.value() / static_cast<double>(samples);
  }
  return out;
}

void check(const McRequest& req) {
  if (req.samples == 0) throw std::invalid_argument("Monte-Carlo request needs samples > 0");
}

}  // namespace

std::vector<double> mc_means_serial(const LabeledSource& source, std::span<const Evaluator> f,
                                    const McRequest& request) {
  check(request);
  const std::size_t chunks = chunk_count(request.samples);
  std::vector<double> partials(chunks * f.size());
  for (std::size_t c = 0; c < chunks; ++c)
    run_chunk(source, f, request, c, {partials.data() + c * f.size(), f.size()});
  return reduce(partials, chunks, f.size(), request.samples);
}

std::vector<double> mc_means(const LabeledSource& source, std::span<const Evaluator> f,
                             const McRequest& request) {
  check(request);
  const std::size_t chunks = chunk_count(request.samples);
  std::vector<double> partials(chunks * f.size());
  const auto n = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    run_chunk(source, f, request, cu, {partials.data() + cu * f.size(), f.size()});
  }
  return reduce(partials, chunks, f.size(), request.samples);
}

void set_thread_cap(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace massart::kernels
