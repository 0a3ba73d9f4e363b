#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "char_set.hpp"
#include "kernels.hpp"
#include "match_stream.hpp"
#include "perf_counters.hpp"

#if defined(__linux__)
#include <sched.h>
#endif

namespace htmlscan {

/// 64-bit FNV-1a style fold over match positions: h ^= p; h *= prime.
struct position_fold {
  static constexpr std::uint64_t offset_basis = 0xCBF29CE484222325ull;
  static constexpr std::uint64_t prime = 0x100000001B3ull;

  std::uint64_t value = offset_basis;

  void add(std::size_t position) noexcept {
    value ^= static_cast<std::uint64_t>(position);
    value *= prime;
  }
};

namespace detail {

template <class Backend, kernel_id Kernel>
std::uint64_t fold_stream(const CharSet& set, std::span<const std::uint8_t> data, std::size_t* matches) {
  position_fold fold;
  std::size_t count = 0;
  basic_match_stream<Backend> stream(set, data, Kernel);
  while (auto p = stream.next()) {
    fold.add(*p);
    ++count;
  }
  if (matches) *matches = count;
  return fold.value;
}

} // namespace detail

/// Folds every position of a full traversal. The kernel is fixed per
/// instantiation so the stream's dispatch folds away inside the loop.
template <class Backend = simd::native_backend>
std::uint64_t stream_checksum(const CharSet& set, std::span<const std::uint8_t> data, kernel_id kernel,
                              std::size_t* matches = nullptr) {
  switch (kernel) {
    case kernel_id::scalar: return detail::fold_stream<Backend, kernel_id::scalar>(set, data, matches);
    case kernel_id::webkit16: return detail::fold_stream<Backend, kernel_id::webkit16>(set, data, matches);
    case kernel_id::blink16: return detail::fold_stream<Backend, kernel_id::blink16>(set, data, matches);
    case kernel_id::index64: return detail::fold_stream<Backend, kernel_id::index64>(set, data, matches);
  }
  return position_fold{}.value;
}

struct BenchReport {
  kernel_id kernel = kernel_id::scalar;
  std::string corpus;
  std::size_t bytes = 0;
  std::size_t matches = 0;
  std::size_t repetitions = 0;
  std::size_t warmup = 0;
  // Wall time summed over the measured repetitions.
  double elapsed_s = 0.0;
  double min_s = 0.0;
  double median_s = 0.0;
  double mean_s = 0.0;
  // bytes * repetitions / elapsed_s / 1e9
  double throughput_gbps = 0.0;
  // bytes / median_s / 1e9; used for comparisons between kernels.
  double median_gbps = 0.0;
  std::uint64_t checksum = 0;
  std::optional<double> instructions_per_byte;
  std::optional<double> instructions_per_cycle;

  [[nodiscard]] std::size_t total_bytes() const noexcept { return bytes * repetitions; }
};

/// A kernel disagreed with the others (or with itself between repetitions).
class verification_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct bench_options {
  std::size_t repetitions = 10;
  std::size_t warmup = 2;
  bool hardware_counters = false;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

/// Times full match-stream traversals. Every position is folded into the
/// checksum, which is compared across repetitions and kernels; any mismatch
/// throws verification_error.
template <class Backend = simd::native_backend>
std::vector<BenchReport> run_bench(const CharSet& set, std::span<const std::uint8_t> data,
                                   const std::string& corpus_name, std::span<const kernel_id> kernels,
                                   const bench_options& options) {
  if (options.repetitions == 0) throw std::invalid_argument("repetitions must be at least 1");
  using clock = std::chrono::steady_clock;

  std::vector<BenchReport> reports;
  perf_counters counters;
  const bool use_counters = options.hardware_counters && counters.available();

  for (const kernel_id kernel : kernels) {
    BenchReport r;
    r.kernel = kernel;
    r.corpus = corpus_name;
    r.bytes = data.size();
    r.repetitions = options.repetitions;
    r.warmup = options.warmup;

    for (std::size_t i = 0; i < options.warmup; ++i) {
      r.checksum = stream_checksum<Backend>(set, data, kernel, &r.matches);
    }

    std::vector<double> times;
    times.reserve(options.repetitions);
    std::uint64_t instructions = 0;
    std::uint64_t cycles = 0;
    bool counters_ok = use_counters;
    for (std::size_t i = 0; i < options.repetitions; ++i) {
      std::size_t matches = 0;
      if (use_counters) counters.start();
      const auto t0 = clock::now();
      const std::uint64_t sum = stream_checksum<Backend>(set, data, kernel, &matches);
      const auto t1 = clock::now();
      if (use_counters) {
        if (auto sample = counters.stop()) {
          instructions += sample->instructions;
          cycles += sample->cycles;
        } else {
          counters_ok = false;
        }
      }
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
      if ((i > 0 || options.warmup > 0) && sum != r.checksum) {
        throw verification_error(std::string(kernel_name(kernel)) + ": checksum changed between repetitions");
      }
      r.checksum = sum;
      r.matches = matches;
    }

    r.elapsed_s = std::accumulate(times.begin(), times.end(), 0.0);
    r.min_s = *std::min_element(times.begin(), times.end());
    r.median_s = detail::median_of(times);
    r.mean_s = r.elapsed_s / static_cast<double>(times.size());
    r.throughput_gbps = r.elapsed_s > 0 ? static_cast<double>(r.total_bytes()) / r.elapsed_s / 1e9 : 0.0;
    r.median_gbps = r.median_s > 0 ? static_cast<double>(r.bytes) / r.median_s / 1e9 : 0.0;
    if (counters_ok && r.total_bytes() > 0 && cycles > 0) {
      r.instructions_per_byte = static_cast<double>(instructions) / static_cast<double>(r.total_bytes());
      r.instructions_per_cycle = static_cast<double>(instructions) / static_cast<double>(cycles);
    }

    if (!reports.empty() && reports.front().checksum != r.checksum) {
      throw verification_error(std::string(kernel_name(kernel)) + " checksum " + std::to_string(r.checksum) +
                               " differs from " + std::string(kernel_name(reports.front().kernel)) + " checksum " +
                               std::to_string(reports.front().checksum));
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

struct kernel_verdict {
  kernel_id kernel = kernel_id::scalar;
  bool pass = true;
  std::size_t matches = 0;
  // First position at which the kernel's sequence departs from the scalar
  // kernel's: the smaller of the two differing entries, or the first extra
  // or missing one.
  std::optional<std::size_t> first_divergence;
};

/// Compares each kernel's complete position sequence with the scalar kernel's.
template <class Backend = simd::native_backend>
std::vector<kernel_verdict> verify_kernels(const CharSet& set, std::span<const std::uint8_t> data,
                                           std::span<const kernel_id> kernels = all_kernels) {
  const auto reference = collect_matches<Backend>(set, data, kernel_id::scalar);
  std::vector<kernel_verdict> out;
  for (const kernel_id kernel : kernels) {
    kernel_verdict v;
    v.kernel = kernel;
    const auto got = collect_matches<Backend>(set, data, kernel);
    v.matches = got.size();
    const std::size_t common = std::min(got.size(), reference.size());
    for (std::size_t i = 0; i < common; ++i) {
      if (got[i] != reference[i]) {
        v.first_divergence = std::min(got[i], reference[i]);
        break;
      }
    }
    if (!v.first_divergence && got.size() != reference.size()) {
      v.first_divergence = got.size() > reference.size() ? got[common] : reference[common];
    }
    v.pass = !v.first_divergence.has_value();
    out.push_back(v);
  }
  return out;
}

/// Restricts the calling thread to the CPU it is currently running on.
/// Returns false where the platform offers no affinity control.
inline bool pin_to_current_cpu() noexcept {
#if defined(__linux__)
  const int cpu = sched_getcpu();
  if (cpu < 0) return false;
  cpu_set_t mask;
  CPU_ZERO(&mask);
  CPU_SET(cpu, &mask);
  return sched_setaffinity(0, sizeof(mask), &mask) == 0;
#else
  return false;
#endif
}

} // namespace htmlscan
