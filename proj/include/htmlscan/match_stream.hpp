#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <span>
#include <vector>

#include "char_set.hpp"
#include "kernels.hpp"
#include "simd.hpp"

namespace htmlscan {

/// Default instrumentation: every hook is empty and compiles away.
struct no_instrumentation {
  void on_block_load() noexcept {}
  void on_tail_bytes(std::size_t) noexcept {}
};

/// Counts 64-byte block classifications and bytes examined by the scalar
/// tail of an index64 traversal.
struct scan_counters {
  std::uint64_t block_loads = 0;
  std::uint64_t tail_bytes = 0;

  void on_block_load() noexcept { ++block_loads; }
  void on_tail_bytes(std::size_t n) noexcept { tail_bytes += n; }
};

/// Iterates every match of a document in ascending order.
///
/// The stream borrows `data`; the bytes must stay alive and unmodified for
/// the lifetime of the stream. A stream is single-consumer.
///
/// With kernel_id::index64 each non-overlapping 64-byte block is classified
/// exactly once into a 64-bit mask whose set bits are consumed lowest first.
/// The final `size % 64` bytes are scanned byte by byte. The block16 kernels
/// restart a fresh scan one byte past each match.
template <class Backend = simd::native_backend, class Instrument = no_instrumentation>
class basic_match_stream {
public:
  basic_match_stream(const CharSet& set, std::span<const std::uint8_t> data, kernel_id kernel,
                     Instrument instrument = {})
      : set_(set),
        data_(data),
        kernel_(kernel),
        webkit_(set),
        blink_(set),
        table_(Backend::table(set)),
        instrument_(instrument) {}

  std::optional<std::size_t> next() noexcept {
    switch (kernel_) {
      case kernel_id::scalar: return advance(scan_scalar(set_, data_, cursor_));
      case kernel_id::webkit16: return advance(webkit_.find(data_, cursor_));
      case kernel_id::blink16: return advance(blink_.find(data_, cursor_));
      case kernel_id::index64: return next_index64();
    }
    return std::nullopt;
  }

  [[nodiscard]] kernel_id kernel() const noexcept { return kernel_; }
  [[nodiscard]] std::span<const std::uint8_t> data() const noexcept { return data_; }
  [[nodiscard]] const Instrument& instrumentation() const noexcept { return instrument_; }

  class iterator {
  public:
    using value_type = std::size_t;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    explicit iterator(basic_match_stream* s) : stream_(s), current_(s->next()) {}

    std::size_t operator*() const noexcept { return *current_; }
    iterator& operator++() {
      current_ = stream_->next();
      return *this;
    }
    void operator++(int) { ++*this; }
    bool operator==(std::default_sentinel_t) const noexcept { return !current_.has_value(); }

  private:
    basic_match_stream* stream_ = nullptr;
    std::optional<std::size_t> current_;
  };

  iterator begin() { return iterator(this); }
  std::default_sentinel_t end() const noexcept { return {}; }

private:
  std::optional<std::size_t> advance(std::optional<std::size_t> found) noexcept {
    cursor_ = found ? *found + 1 : data_.size();
    return found;
  }

  std::optional<std::size_t> next_index64() noexcept {
    const std::size_t n = data_.size();
    while (pending_ == 0) {
      if (in_tail_ || next_block_ + 64 > n) return next_tail();
      pending_ = detail::index64_block<Backend>(table_, data_.data() + next_block_);
      instrument_.on_block_load();
      mask_base_ = next_block_;
      next_block_ += 64;
    }
    const auto bit = static_cast<std::size_t>(std::countr_zero(pending_));
    pending_ &= pending_ - 1;
    return mask_base_ + bit;
  }

  std::optional<std::size_t> next_tail() noexcept {
    if (!in_tail_) {
      in_tail_ = true;
      cursor_ = next_block_;
    }
    std::size_t examined = 0;
    auto found = scan_scalar(set_, data_, cursor_, &examined);
    instrument_.on_tail_bytes(examined);
    return advance(found);
  }

  CharSet set_;
  std::span<const std::uint8_t> data_;
  kernel_id kernel_;
  block16_scanner<block16_variant::webkit, Backend> webkit_;
  block16_scanner<block16_variant::blink, Backend> blink_;
  typename Backend::vec table_;
  Instrument instrument_;

  std::size_t cursor_ = 0;
  // index64 state
  std::uint64_t pending_ = 0;
  std::size_t mask_base_ = 0;
  std::size_t next_block_ = 0;
  bool in_tail_ = false;
};

using MatchStream = basic_match_stream<>;

inline MatchStream open_stream(const CharSet& set, std::span<const std::uint8_t> data, kernel_id kernel) {
  return MatchStream(set, data, kernel);
}

template <class Backend = simd::native_backend>
std::vector<std::size_t> collect_matches(const CharSet& set, std::span<const std::uint8_t> data,
                                         kernel_id kernel) {
  std::vector<std::size_t> out;
  basic_match_stream<Backend> stream(set, data, kernel);
  while (auto p = stream.next()) out.push_back(*p);
  return out;
}

struct match_count {
  std::size_t count = 0;
  double ratio = 0.0;
};

template <class Backend = simd::native_backend>
match_count count_matches(const CharSet& set, std::span<const std::uint8_t> data, kernel_id kernel) {
  match_count result;
  basic_match_stream<Backend> stream(set, data, kernel);
  while (stream.next()) ++result.count;
  result.ratio = data.empty() ? 0.0 : static_cast<double>(result.count) / static_cast<double>(data.size());
  return result;
}

} // namespace htmlscan
