#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "char_set.hpp"
#include "simd.hpp"

namespace htmlscan {

enum class kernel_id { scalar, webkit16, blink16, index64 };

inline constexpr std::array<kernel_id, 4> all_kernels{kernel_id::scalar, kernel_id::webkit16,
                                                     kernel_id::blink16, kernel_id::index64};

inline constexpr std::string_view kernel_name(kernel_id k) noexcept {
  switch (k) {
    case kernel_id::scalar: return "scalar";
    case kernel_id::webkit16: return "webkit16";
    case kernel_id::blink16: return "blink16";
    case kernel_id::index64: return "index64";
  }
  return "?";
}

/// Throws std::invalid_argument listing the valid names.
inline kernel_id parse_kernel_name(std::string_view name) {
  for (auto k : all_kernels) {
    if (kernel_name(k) == name) return k;
  }
  std::string valid;
  for (auto k : all_kernels) {
    if (!valid.empty()) valid += ", ";
    valid += kernel_name(k);
  }
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "' (valid: " + valid + ")");
}

enum class block16_variant { webkit, blink };

/// Result of classifying 16 bytes: every lane is 0x00 or 0xFF.
struct ClassifiedBlock16 {
  simd::lanes16 lanes{};

  friend bool operator==(const ClassifiedBlock16&, const ClassifiedBlock16&) = default;
};

/// Bit i set iff byte i of a 64-byte block is a member.
struct MatchMask64 {
  std::uint64_t bits = 0;

  friend bool operator==(const MatchMask64&, const MatchMask64&) = default;
};

template <class Backend = simd::native_backend>
ClassifiedBlock16 classify16(const CharSet& set, std::span<const std::uint8_t, 16> block) noexcept {
  const auto m = Backend::classify(Backend::table(set), Backend::load(block.data()));
  return {Backend::to_array(m)};
}

/// Lane-wise (0, 1, .., 15) OR NOT lanes; its minimum is the first match.
inline simd::lanes16 webkit_or_not(const ClassifiedBlock16& block) noexcept {
  simd::lanes16 out;
  for (int i = 0; i < 16; ++i) {
    out[i] = static_cast<std::uint8_t>(simd::lane_indices[i] | static_cast<std::uint8_t>(~block.lanes[i]));
  }
  return out;
}

template <class Backend = simd::native_backend>
std::optional<unsigned> first_index_webkit(const ClassifiedBlock16& block) noexcept {
  const auto m = Backend::load(block.lanes.data());
  if (!Backend::any(m)) return std::nullopt;
  return Backend::first_min(m);
}

/// Four bits per lane: lane i occupies bits [4i, 4i + 4).
template <class Backend = simd::native_backend>
std::uint64_t blink_narrowed_mask(const ClassifiedBlock16& block) noexcept {
  return Backend::narrow(Backend::load(block.lanes.data()));
}

template <class Backend = simd::native_backend>
std::optional<unsigned> first_index_blink(const ClassifiedBlock16& block) noexcept {
  const std::uint64_t mask = blink_narrowed_mask<Backend>(block);
  if (mask == 0) return std::nullopt;
  return static_cast<unsigned>(std::countr_zero(mask)) / 4;
}

namespace detail {

template <class Backend>
inline std::uint64_t index64_block(const typename Backend::vec& table, const std::uint8_t* p) noexcept {
  const auto m0 = Backend::classify(table, Backend::load(p));
  const auto m1 = Backend::classify(table, Backend::load(p + 16));
  const auto m2 = Backend::classify(table, Backend::load(p + 32));
  const auto m3 = Backend::classify(table, Backend::load(p + 48));
  std::uint64_t bits = Backend::index64(m0, m1, m2, m3);
#if defined(HTMLSCAN_FAULT_FLIP_BIT)
  // Test-only fault injection for the verification tooling.
  bits ^= std::uint64_t{1} << (HTMLSCAN_FAULT_FLIP_BIT);
#endif
  return bits;
}

} // namespace detail

template <class Backend = simd::native_backend>
MatchMask64 build_index64(const CharSet& set, std::span<const std::uint8_t, 64> block) noexcept {
  return {detail::index64_block<Backend>(Backend::table(set), block.data())};
}

/// Byte-at-a-time reference scan. `examined` is incremented by the number
/// of bytes inspected.
inline std::optional<std::size_t> scan_scalar(const CharSet& set, std::span<const std::uint8_t> data,
                                              std::size_t from, std::size_t* examined = nullptr) noexcept {
  const auto& table = set.nibble_table();
  const std::uint8_t* p = data.data();
  const std::size_t n = data.size();
  for (std::size_t i = from; i < n; ++i) {
    if (table[p[i] & 0x0F] == p[i]) {
      if (examined) *examined += i - from + 1;
      return i;
    }
  }
  if (examined && from < n) *examined += n - from;
  return std::nullopt;
}

/// Holds the prepared nibble table so repeated scans do not rebuild it.
template <block16_variant Variant, class Backend = simd::native_backend>
class block16_scanner {
public:
  explicit block16_scanner(const CharSet& set) noexcept : set_(set), table_(Backend::table(set)) {}

  /// Smallest p >= from with data[p] a member. Full 16-byte blocks are
  /// classified; the remainder goes through scan_scalar.
  std::optional<std::size_t> find(std::span<const std::uint8_t> data, std::size_t from) const noexcept {
    const std::uint8_t* p = data.data();
    const std::size_t n = data.size();
    std::size_t i = from;
    for (; i + 16 <= n; i += 16) {
      const auto m = Backend::classify(table_, Backend::load(p + i));
      if constexpr (Variant == block16_variant::webkit) {
        if (Backend::any(m)) return i + Backend::first_min(m);
      } else {
        const std::uint64_t mask = Backend::narrow(m);
        if (mask != 0) return i + static_cast<std::size_t>(std::countr_zero(mask)) / 4;
      }
    }
    return scan_scalar(set_, data, i);
  }

private:
  CharSet set_;
  typename Backend::vec table_;
};

template <class Backend = simd::native_backend>
std::optional<std::size_t> scan_block16(const CharSet& set, std::span<const std::uint8_t> data,
                                        std::size_t from, block16_variant variant) noexcept {
  if (variant == block16_variant::webkit) {
    return block16_scanner<block16_variant::webkit, Backend>(set).find(data, from);
  }
  return block16_scanner<block16_variant::blink, Backend>(set).find(data, from);
}

} // namespace htmlscan
