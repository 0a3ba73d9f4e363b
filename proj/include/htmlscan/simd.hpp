#pragma once

// 16-byte vector backends used by the block kernels.
//
// Every backend exposes the same static interface over an opaque `vec`:
//   load(p)              unaligned 16-byte load
//   table(set)           nibble table as a vector
//   classify(t, v)       0xFF where t[v & 0x0F] == v, else 0x00
//   any(m)               horizontal max != 0
//   first_min(m)         horizontal min of (0,1,..,15) OR NOT m
//   narrow(m)            shift-right-narrow by 4, as a 64-bit word
//   index64(m0..m3)      1 bit per lane over 64 lanes
//   to_array(m)          lanes as bytes
//
// portable_backend computes everything lane by lane and is the reference
// the hardware backends are tested against.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>

#include "char_set.hpp"

#if defined(__aarch64__) || defined(_M_ARM64)
#define HTMLSCAN_HAVE_NEON 1
#include <arm_neon.h>
#elif defined(__SSSE3__)
#define HTMLSCAN_HAVE_SSSE3 1
#include <tmmintrin.h>
#endif

namespace htmlscan::simd {

using lanes16 = std::array<std::uint8_t, 16>;

inline constexpr lanes16 lane_indices{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
inline constexpr lanes16 bit_weights{0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80,
                                     0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80};

struct portable_backend {
  using vec = lanes16;
  static constexpr const char* name = "portable";

  static vec load(const std::uint8_t* p) noexcept {
    vec v;
    std::memcpy(v.data(), p, 16);
    return v;
  }

  static vec table(const CharSet& set) noexcept { return set.nibble_table(); }

  static vec classify(const vec& t, const vec& v) noexcept {
    vec out;
    for (int i = 0; i < 16; ++i) {
      out[i] = t[v[i] & 0x0F] == v[i] ? 0xFF : 0x00;
    }
    return out;
  }

  static std::uint8_t max_lane(const vec& m) noexcept {
    std::uint8_t r = 0;
    for (auto x : m) r = x > r ? x : r;
    return r;
  }

  static bool any(const vec& m) noexcept { return max_lane(m) != 0; }

  static unsigned first_min(const vec& m) noexcept {
    std::uint8_t r = 0xFF;
    for (int i = 0; i < 16; ++i) {
      const auto x = static_cast<std::uint8_t>(lane_indices[i] | static_cast<std::uint8_t>(~m[i]));
      r = x < r ? x : r;
    }
    return r;
  }

  static std::uint64_t narrow(const vec& m) noexcept {
    std::uint64_t out = 0;
    for (int w = 0; w < 8; ++w) {
      const std::uint16_t word = static_cast<std::uint16_t>(m[2 * w] | (m[2 * w + 1] << 8));
      const auto low = static_cast<std::uint8_t>(word >> 4);
      out |= std::uint64_t{low} << (8 * w);
    }
    return out;
  }

  // Pairwise byte addition across the 32 bytes a:b, wrapping modulo 256.
  static vec pairwise_add(const vec& a, const vec& b) noexcept {
    vec out;
    for (int i = 0; i < 8; ++i) {
      out[i] = static_cast<std::uint8_t>(a[2 * i] + a[2 * i + 1]);
      out[8 + i] = static_cast<std::uint8_t>(b[2 * i] + b[2 * i + 1]);
    }
    return out;
  }

  static vec weigh(const vec& m) noexcept {
    vec out;
    for (int i = 0; i < 16; ++i) out[i] = m[i] & bit_weights[i];
    return out;
  }

  static std::uint64_t index64(const vec& m0, const vec& m1, const vec& m2,
                               const vec& m3) noexcept {
    const vec sum0 = pairwise_add(weigh(m0), weigh(m1));
    const vec sum1 = pairwise_add(weigh(m2), weigh(m3));
    const vec sum2 = pairwise_add(sum0, sum1);
    const vec sum3 = pairwise_add(sum2, sum2);
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= std::uint64_t{sum3[i]} << (8 * i);
    return out;
  }

  static lanes16 to_array(const vec& m) noexcept { return m; }
};

#if defined(HTMLSCAN_HAVE_NEON)

struct neon_backend {
  using vec = uint8x16_t;
  static constexpr const char* name = "neon";

  static vec load(const std::uint8_t* p) noexcept { return vld1q_u8(p); }
  static vec table(const CharSet& set) noexcept { return vld1q_u8(set.nibble_table().data()); }

  static vec classify(vec t, vec v) noexcept {
    return vceqq_u8(vqtbl1q_u8(t, vandq_u8(v, vdupq_n_u8(0x0F))), v);
  }

  static bool any(vec m) noexcept { return vmaxvq_u8(m) != 0; }

  static unsigned first_min(vec m) noexcept {
    return vminvq_u8(vornq_u8(vld1q_u8(lane_indices.data()), m));
  }

  static std::uint64_t narrow(vec m) noexcept {
    return vget_lane_u64(vreinterpret_u64_u8(vshrn_n_u16(vreinterpretq_u16_u8(m), 4)), 0);
  }

  static std::uint64_t index64(vec m0, vec m1, vec m2, vec m3) noexcept {
    const vec weights = vld1q_u8(bit_weights.data());
    const vec sum0 = vpaddq_u8(vandq_u8(m0, weights), vandq_u8(m1, weights));
    const vec sum1 = vpaddq_u8(vandq_u8(m2, weights), vandq_u8(m3, weights));
    vec sum = vpaddq_u8(sum0, sum1);
    sum = vpaddq_u8(sum, sum);
    return vgetq_lane_u64(vreinterpretq_u64_u8(sum), 0);
  }

  static lanes16 to_array(vec m) noexcept {
    lanes16 out;
    vst1q_u8(out.data(), m);
    return out;
  }
};

using native_backend = neon_backend;
inline constexpr bool has_native_backend = true;

#elif defined(HTMLSCAN_HAVE_SSSE3)

// x86 counterpart: pshufb for the table lookup, shift/min/max ladders for
// the horizontal reductions, and movemask for the 64-bit index.
struct ssse3_backend {
  using vec = __m128i;
  static constexpr const char* name = "ssse3";

  static vec load(const std::uint8_t* p) noexcept {
    return _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
  }

  static vec table(const CharSet& set) noexcept { return load(set.nibble_table().data()); }

  static vec classify(vec t, vec v) noexcept {
    return _mm_cmpeq_epi8(_mm_shuffle_epi8(t, _mm_and_si128(v, _mm_set1_epi8(0x0F))), v);
  }

  static bool any(vec m) noexcept {
    m = _mm_max_epu8(m, _mm_srli_si128(m, 8));
    m = _mm_max_epu8(m, _mm_srli_si128(m, 4));
    m = _mm_max_epu8(m, _mm_srli_si128(m, 2));
    m = _mm_max_epu8(m, _mm_srli_si128(m, 1));
    return (_mm_cvtsi128_si32(m) & 0xFF) != 0;
  }

  static unsigned first_min(vec m) noexcept {
    vec x = _mm_or_si128(load(lane_indices.data()), _mm_andnot_si128(m, _mm_set1_epi8(-1)));
    x = _mm_min_epu8(x, _mm_srli_si128(x, 8));
    x = _mm_min_epu8(x, _mm_srli_si128(x, 4));
    x = _mm_min_epu8(x, _mm_srli_si128(x, 2));
    x = _mm_min_epu8(x, _mm_srli_si128(x, 1));
    return static_cast<unsigned>(_mm_cvtsi128_si32(x) & 0xFF);
  }

  static std::uint64_t narrow(vec m) noexcept {
    const vec shifted = _mm_and_si128(_mm_srli_epi16(m, 4), _mm_set1_epi16(0x00FF));
    return static_cast<std::uint64_t>(_mm_cvtsi128_si64(_mm_packus_epi16(shifted, shifted)));
  }

  static std::uint64_t index64(vec m0, vec m1, vec m2, vec m3) noexcept {
    const auto b0 = static_cast<std::uint64_t>(static_cast<std::uint32_t>(_mm_movemask_epi8(m0)));
    const auto b1 = static_cast<std::uint64_t>(static_cast<std::uint32_t>(_mm_movemask_epi8(m1)));
    const auto b2 = static_cast<std::uint64_t>(static_cast<std::uint32_t>(_mm_movemask_epi8(m2)));
    const auto b3 = static_cast<std::uint64_t>(static_cast<std::uint32_t>(_mm_movemask_epi8(m3)));
    return b0 | (b1 << 16) | (b2 << 32) | (b3 << 48);
  }

  static lanes16 to_array(vec m) noexcept {
    lanes16 out;
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out.data()), m);
    return out;
  }
};

using native_backend = ssse3_backend;
inline constexpr bool has_native_backend = true;

#else

using native_backend = portable_backend;
inline constexpr bool has_native_backend = false;

#endif

} // namespace htmlscan::simd
