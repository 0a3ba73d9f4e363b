#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace htmlscan {

enum class charset_errc {
  empty_set,
  too_many_members,
  duplicate_member,
  not_nibble_distinguishable,
  bad_spec,
};

class charset_error : public std::invalid_argument {
public:
  charset_error(charset_errc code, const std::string& what)
      : std::invalid_argument(what), code_(code) {}

  [[nodiscard]] charset_errc code() const noexcept { return code_; }

private:
  charset_errc code_;
};

namespace detail {

inline std::string hex_byte(std::uint8_t v) {
  static constexpr char digits[] = "0123456789ABCDEF";
  return std::string{"0x"} + digits[v >> 4] + digits[v & 0x0F];
}

// Filler for a nibble slot no member occupies. The low nibble of the filler
// never equals the slot index, so no input byte can look itself up and match.
constexpr std::uint8_t unused_slot_filler(unsigned slot) noexcept {
  auto candidate = static_cast<std::uint8_t>(0x10u * ((slot + 1u) % 16u));
  if ((candidate & 0x0Fu) == slot) {
    candidate = static_cast<std::uint8_t>(slot ^ 0xFFu);
  }
  return candidate;
}

} // namespace detail

/// A set of at most 16 target bytes, no two sharing a low nibble, together
/// with the 16-entry table used for vectorized classification:
/// `table[v & 0x0F] == v` holds exactly for members.
class CharSet {
public:
  static constexpr std::size_t max_members = 16;

  /// Throws charset_error when the members cannot be classified with a
  /// single nibble table.
  static CharSet build(std::span<const std::uint8_t> members) {
    if (members.empty()) {
      throw charset_error(charset_errc::empty_set, "character set must not be empty");
    }
    if (members.size() > max_members) {
      throw charset_error(charset_errc::too_many_members,
                          "character set has " + std::to_string(members.size()) +
                              " members, at most 16 are supported");
    }

    CharSet set;
    std::array<int, 16> owner{};
    owner.fill(-1);
    for (std::size_t i = 0; i < members.size(); ++i) {
      const std::uint8_t v = members[i];
      for (std::size_t j = 0; j < i; ++j) {
        if (members[j] == v) {
          throw charset_error(charset_errc::duplicate_member,
                              "duplicate member " + detail::hex_byte(v));
        }
      }
      const unsigned slot = v & 0x0Fu;
      if (owner[slot] >= 0) {
        const auto other = static_cast<std::uint8_t>(owner[slot]);
        throw charset_error(charset_errc::not_nibble_distinguishable,
                            "members " + detail::hex_byte(other) + " and " +
                                detail::hex_byte(v) + " share low nibble " +
                                detail::hex_byte(static_cast<std::uint8_t>(slot)));
      }
      owner[slot] = v;
      set.members_[i] = v;
    }
    set.size_ = static_cast<std::uint8_t>(members.size());

    for (unsigned slot = 0; slot < 16; ++slot) {
      set.table_[slot] = owner[slot] >= 0 ? static_cast<std::uint8_t>(owner[slot])
                                          : detail::unused_slot_filler(slot);
    }
    return set;
  }

  static CharSet build(std::initializer_list<std::uint8_t> members) {
    return build(std::span<const std::uint8_t>(members.begin(), members.size()));
  }

  /// Members in construction order.
  [[nodiscard]] std::span<const std::uint8_t> members() const noexcept {
    return {members_.data(), size_};
  }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }

  [[nodiscard]] const std::array<std::uint8_t, 16>& nibble_table() const noexcept {
    return table_;
  }

  [[nodiscard]] bool contains(std::uint8_t v) const noexcept {
    return table_[v & 0x0Fu] == v;
  }

  friend bool operator==(const CharSet& a, const CharSet& b) noexcept {
    return a.size_ == b.size_ && a.members_ == b.members_;
  }

private:
  CharSet() = default;

  std::array<std::uint8_t, 16> members_{};
  std::array<std::uint8_t, 16> table_{};
  std::uint8_t size_ = 0;
};

inline CharSet build_charset(std::span<const std::uint8_t> members) {
  return CharSet::build(members);
}

inline bool is_member(const CharSet& set, std::uint8_t v) noexcept { return set.contains(v); }

/// The HTML tokenizer trigger bytes: '<', '\r', '&' and NUL.
inline const CharSet& default_html_set() {
  static const CharSet set = CharSet::build({0x3C, 0x0D, 0x26, 0x00});
  return set;
}

namespace detail {

struct named_byte {
  std::string_view name;
  std::uint8_t value;
};

inline constexpr std::array<named_byte, 4> byte_names{{
    {"NUL", 0x00},
    {"CR", 0x0D},
    {"AMP", 0x26},
    {"LT", 0x3C},
}};

inline int hex_digit(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline bool is_space(char c) noexcept { return c == ' ' || c == '\t'; }

} // namespace detail

/// Parses the command-line set syntax: comma-separated tokens, each one of
/// a quoted printable character ('<' or "<"), a hex escape \xNN, or one of
/// the names NUL, CR, AMP, LT.
inline CharSet parse_charset_spec(std::string_view spec) {
  std::vector<std::uint8_t> members;
  auto fail = [&](const std::string& why) -> charset_error {
    return charset_error(charset_errc::bad_spec,
                         "invalid character set '" + std::string(spec) + "': " + why);
  };

  std::size_t i = 0;
  const std::size_t n = spec.size();
  while (true) {
    while (i < n && detail::is_space(spec[i])) ++i;
    if (i >= n) throw fail("expected a token");

    const char c = spec[i];
    if (c == '\'' || c == '"') {
      if (i + 2 >= n || spec[i + 2] != c) throw fail("unterminated quoted character");
      const auto v = static_cast<std::uint8_t>(spec[i + 1]);
      if (v < 0x20 || v > 0x7E) throw fail("quoted character must be printable ASCII");
      members.push_back(v);
      i += 3;
    } else if (c == '\\') {
      if (i + 3 >= n || spec[i + 1] != 'x') throw fail("expected \\xNN");
      const int hi = detail::hex_digit(spec[i + 2]);
      const int lo = detail::hex_digit(spec[i + 3]);
      if (hi < 0 || lo < 0) throw fail("expected two hex digits after \\x");
      members.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
      i += 4;
    } else {
      std::size_t end = i;
      while (end < n && spec[end] != ',' && !detail::is_space(spec[end])) ++end;
      const std::string_view word = spec.substr(i, end - i);
      bool found = false;
      for (const auto& named : detail::byte_names) {
        if (named.name == word) {
          members.push_back(named.value);
          found = true;
          break;
        }
      }
      if (!found) throw fail("unknown token '" + std::string(word) + "'");
      i = end;
    }

    while (i < n && detail::is_space(spec[i])) ++i;
    if (i >= n) break;
    if (spec[i] != ',') throw fail("expected ',' between tokens");
    ++i;
  }
  return CharSet::build(members);
}

/// Inverse of parse_charset_spec: names where one exists, quoted printable
/// characters otherwise, \xNN for everything else.
inline std::string to_charset_spec(const CharSet& set) {
  std::string out;
  for (const std::uint8_t v : set.members()) {
    if (!out.empty()) out += ',';
    bool named = false;
    for (const auto& entry : detail::byte_names) {
      if (entry.value == v) {
        out += entry.name;
        named = true;
        break;
      }
    }
    if (named) continue;
    if (v >= 0x20 && v <= 0x7E && v != '\'') {
      out += '\'';
      out += static_cast<char>(v);
      out += '\'';
    } else {
      static constexpr char digits[] = "0123456789ABCDEF";
      out += "\\x";
      out += digits[v >> 4];
      out += digits[v & 0x0F];
    }
  }
  return out;
}

} // namespace htmlscan
