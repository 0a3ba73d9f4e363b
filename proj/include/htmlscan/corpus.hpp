#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "char_set.hpp"
#include "kernels.hpp"

namespace htmlscan {

enum class corpus_errc { io_error, density_out_of_range, invalid_filler, bad_synth_spec };

class corpus_error : public std::runtime_error {
public:
  corpus_error(corpus_errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] corpus_errc code() const noexcept { return code_; }

private:
  corpus_errc code_;
};

/// SplitMix64 (Steele, Lea, Flood 2014). Golden-gamma increment followed by
/// the variant-13 finalizer; fully specified by its 64-bit seed.
class splitmix64 {
public:
  explicit splitmix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Value in [0, bound) by multiply-shift: (next() * bound) >> 64.
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

private:
  std::uint64_t state_;
};

struct SynthParams {
  std::size_t length = 0;
  double target_density = 0.0;
  std::uint64_t seed = 0;
  // Empty means printable ASCII (0x20..0x7E) minus the set's members.
  std::vector<std::uint8_t> filler_alphabet;

  [[nodiscard]] std::size_t match_count() const {
    return static_cast<std::size_t>(std::llround(target_density * static_cast<double>(length)));
  }
};

struct file_source {
  std::filesystem::path path;
};

struct synth_source {
  SynthParams params;
};

struct CorpusDoc {
  std::string name;
  std::vector<std::uint8_t> bytes;
  std::variant<file_source, synth_source> source;

  [[nodiscard]] std::span<const std::uint8_t> view() const noexcept { return bytes; }
};

/// Raw bytes, no transcoding or newline translation. An empty file yields an
/// empty document.
inline CorpusDoc load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw corpus_error(corpus_errc::io_error, "cannot open '" + path.string() + "'");
  }
  CorpusDoc doc;
  doc.name = path.filename().string();
  doc.source = file_source{path};
  doc.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw corpus_error(corpus_errc::io_error, "error reading '" + path.string() + "'");
  }
  return doc;
}

inline void save_corpus(const CorpusDoc& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw corpus_error(corpus_errc::io_error, "cannot create '" + path.string() + "'");
  }
  out.write(reinterpret_cast<const char*>(doc.bytes.data()), static_cast<std::streamsize>(doc.bytes.size()));
  if (!out) {
    throw corpus_error(corpus_errc::io_error, "error writing '" + path.string() + "'");
  }
}

inline std::vector<std::uint8_t> default_filler(const CharSet& set) {
  std::vector<std::uint8_t> out;
  for (unsigned v = 0x20; v <= 0x7E; ++v) {
    if (!set.contains(static_cast<std::uint8_t>(v))) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

inline std::string synth_name(const SynthParams& p) {
  std::ostringstream s;
  s << "synth(length=" << p.length << ",density=" << p.target_density << ",seed=" << p.seed << ')';
  return s.str();
}

/// Deterministic HTML-like document with an exact number of member bytes.
///
/// With rng = splitmix64(seed) and k = llround(density * length):
///  1. every byte i in order gets filler[rng.below(|filler|)];
///  2. a partial Fisher-Yates shuffle over positions 0..length-1 picks k
///     distinct positions: for j in 0..k-1, swap(pos[j], pos[j + rng.below(length - j)]),
///     then byte pos[j] gets members[rng.below(|members|)].
inline CorpusDoc generate_synthetic(const CharSet& set, const SynthParams& params) {
  if (!(params.target_density >= 0.0 && params.target_density <= 1.0)) {
    throw corpus_error(corpus_errc::density_out_of_range,
                       "density " + std::to_string(params.target_density) + " is outside [0, 1]");
  }
  std::vector<std::uint8_t> filler =
      params.filler_alphabet.empty() ? default_filler(set) : params.filler_alphabet;
  for (auto v : filler) {
    if (set.contains(v)) {
      throw corpus_error(corpus_errc::invalid_filler,
                         "filler alphabet contains member " + detail::hex_byte(v));
    }
  }
  const std::size_t n = params.length;
  const std::size_t k = params.match_count();
  if (filler.empty() && k < n) {
    throw corpus_error(corpus_errc::invalid_filler, "filler alphabet is empty");
  }

  splitmix64 rng(params.seed);
  CorpusDoc doc;
  doc.name = synth_name(params);
  doc.source = synth_source{params};
  doc.bytes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    doc.bytes[i] = filler.empty() ? 0 : filler[rng.below(filler.size())];
  }

  std::vector<std::size_t> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = i;
  const auto members = set.members();
  for (std::size_t j = 0; j < k; ++j) {
    std::swap(positions[j], positions[j + rng.below(n - j)]);
    doc.bytes[positions[j]] = members[rng.below(members.size())];
  }
  return doc;
}

/// Parses `length=<N>,density=<float>,seed=<u64>`. length is required;
/// density defaults to 0 and seed to 0.
inline SynthParams parse_synth_spec(std::string_view spec) {
  auto fail = [&](const std::string& why) {
    return corpus_error(corpus_errc::bad_synth_spec, "invalid synthetic spec '" + std::string(spec) + "': " + why);
  };
  SynthParams params;
  bool have_length = false;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string_view item = spec.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw fail("expected key=value, got '" + std::string(item) + "'");
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    try {
      std::size_t used = 0;
      if (key == "length") {
        if (!value.empty() && value[0] == '-') throw fail("length must be non-negative");
        params.length = std::stoull(value, &used);
        have_length = true;
      } else if (key == "density") {
        params.target_density = std::stod(value, &used);
      } else if (key == "seed") {
        if (!value.empty() && value[0] == '-') throw fail("seed must be non-negative");
        params.seed = std::stoull(value, &used, 0);
      } else {
        throw fail("unknown key '" + key + "'");
      }
      if (used != value.size()) throw fail("trailing characters in '" + value + "'");
    } catch (const std::logic_error&) {
      throw fail("bad value for '" + key + "'");
    }
    pos = comma + 1;
  }
  if (!have_length) throw fail("missing length");
  return params;
}

struct corpus_statistics {
  std::size_t bytes = 0;
  std::size_t matches = 0;
  double ratio = 0.0;
};

/// Counts with the scalar kernel only, so the figures do not depend on any
/// vector path.
inline corpus_statistics corpus_stats(const CharSet& set, std::span<const std::uint8_t> data) {
  corpus_statistics s;
  s.bytes = data.size();
  std::size_t from = 0;
  while (auto p = scan_scalar(set, data, from)) {
    ++s.matches;
    from = *p + 1;
  }
  s.ratio = s.bytes == 0 ? 0.0 : static_cast<double>(s.matches) / static_cast<double>(s.bytes);
  return s;
}

inline corpus_statistics corpus_stats(const CharSet& set, const CorpusDoc& doc) {
  return corpus_stats(set, doc.view());
}

} // namespace htmlscan
