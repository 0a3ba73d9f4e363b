#pragma once

// htmlscan command-line front end: scan, verify, bench, stats and synth.
//
// Exit codes: 0 ok, 1 I/O failure, 2 usage error, 3 verification mismatch.

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <htmlscan/htmlscan.hpp>

namespace htmlscan::cli {

enum exit_code : int { ok = 0, io_failure = 1, usage = 2, mismatch = 3 };

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct common_options {
  std::string chars = "LT,CR,AMP,NUL";
  std::string kernel;
  std::vector<std::string> files;
  std::vector<std::string> synth;
  bool json = false;
  bool csv = false;
};

inline std::vector<kernel_id> resolve_kernels(const std::string& name, kernel_id fallback) {
  if (name.empty()) return {fallback};
  if (name == "all") return {all_kernels.begin(), all_kernels.end()};
  try {
    return {parse_kernel_name(name)};
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
}

inline CharSet resolve_charset(const std::string& spec) {
  try {
    return parse_charset_spec(spec);
  } catch (const charset_error& e) {
    throw usage_error(e.what());
  }
}

inline std::vector<CorpusDoc> resolve_corpora(const common_options& opt, const CharSet& set) {
  std::vector<CorpusDoc> docs;
  for (const auto& f : opt.files) docs.push_back(load_corpus(f));
  for (const auto& s : opt.synth) {
    try {
      docs.push_back(generate_synthetic(set, parse_synth_spec(s)));
    } catch (const corpus_error& e) {
      if (e.code() == corpus_errc::io_error) throw;
      throw usage_error(e.what());
    }
  }
  if (docs.empty()) throw usage_error("no corpus given: pass a file path or --synth <spec>");
  return docs;
}

// RFC 4180 quoting for fields containing separators or quotes.
inline std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string percent(double ratio) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << ratio * 100.0 << '%';
  return s.str();
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

inline int cmd_scan(const common_options& opt, std::ostream& out) {
  const CharSet set = resolve_charset(opt.chars);
  const auto kernels = resolve_kernels(opt.kernel, kernel_id::index64);
  if (kernels.size() != 1) throw usage_error("scan takes a single kernel");
  const auto docs = resolve_corpora(opt, set);
  if (docs.size() != 1) throw usage_error("scan takes exactly one corpus");

  auto stream = open_stream(set, docs.front().view(), kernels.front());
  if (opt.json) {
    nlohmann::json positions = nlohmann::json::array();
    while (auto p = stream.next()) positions.push_back(*p);
    out << positions.dump() << '\n';
  } else {
    while (auto p = stream.next()) out << *p << '\n';
  }
  return ok;
}

inline int cmd_verify(const common_options& opt, std::ostream& out) {
  const CharSet set = resolve_charset(opt.chars);
  const auto kernels = opt.kernel.empty() ? resolve_kernels("all", kernel_id::scalar)
                                          : resolve_kernels(opt.kernel, kernel_id::scalar);
  const auto docs = resolve_corpora(opt, set);

  bool all_pass = true;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& doc : docs) {
    const auto verdicts = verify_kernels(set, doc.view(), kernels);
    nlohmann::json results = nlohmann::json::array();
    for (const auto& v : verdicts) {
      all_pass = all_pass && v.pass;
      if (opt.json) {
        results.push_back({{"kernel", kernel_name(v.kernel)},
                           {"status", v.pass ? "PASS" : "FAIL"},
                           {"matches", v.matches},
                           {"first_divergence", v.first_divergence ? nlohmann::json(*v.first_divergence)
                                                                   : nlohmann::json(nullptr)}});
      } else {
        out << (v.pass ? "PASS " : "FAIL ") << std::left << std::setw(9) << kernel_name(v.kernel) << ' '
            << doc.name << " (" << v.matches << " matches)";
        if (v.first_divergence) out << " first divergence at position " << *v.first_divergence;
        out << '\n';
      }
    }
    if (opt.json) report.push_back({{"corpus", doc.name}, {"bytes", doc.bytes.size()}, {"results", results}});
  }
  if (opt.json) out << report.dump(2) << '\n';
  return all_pass ? ok : mismatch;
}

inline nlohmann::json bench_json(const BenchReport& r) {
  auto optional_number = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"kernel", kernel_name(r.kernel)},
          {"corpus", r.corpus},
          {"bytes", r.bytes},
          {"matches", r.matches},
          {"reps", r.repetitions},
          {"warmup", r.warmup},
          {"total_bytes", r.total_bytes()},
          {"elapsed_s", r.elapsed_s},
          {"min_s", r.min_s},
          {"median_s", r.median_s},
          {"mean_s", r.mean_s},
          {"gbps", r.median_gbps},
          {"mean_gbps", r.throughput_gbps},
          {"checksum", hex64(r.checksum)},
          {"instructions_per_byte", optional_number(r.instructions_per_byte)},
          {"instructions_per_cycle", optional_number(r.instructions_per_cycle)}};
}

inline int cmd_bench(const common_options& opt, std::size_t reps, std::size_t warmup, bool counters,
                     bool pin_cpu, std::ostream& out, std::ostream& err) {
  if (reps < 1) throw usage_error("--reps must be at least 1");
  const CharSet set = resolve_charset(opt.chars);
  const auto kernels = opt.kernel.empty() ? resolve_kernels("all", kernel_id::scalar)
                                          : resolve_kernels(opt.kernel, kernel_id::scalar);
  const auto docs = resolve_corpora(opt, set);
  if (pin_cpu && !pin_to_current_cpu()) err << "warning: CPU pinning is not available on this platform\n";

  bench_options options;
  options.repetitions = reps;
  options.warmup = warmup;
  options.hardware_counters = counters;
  if (counters && !perf_counters().available()) {
    err << "note: hardware counters unavailable\n";
  }

  std::vector<BenchReport> reports;
  for (const auto& doc : docs) {
    try {
      auto r = run_bench(set, doc.view(), doc.name, kernels, options);
      reports.insert(reports.end(), r.begin(), r.end());
    } catch (const verification_error& e) {
      err << "verification error on " << doc.name << ": " << e.what() << '\n';
      return mismatch;
    }
  }

  if (opt.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(bench_json(r));
    out << arr.dump(2) << '\n';
  } else if (opt.csv) {
    out << "kernel,corpus,bytes,matches,reps,elapsed_s,gbps,checksum\n";
    for (const auto& r : reports) {
      out << kernel_name(r.kernel) << ',' << csv_field(r.corpus) << ',' << r.bytes << ',' << r.matches << ','
          << r.repetitions << ',' << std::setprecision(9) << r.elapsed_s << ',' << std::setprecision(6)
          << r.median_gbps << ',' << hex64(r.checksum) << '\n';
    }
  } else {
    std::size_t width = 8;
    for (const auto& r : reports) width = std::max(width, r.corpus.size() + 2);
    const auto name_w = static_cast<int>(width);
    out << std::left << std::setw(10) << "kernel" << std::setw(name_w) << "corpus" << std::right << std::setw(10)
        << "bytes" << std::setw(9) << "matches" << std::setw(6) << "reps" << std::setw(11) << "min ms"
        << std::setw(11) << "median ms" << std::setw(11) << "mean ms" << std::setw(9) << "GB/s" << "  checksum";
    if (counters) out << "           ins/byte  ins/cycle";
    out << '\n';
    for (const auto& r : reports) {
      out << std::left << std::setw(10) << kernel_name(r.kernel) << std::setw(name_w) << r.corpus << std::right
          << std::setw(10) << r.bytes << std::setw(9) << r.matches << std::setw(6) << r.repetitions << std::fixed
          << std::setprecision(4) << std::setw(11) << r.min_s * 1e3 << std::setw(11) << r.median_s * 1e3
          << std::setw(11) << r.mean_s * 1e3 << std::setprecision(2) << std::setw(9) << r.median_gbps << "  "
          << hex64(r.checksum);
      if (counters) {
        if (r.instructions_per_byte) {
          out << std::setw(11) << *r.instructions_per_byte << std::setw(11) << *r.instructions_per_cycle;
        } else {
          out << "  unavailable";
        }
      }
      out << std::defaultfloat << '\n';
    }
  }
  return ok;
}

inline int cmd_stats(const common_options& opt, std::ostream& out) {
  const CharSet set = resolve_charset(opt.chars);
  const auto docs = resolve_corpora(opt, set);
  if (opt.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& doc : docs) {
      const auto s = corpus_stats(set, doc);
      arr.push_back({{"file", doc.name}, {"bytes", s.bytes}, {"matches", s.matches}, {"ratio", s.ratio}});
    }
    out << arr.dump(2) << '\n';
  } else if (opt.csv) {
    out << "file,bytes,matches,ratio\n";
    for (const auto& doc : docs) {
      const auto s = corpus_stats(set, doc);
      out << csv_field(doc.name) << ',' << s.bytes << ',' << s.matches << ',' << s.ratio << '\n';
    }
  } else {
    std::size_t width = 6;
    for (const auto& doc : docs) width = std::max(width, doc.name.size() + 2);
    const auto name_w = static_cast<int>(width);
    out << std::left << std::setw(name_w) << "file" << std::right << std::setw(12) << "bytes" << std::setw(10)
        << "matches" << std::setw(9) << "ratio" << '\n';
    for (const auto& doc : docs) {
      const auto s = corpus_stats(set, doc);
      out << std::left << std::setw(name_w) << doc.name << std::right << std::setw(12) << s.bytes << std::setw(10)
          << s.matches << std::setw(9) << percent(s.ratio) << '\n';
    }
  }
  return ok;
}

inline int cmd_synth(const common_options& opt, const std::string& output, std::ostream& out) {
  const CharSet set = resolve_charset(opt.chars);
  if (opt.synth.size() != 1 || !opt.files.empty()) throw usage_error("synth takes exactly one --synth <spec>");
  const auto docs = resolve_corpora(opt, set);
  if (output.empty() || output == "-") {
    out.write(reinterpret_cast<const char*>(docs.front().bytes.data()),
              static_cast<std::streamsize>(docs.front().bytes.size()));
  } else {
    save_corpus(docs.front(), output);
  }
  return ok;
}

/// Parses argv and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Locate HTML trigger bytes with scalar and vectorized kernels"};
  app.require_subcommand(1);

  common_options opt;
  std::size_t reps = 10;
  std::size_t warmup = 2;
  bool counters = false;
  bool pin_cpu = false;
  std::string output;

  auto add_common = [&](CLI::App* sub, bool with_kernel) {
    sub->add_option("--chars", opt.chars, "Target set, e.g. 'LT,CR,AMP,NUL' or \"'<',\\x0D\"");
    if (with_kernel) sub->add_option("--kernel", opt.kernel, "scalar, webkit16, blink16, index64 or all");
    sub->add_option("--synth", opt.synth, "Synthetic corpus: length=<N>,density=<float>,seed=<u64>")
        ->allow_extra_args(false);
    sub->add_flag("--json", opt.json, "Machine-readable JSON output");
  };

  auto* scan = app.add_subcommand("scan", "Print every match position");
  add_common(scan, true);
  scan->add_option("files", opt.files, "Corpus file");

  auto* verify = app.add_subcommand("verify", "Check every kernel against the scalar kernel");
  add_common(verify, true);
  verify->add_option("files", opt.files, "Corpus files");

  auto* bench = app.add_subcommand("bench", "Measure throughput of each kernel");
  add_common(bench, true);
  bench->add_option("files", opt.files, "Corpus files");
  bench->add_flag("--csv", opt.csv, "CSV output");
  bench->add_option("--reps", reps, "Measured repetitions")->capture_default_str();
  bench->add_option("--warmup", warmup, "Discarded warmup rounds")->capture_default_str();
  bench->add_flag("--counters", counters, "Report instructions per byte and per cycle when available");
  bench->add_flag("--pin-cpu", pin_cpu, "Pin to the current CPU while measuring");

  auto* stats = app.add_subcommand("stats", "Bytes, matches and match ratio per corpus");
  add_common(stats, false);
  stats->add_option("files", opt.files, "Corpus files");
  stats->add_flag("--csv", opt.csv, "CSV output");

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus");
  add_common(synth, false);
  synth->add_option("-o,--output", output, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e_out;
    const int code = app.exit(e, o, e_out);
    out << o.str();
    err << e_out.str();
    return code == 0 ? ok : usage;
  }

  try {
    if (*scan) return cmd_scan(opt, out);
    if (*verify) return cmd_verify(opt, out);
    if (*bench) return cmd_bench(opt, reps, warmup, counters, pin_cpu, out, err);
    if (*stats) return cmd_stats(opt, out);
    if (*synth) return cmd_synth(opt, output, out);
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const corpus_error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == corpus_errc::io_error ? io_failure : usage;
  }
  return usage;
}

} // namespace htmlscan::cli
