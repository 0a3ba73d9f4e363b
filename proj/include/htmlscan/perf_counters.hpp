#pragma once

// Optional retired-instruction and cycle counters. Only Linux perf events
// are supported; everywhere else (or when the kernel refuses access) the
// counters report themselves unavailable.

#include <cstdint>
#include <optional>

#if defined(__linux__)
#include <linux/perf_event.h>
#include <sys/ioctl.h>
#include <sys/syscall.h>
#include <unistd.h>
#endif

namespace htmlscan {

struct counter_sample {
  std::uint64_t instructions = 0;
  std::uint64_t cycles = 0;
};

class perf_counters {
public:
  perf_counters() {
#if defined(__linux__)
    instructions_fd_ = open_counter(PERF_COUNT_HW_INSTRUCTIONS);
    cycles_fd_ = open_counter(PERF_COUNT_HW_CPU_CYCLES);
    if (instructions_fd_ < 0 || cycles_fd_ < 0) close_all();
#endif
  }

  perf_counters(const perf_counters&) = delete;
  perf_counters& operator=(const perf_counters&) = delete;
  ~perf_counters() { close_all(); }

  [[nodiscard]] bool available() const noexcept { return instructions_fd_ >= 0 && cycles_fd_ >= 0; }

  void start() noexcept {
#if defined(__linux__)
    if (!available()) return;
    ioctl(instructions_fd_, PERF_EVENT_IOC_RESET, 0);
    ioctl(cycles_fd_, PERF_EVENT_IOC_RESET, 0);
    ioctl(instructions_fd_, PERF_EVENT_IOC_ENABLE, 0);
    ioctl(cycles_fd_, PERF_EVENT_IOC_ENABLE, 0);
#endif
  }

  std::optional<counter_sample> stop() noexcept {
#if defined(__linux__)
    if (!available()) return std::nullopt;
    ioctl(instructions_fd_, PERF_EVENT_IOC_DISABLE, 0);
    ioctl(cycles_fd_, PERF_EVENT_IOC_DISABLE, 0);
    counter_sample s;
    if (read(instructions_fd_, &s.instructions, sizeof s.instructions) != sizeof s.instructions) return std::nullopt;
    if (read(cycles_fd_, &s.cycles, sizeof s.cycles) != sizeof s.cycles) return std::nullopt;
    return s;
#else
    return std::nullopt;
#endif
  }

private:
#if defined(__linux__)
  static int open_counter(std::uint64_t config) noexcept {
    perf_event_attr attr{};
    attr.type = PERF_TYPE_HARDWARE;
    attr.size = sizeof(attr);
    attr.config = config;
    attr.disabled = 1;
    attr.exclude_kernel = 1;
    attr.exclude_hv = 1;
    return static_cast<int>(syscall(SYS_perf_event_open, &attr, 0, -1, -1, 0));
  }
#endif

  void close_all() noexcept {
#if defined(__linux__)
    if (instructions_fd_ >= 0) ::close(instructions_fd_);
    if (cycles_fd_ >= 0) ::close(cycles_fd_);
#endif
    instructions_fd_ = -1;
    cycles_fd_ = -1;
  }

  int instructions_fd_ = -1;
  int cycles_fd_ = -1;
};

} // namespace htmlscan
