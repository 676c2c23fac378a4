#include "drive4d/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace drive4d::log {

namespace {
std::atomic<bool> g_verbose{false};
std::mutex g_mutex;

void emit(const char* level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  std::fprintf(stderr, "[%s] %.*s\n", level, static_cast<int>(message.size()), message.data());
}
}  // namespace

void set_verbose(bool v) { g_verbose = v; }
bool verbose() { return g_verbose; }

void info(std::string_view message) { emit("info", message); }
void warn(std::string_view message) { emit("warn", message); }
void debug(std::string_view message) {
  if (g_verbose) emit("debug", message);
}

}  // namespace drive4d::log
