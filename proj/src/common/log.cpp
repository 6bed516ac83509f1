#include "common/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace mfg::log {

namespace {

Level from_env() {
  const char* v = std::getenv("MFGLAB_LOG");
  if (!v) return Level::Warn;
  if (!std::strcmp(v, "debug")) return Level::Debug;
  if (!std::strcmp(v, "info")) return Level::Info;
  if (!std::strcmp(v, "error")) return Level::Error;
  if (!std::strcmp(v, "off")) return Level::Off;
  return Level::Warn;
}

std::atomic<int>& threshold() {
  static std::atomic<int> t{int(from_env())};
  return t;
}

}  // namespace

void set_level(Level l) { threshold().store(int(l)); }
Level level() { return Level(threshold().load()); }

void write(Level l, const std::string& msg) {
  if (int(l) < threshold().load()) return;
  static std::mutex mu;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::lock_guard lock(mu);
  std::fprintf(stderr, "[mfglab %s] %s\n", names[int(l)], msg.c_str());
}

}  // namespace mfg::log
