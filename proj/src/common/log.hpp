#pragma once

#include <string>

namespace mfg::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Messages below the threshold are dropped. Default Warn; MFGLAB_LOG
/// (debug|info|warn|error|off) overrides it at first use.
void set_level(Level l);
Level level();
void write(Level l, const std::string& msg);

inline void debug(const std::string& m) { write(Level::Debug, m); }
inline void info(const std::string& m) { write(Level::Info, m); }
inline void warn(const std::string& m) { write(Level::Warn, m); }

}  // namespace mfg::log
