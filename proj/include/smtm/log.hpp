#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace smtm::log {

enum class Level { debug, info, warning };

using Sink = std::function<void(Level, std::string_view)>;

// Replaces the process-wide sink and returns the previous one. The default
// sink writes warnings to stderr and drops debug messages.
Sink set_sink(Sink sink);

void write(Level level, std::string_view message);

inline void warn(std::string_view message) { write(Level::warning, message); }
inline void info(std::string_view message) { write(Level::info, message); }
inline void debug(std::string_view message) { write(Level::debug, message); }

}  // namespace smtm::log
