#pragma once

#include <string_view>

namespace drive4d::log {

void set_verbose(bool verbose);
bool verbose();

// Line-oriented messages on stderr.
void info(std::string_view message);
void warn(std::string_view message);
void debug(std::string_view message);

}  // namespace drive4d::log
