#pragma once

#include <string>
#include <vector>

namespace cgoh::diag {

struct Warning {
  std::string code;
  std::string message;
};

// Process-wide warning sink; safe to call from worker threads.
void warn(std::string code, std::string message);
std::vector<Warning> snapshot();
std::vector<Warning> drain();
void clear();

}  // namespace cgoh::diag
