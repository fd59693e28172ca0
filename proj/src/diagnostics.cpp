#include "cgoh/diagnostics.hpp"

#include <mutex>

namespace cgoh::diag {
namespace {
std::mutex g_mutex;
std::vector<Warning> g_warnings;
constexpr std::size_t kMaxWarnings = 10000;
}  // namespace

void warn(std::string code, std::string message) {
  std::lock_guard lock(g_mutex);
  if (g_warnings.size() < kMaxWarnings) g_warnings.push_back({std::move(code), std::move(message)});
}

std::vector<Warning> snapshot() {
  std::lock_guard lock(g_mutex);
  return g_warnings;
}

std::vector<Warning> drain() {
  std::lock_guard lock(g_mutex);
  std::vector<Warning> out;
  out.swap(g_warnings);
  return out;
}

void clear() {
  std::lock_guard lock(g_mutex);
  g_warnings.clear();
}

}  // namespace cgoh::diag
