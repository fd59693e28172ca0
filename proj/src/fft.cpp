#include "cgoh/fft.hpp"

#include <fftw3.h>

#include <filesystem>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <utility>

namespace cgoh::fft {
namespace {

using Key = std::pair<std::vector<int>, int>;

struct PlanCache {
  std::shared_mutex mutex;
  std::map<Key, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [k, p] : plans) fftw_destroy_plan(p);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_plan plan_for(const std::vector<int>& dims, int sign) {
  auto& c = cache();
  const Key key{dims, sign};
  {
    std::shared_lock lock(c.mutex);
    auto it = c.plans.find(key);
    if (it != c.plans.end()) return it->second;
  }
  std::unique_lock lock(c.mutex);
  auto it = c.plans.find(key);
  if (it != c.plans.end()) return it->second;
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  // FFTW_ESTIMATE keeps plan selection independent of timing, which keeps
  // repeated runs bit-identical.
  auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
  fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch, scratch,
                              sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  if (!p) throw SolverError("fft: plan creation failed");
  c.plans.emplace(key, p);
  return p;
}

}  // namespace

void transform(const std::vector<int>& dims, cplx* data, int sign) {
  if (dims.empty()) throw ArgumentError("fft: empty dimensions");
  for (int d : dims)
    if (d <= 0) throw ArgumentError("fft: non-positive dimension");
  fftw_plan p = plan_for(dims, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, ptr, ptr);
}

int good_size(int n) {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

void load_wisdom(const std::string& dir) {
  if (dir.empty()) return;
  const auto path = std::filesystem::path(dir) / "fftw.wisdom";
  if (std::filesystem::exists(path)) {
    std::unique_lock lock(cache().mutex);
    fftw_import_wisdom_from_filename(path.string().c_str());
  }
}

void save_wisdom(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = std::filesystem::path(dir) / "fftw.wisdom";
  std::unique_lock lock(cache().mutex);
  fftw_export_wisdom_to_filename(path.string().c_str());
}

}  // namespace cgoh::fft
