#include "meshforge/parallel.hpp"

#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>

#include <tbb/global_control.h>
#include <tbb/info.h>

namespace meshforge {
namespace {

std::size_t requested_threads() {
  const char* env = std::getenv("MESHFORGE_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<std::size_t>(v) : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

std::once_flag g_once;
std::unique_ptr<tbb::global_control> g_control;

}  // namespace

void apply_thread_limit() {
  std::call_once(g_once, [] {
    const std::size_t n = requested_threads();
    if (n > 0)
      g_control = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, n);
  });
}

std::size_t worker_count() {
  apply_thread_limit();
  return tbb::global_control::active_value(tbb::global_control::max_allowed_parallelism);
}

}  // namespace meshforge
