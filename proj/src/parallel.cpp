#include "dflow/parallel.hpp"

#include <atomic>

namespace dflow {
namespace {

std::atomic<unsigned> g_threads{0};

}  // namespace

void set_thread_count(unsigned count) { g_threads.store(count); }

unsigned thread_count() {
  const unsigned requested = g_threads.load();
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace dflow
