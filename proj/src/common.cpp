#include "kochfem/common.hpp"

#include <atomic>

namespace kochfem {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned count) { g_threads = count == 0 ? 1 : count; }
unsigned thread_count() { return g_threads; }

}  // namespace kochfem
