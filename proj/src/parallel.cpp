#include "boxcouple/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <limits>
#include <mutex>
#include <vector>

namespace boxcouple::parallel {

namespace {
int g_default_threads = 0;
}

void set_thread_count(int threads) {
  if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(threads > 0 ? threads : g_default_threads);
}

int thread_count() { return omp_get_max_threads(); }

PrefixOutcome explore_prefix(std::size_t count, std::uint64_t budget, const SubtreeFn& explore) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::uint64_t> nodes(count, 0);
  std::vector<char> done(count, 0);
  std::atomic<std::size_t> cutoff{kNone};
  std::mutex mutex;
  std::size_t scanned = 0;
  std::uint64_t cumulative = 0;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < count; ++i) {
    if (i > cutoff.load(std::memory_order_relaxed)) continue;
    std::function<bool()> stop = [&cutoff, i] { return i > cutoff.load(std::memory_order_relaxed); };
    std::uint64_t used = explore(i, budget, stop);

    std::lock_guard<std::mutex> lock(mutex);
    nodes[i] = used;
    done[i] = 1;
    while (scanned < count && done[scanned] && cutoff.load() == kNone) {
      cumulative += nodes[scanned];
      if (nodes[scanned] > budget || cumulative > budget) {
        cutoff.store(scanned);
        break;
      }
      ++scanned;
    }
  }

  PrefixOutcome outcome;
  std::size_t cut = cutoff.load();
  outcome.completed_prefix = cut == kNone ? count : cut;
  outcome.complete = cut == kNone;
  for (std::size_t i = 0; i < outcome.completed_prefix; ++i) outcome.nodes += nodes[i];
  if (!outcome.complete) outcome.nodes += nodes[cut];
  return outcome;
}

}  // namespace boxcouple::parallel
