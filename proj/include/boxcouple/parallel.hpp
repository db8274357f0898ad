#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace boxcouple::parallel {

/// Sets the OpenMP worker count for every kernel; 0 restores the runtime default.
void set_thread_count(int threads);
int thread_count();

/// Outcome of a budgeted search split into independent subtrees.
struct PrefixOutcome {
  /// Subtrees [0, completed_prefix) were explored completely and fit the budget.
  std::size_t completed_prefix = 0;
  bool complete = false;
  std::uint64_t nodes = 0;
};

/// Signature of one subtree exploration. `cap` is the node limit for this
/// subtree; returning a count above `cap` means the subtree was cut short.
/// `stop()` turns true once the subtree's result can no longer be used.
using SubtreeFn =
    std::function<std::uint64_t(std::size_t index, std::uint64_t cap, const std::function<bool()>& stop)>;

/// Explores `count` subtrees concurrently under a shared node budget.
///
/// The kept prefix is the longest run of leading subtrees whose node counts
/// sum to at most `budget`. Each subtree's count is independent of the
/// schedule, so the prefix (and everything derived from it) is identical for
/// every thread count.
PrefixOutcome explore_prefix(std::size_t count, std::uint64_t budget, const SubtreeFn& explore);

}  // namespace boxcouple::parallel
