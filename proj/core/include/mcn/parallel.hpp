#pragma once

#include <cstdint>
#include <functional>

namespace mcn {

/// Number of worker threads tensor kernels may use. Initialized from the
/// MINICONVNET_THREADS environment variable, falling back to the hardware
/// concurrency.
std::int64_t thread_count();

/// Overrides the worker count at runtime. 0 restores the environment/hardware
/// default. Must not be called while a parallel_for is running.
void set_thread_count(std::int64_t count);

/// Runs body(lo, hi) over a static partition of [begin, end). Every index is
/// processed by exactly one worker, and each output an implementation writes
/// is produced serially by that worker, so results do not depend on the
/// partition. Nested calls from inside a worker run inline.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace mcn
