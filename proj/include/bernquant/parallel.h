#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace bernquant {

// Worker count: BERNQUANT_THREADS if set to a positive integer, otherwise
// std::thread::hardware_concurrency().
unsigned thread_count();

// Calls body(i) for i in [0, count) on up to thread_count() threads, in
// contiguous chunks. If any call throws, the exception raised by the
// smallest index is rethrown after all workers finish, so failures are
// reported the same way as in a sequential loop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace bernquant
