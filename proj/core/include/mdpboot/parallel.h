#pragma once

#include <cstddef>
#include <functional>

namespace mdpboot {

/// Worker count used when a caller passes 0: MDPBOOT_WORKERS if set,
/// otherwise the hardware concurrency.
std::size_t default_workers();

/// Calls body(begin, end) on contiguous chunks of [0, count). Chunks are
/// processed concurrently when workers > 1; exceptions are rethrown on the
/// calling thread. Results must not depend on the chunking.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace mdpboot
