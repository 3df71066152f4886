#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace dunkl {

/// Paths per work unit.  Fixed so that chunk boundaries, and therefore every
/// reduction, are independent of the thread count.
inline constexpr std::size_t kPathChunk = 64;

/// 0 means "all hardware threads".
inline int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(chunk_index, begin, end) for consecutive chunks of [0, count).
/// Chunks run concurrently on up to `threads` threads.  If any chunk throws,
/// the exception of the lowest-indexed failing chunk is rethrown.
template <typename Fn>
void for_each_chunk(std::size_t count, std::size_t chunk, int threads, Fn&& fn) {
    const std::size_t chunks = (count + chunk - 1) / chunk;
    std::vector<std::exception_ptr> errors(chunks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) {
                return;
            }
            try {
                fn(c, c * chunk, std::min(count, (c + 1) * chunk));
            } catch (...) {
                errors[c] = std::current_exception();
            }
        }
    };
    const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                                                                 std::max<std::size_t>(chunks, 1)));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

/// Tree reduction in index order: reduce(left half) + reduce(right half).
template <typename T, typename Add>
T pairwise_reduce(std::span<const T> items, const T& zero, Add add) {
    if (items.empty()) {
        return zero;
    }
    if (items.size() == 1) {
        return items.front();
    }
    const std::size_t half = items.size() / 2;
    return add(pairwise_reduce(items.first(half), zero, add), pairwise_reduce(items.subspan(half), zero, add));
}

inline double pairwise_sum(std::span<const double> values) {
    return pairwise_reduce<double>(values, 0.0, std::plus<>());
}

}  // namespace dunkl
