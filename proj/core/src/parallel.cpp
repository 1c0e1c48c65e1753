#include "mfollow/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace mfollow {

namespace {
std::atomic<std::size_t> g_override{0};
}

std::size_t configured_threads() {
    const std::size_t forced = g_override.load();
    if (forced > 0)
        return forced;
    if (const char* env = std::getenv("MFOLLOW_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<std::size_t>(v);
    }
    return 1;
}

void set_thread_override(std::size_t threads) {
    g_override.store(threads);
}

void parallel_for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                         std::size_t block_size) {
    if (n == 0)
        return;
    const std::size_t blocks = (n + block_size - 1) / block_size;
    const std::size_t threads = std::min(configured_threads(), blocks);
    if (threads <= 1) {
        for (std::size_t b = 0; b < blocks; ++b)
            fn(b * block_size, std::min(n, (b + 1) * block_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= blocks)
                return;
            fn(b * block_size, std::min(n, (b + 1) * block_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term,
                    std::size_t block_size) {
    if (n == 0)
        return 0.0;
    const std::size_t blocks = (n + block_size - 1) / block_size;
    std::vector<double> partial(blocks, 0.0);
    parallel_for_blocks(
        n,
        [&](std::size_t begin, std::size_t end) {
            const std::size_t b = begin / block_size;
            double acc = 0.0;
            for (std::size_t i = begin; i < end; ++i)
                acc += term(i);
            partial[b] = acc;
        },
        block_size);
    double total = 0.0;
    for (double v : partial)
        total += v;  // ascending block order, independent of worker count
    return total;
}

} // namespace mfollow
