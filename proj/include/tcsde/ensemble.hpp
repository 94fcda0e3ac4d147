#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace tcsde {

// Worker count: explicit value if positive, else the THREADS environment
// variable, else 1.
inline unsigned resolve_threads(int requested = 0) {
    if (requested > 0) {
        return static_cast<unsigned>(requested);
    }
    if (const char* env = std::getenv("THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) {
            return static_cast<unsigned>(v);
        }
    }
    return 1;
}

// Evaluates fn(i) for i in [0, n) and returns the results in index order.
// Work is handed out dynamically; since every result depends only on its index,
// output does not depend on the number of threads.
template <class Fn>
auto run_ensemble(std::size_t n, unsigned threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using T = decltype(fn(std::size_t{}));
    std::vector<T> out(n);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = fn(i);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) {
                    err = std::current_exception();
                }
                next = n;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (err) {
        std::rethrow_exception(err);
    }
    return out;
}

// Pairwise sum in a fixed tree shape keyed by index.
inline double tree_sum(std::span<const double> v) {
    if (v.empty()) {
        return 0.0;
    }
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) {
            s += x;
        }
        return s;
    }
    const std::size_t h = v.size() / 2;
    return tree_sum(v.first(h)) + tree_sum(v.subspan(h));
}

}  // namespace tcsde
