#include "riskgraph/runtime.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace riskgraph::runtime {

std::size_t max_threads() {
    static const std::size_t cap = [] {
        std::size_t hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        if (const char* env = std::getenv("RISKGRAPH_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            // The env var replaces the machine-core default outright; values
            // above the core count are honored so determinism across thread
            // counts stays testable on small machines.
            if (end != env && v >= 1) hw = std::min<std::size_t>(static_cast<std::size_t>(v), 256);
        }
        return hw;
    }();
    return cap;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(max_threads(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::vector<std::pair<std::size_t, std::exception_ptr>> errors;
    std::mutex errors_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(errors_mutex);
                    errors.emplace_back(i, std::current_exception());
                }
            }
        });
    }
    for (auto& t : pool) t.join();

    if (!errors.empty()) {
        auto first = std::min_element(errors.begin(), errors.end(),
                                      [](const auto& a, const auto& b) { return a.first < b.first; });
        std::rethrow_exception(first->second);
    }
}

}  // namespace riskgraph::runtime
