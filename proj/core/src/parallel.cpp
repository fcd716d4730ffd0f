#include "ckt/parallel.hpp"

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ckt {

void parallel_for(std::size_t count, std::size_t n_threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    if (n_threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i, 0);
        return;
    }
    const std::size_t workers = std::min(n_threads, count);
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i, w);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ckt
