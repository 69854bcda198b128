#ifndef URLTRACE_PARALLEL_HPP
#define URLTRACE_PARALLEL_HPP

#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace urltrace {

/// Run fn(0..n-1) on a bounded worker pool and hand each result to the
/// sink in index order, regardless of completion order. jobs <= 1 runs
/// inline on the calling thread.
template <typename T, typename Fn, typename Sink>
void ordered_parallel_map(std::size_t n, unsigned jobs, Fn fn, Sink sink) {
    if (n == 0)
        return;
    jobs = std::min<std::size_t>(std::max(1u, jobs), n);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i)
            sink(i, fn(i));
        return;
    }

    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::condition_variable ready;

    {
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (unsigned w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n)
                        return;
                    std::optional<T> result;
                    std::exception_ptr error;
                    try {
                        result = fn(i);
                    } catch (...) {
                        error = std::current_exception();
                    }
                    {
                        std::lock_guard lock(mutex);
                        slots[i] = std::move(result);
                        errors[i] = error;
                    }
                    ready.notify_all();
                }
            });

        std::exception_ptr first_error;
        for (std::size_t i = 0; i < n && !first_error; ++i) {
            std::unique_lock lock(mutex);
            ready.wait(lock, [&] { return slots[i].has_value() || errors[i]; });
            if (errors[i]) {
                first_error = errors[i];
                break;
            }
            T value = std::move(*slots[i]);
            slots[i].reset();
            lock.unlock();
            sink(i, std::move(value));
        }
        if (first_error) {
            next.store(n); // drain remaining work
            for (auto& w : workers)
                w.join();
            std::rethrow_exception(first_error);
        }
    }
}

} // namespace urltrace

#endif // URLTRACE_PARALLEL_HPP
