#pragma once

#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace roadcast::threads {

/// Worker count: ROADCAST_THREADS env var if set, else hardware concurrency.
inline unsigned worker_count() {
    static unsigned n = [] {
        if (const char* env = std::getenv("ROADCAST_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<unsigned>(v);
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw ? hw : 1u;
    }();
    return n;
}

/// Persistent pool with a fork-join parallel_for. Tasks write disjoint output
/// slots, so results do not depend on the worker count or scheduling; any
/// cross-task reduction must happen after parallel_for returns, in index
/// order.
class Pool {
public:
    static Pool& instance() {
        static Pool pool(worker_count());
        return pool;
    }

    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
        if (n == 0) return;
        if (threads_.empty() || n == 1) {
            for (std::size_t i = 0; i < n; ++i) fn(i);
            return;
        }
        {
            std::lock_guard<std::mutex> lk(mu_);
            fn_ = &fn;
            total_ = n;
            next_ = 0;
            pending_ = n;
            ++generation_;
        }
        cv_.notify_all();
        run_worker();  // the calling thread participates
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [&] { return pending_ == 0; });
        fn_ = nullptr;
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

private:
    explicit Pool(unsigned workers) {
        for (unsigned i = 1; i < workers; ++i) {
            threads_.emplace_back([this] { worker_loop(); });
        }
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        while (true) {
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
            }
            run_worker();
        }
    }

    void run_worker() {
        while (true) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lk(mu_);
                if (!fn_ || next_ >= total_) return;
                i = next_++;
            }
            (*fn_)(i);
            {
                std::lock_guard<std::mutex> lk(mu_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(std::size_t)>* fn_ = nullptr;
    std::size_t total_ = 0, next_ = 0, pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    Pool::instance().parallel_for(n, fn);
}

}  // namespace roadcast::threads
