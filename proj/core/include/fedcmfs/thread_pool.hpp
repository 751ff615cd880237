#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace fedcmfs {

// Fixed-size worker pool for fanning batches out. Work items are indexed, so
// results land in pre-sized slots and the outcome never depends on scheduling.
class ThreadPool {
    struct Job {
        const std::function<void(size_t)>* fn = nullptr;
        size_t count = 0;
        std::atomic<size_t> next{0};
        std::atomic<size_t> pending{0};
    };

public:
    explicit ThreadPool(unsigned n_threads) {
        if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
        n_threads_ = n_threads;
        for (unsigned i = 0; i + 1 < n_threads; ++i) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    unsigned size() const { return n_threads_; }

    // Runs fn(i) for every i in [0, count). The calling thread participates;
    // returns once all items are done. Jobs are snapshots: a worker that wakes
    // late works on its own job object and can never touch a newer job.
    void parallel_for(size_t count, const std::function<void(size_t)>& fn) {
        if (count == 0) return;
        if (workers_.empty() || count == 1) {
            for (size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        auto job = std::make_shared<Job>();
        job->fn = &fn;
        job->count = count;
        job->pending.store(count, std::memory_order_relaxed);
        {
            std::lock_guard<std::mutex> lk(mu_);
            current_ = job;
        }
        cv_.notify_all();
        run_job(*job);
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [&] { return job->pending.load(std::memory_order_acquire) == 0; });
        if (current_ == job) current_.reset();
    }

private:
    void run_job(Job& job) {
        for (;;) {
            const size_t i = job.next.fetch_add(1, std::memory_order_relaxed);
            if (i >= job.count) break;
            (*job.fn)(i);
            if (job.pending.fetch_sub(1, std::memory_order_acq_rel) == 1) {
                std::lock_guard<std::mutex> lk(mu_);
                done_cv_.notify_all();
            }
        }
    }

    void worker_loop() {
        std::shared_ptr<Job> last;
        for (;;) {
            std::shared_ptr<Job> job;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return stop_ || (current_ && current_ != last); });
                if (stop_) return;
                job = current_;
            }
            last = job;
            if (job) run_job(*job);
        }
    }

    unsigned n_threads_ = 1;
    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    bool stop_ = false;
    std::shared_ptr<Job> current_;
};

} // namespace fedcmfs
