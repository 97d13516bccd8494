/*
 * Copyright (C) 2026 The ctavatar authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ctav {

/// Persistent barrier-style worker pool. run() executes fn(t) once per lane
/// t in [0, size()); lane 0 runs on the caller. Reductions that loop over
/// lanes in index order are deterministic for a fixed pool size.
class ThreadPool {
public:
    /// threads <= 0 picks std::thread::hardware_concurrency().
    explicit ThreadPool(int threads = 0);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int size() const { return size_; }

    void run(const std::function<void(int)>& fn);

private:
    void worker_loop(int lane);

    int size_ = 1;
    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(int)>* job_ = nullptr;
    std::uint64_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
};

/// Splits [0, n) into size() contiguous chunks and calls
/// fn(lane, begin, end) per lane. pool == nullptr runs inline on one lane.
template <class Fn>
void parallel_chunks(ThreadPool* pool, std::int64_t n, Fn&& fn) {
    if (n <= 0) return;
    const int lanes = pool ? pool->size() : 1;
    if (lanes <= 1 || n == 1) {
        fn(0, std::int64_t{0}, n);
        return;
    }
    const std::int64_t chunk = (n + lanes - 1) / lanes;
    pool->run([&](int lane) {
        const std::int64_t begin = lane * chunk;
        const std::int64_t end = std::min<std::int64_t>(n, begin + chunk);
        if (begin < end) fn(lane, begin, end);
    });
}

}  // namespace ctav
