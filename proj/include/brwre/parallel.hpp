// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace brwre {

/*!
 * Fixed-size worker pool handing out contiguous index blocks.
 *
 * Callers write results into per-index slots, so the output never depends on
 * the thread count or on which worker ran which block.
 */
class Executor
{
  public:
    explicit Executor(unsigned threads = 1) : threads_(threads == 0 ? 1 : threads)
    {
    }

    unsigned threads() const noexcept { return threads_; }

    //! Call body(i) for every i in [0, count).
    template<class F>
    void parallel_for(std::size_t count, F&& body) const
    {
        if (threads_ == 1 || count < 2)
        {
            for (std::size_t i = 0; i < count; ++i)
                body(i);
            return;
        }
        std::size_t const workers = std::min<std::size_t>(threads_, count);
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w)
            {
                pool.emplace_back([&, w] {
                    std::size_t const begin = count * w / workers;
                    std::size_t const end = count * (w + 1) / workers;
                    try
                    {
                        for (std::size_t i = begin; i < end; ++i)
                            body(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                    }
                });
            }
        }
        if (failure)
            std::rethrow_exception(failure);
    }

  private:
    unsigned threads_;
};

//! Serial executor used as the default argument of module entry points.
inline Executor const& serial_executor()
{
    static Executor const serial{1};
    return serial;
}

}  // namespace brwre
