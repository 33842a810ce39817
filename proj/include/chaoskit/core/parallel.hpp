// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>

#include <omp.h>

namespace chaoskit
{

//! Threads used by top-level parallel loops (0: OpenMP default).
void set_thread_count(int threads);
int thread_count();

/*!
 * Parallel loop over [0, n) with disjoint per-index work.
 *
 * Runs serially when already inside a parallel region. An exception thrown
 * by any index is rethrown after the loop; when several indices throw, the
 * one with the lowest index wins so error reporting does not depend on the
 * schedule.
 */
template<class F>
void parallel_for(std::size_t n, F&& body)
{
    std::exception_ptr first;
    std::size_t first_index = std::numeric_limits<std::size_t>::max();
    std::mutex m;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count()) if (n > 1 && !omp_in_parallel())
    for (std::ptrdiff_t i = 0; i < count; ++i)
    {
        try
        {
            body(static_cast<std::size_t>(i));
        }
        catch (...)
        {
            std::lock_guard<std::mutex> lock(m);
            if (static_cast<std::size_t>(i) < first_index)
            {
                first_index = static_cast<std::size_t>(i);
                first = std::current_exception();
            }
        }
    }
    if (first)
        std::rethrow_exception(first);
}

}  // namespace chaoskit
