/*
   Copyright 2026 The switchavg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace switchavg {

/// Runs fn(k) for k in [begin, end) on up to `threads` workers. Work items
/// are claimed dynamically, so fn must write only to slot k of its output.
/// If any item throws, the exception of the lowest failing index is
/// rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, std::size_t threads, Fn&& fn) {
    if (end <= begin) return;
    const std::size_t count = end - begin;
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, count);
    std::vector<std::exception_ptr> errors(count);

    if (workers == 1) {
        for (std::size_t k = begin; k < end; ++k) {
            try {
                fn(k);
            } catch (...) {
                errors[k - begin] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{begin};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < end; k = next++) {
                    try {
                        fn(k);
                    } catch (...) {
                        errors[k - begin] = std::current_exception();
                    }
                }
            });
        }
        pool.clear();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace switchavg
