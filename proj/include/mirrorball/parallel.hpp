/*
 * Copyright 2026 The mirrorball Authors
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

#include <algorithm>
#include <thread>
#include <vector>

namespace mirrorball {

// Runs fn(row_begin, row_end) over disjoint row bands, one per hardware
// thread. fn must only write rows inside its band.
template <typename Fn>
void parallel_rows(int rows, Fn&& fn)
{
    const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, std::max(1, rows / 16));
    if (workers <= 1)
    {
        fn(0, rows);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const int band = (rows + workers - 1) / workers;
    for (int begin = 0; begin < rows; begin += band)
    {
        const int end = std::min(rows, begin + band);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

} // namespace mirrorball
