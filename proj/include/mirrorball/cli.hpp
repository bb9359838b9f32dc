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

#include <iosfwd>
#include <string>
#include <vector>

namespace mirrorball::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;

// Runs one subcommand (unwrap, reproject, register, merge, alpha, selftest,
// serve). args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Oracle-backed verification used by `selftest`; prints one line per check.
// Returns true when every check passes.
bool run_selftest(std::ostream& out);

} // namespace mirrorball::cli
