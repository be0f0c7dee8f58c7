/*
 * Copyright 2026 The sessrec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sessrec/optim.hpp"

namespace sessrec {

/// Versioned binary dump of named parameter matrices plus a hash of the
/// producing configuration. Values are raw little-endian doubles, so a
/// save/load round trip is bit-exact. Format:
///   "SRCK" | u32 version | u64 config_hash | u32 n_blocks
///   per block: u32 name_len | name | u64 rows | u64 cols | doubles
void save_checkpoint(const std::string& path, std::uint64_t config_hash,
                     const std::vector<ParamBlock>& blocks);

/// Restores into pre-sized blocks; names, order and shapes must match.
/// Returns the stored config hash.
std::uint64_t load_checkpoint(const std::string& path,
                              const std::vector<ParamBlock>& blocks);

}  // namespace sessrec
