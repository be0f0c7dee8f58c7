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

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "sessrec/types.hpp"

namespace sessrec {

/// All registered algorithm names, table order.
const std::vector<std::string>& algorithm_names();

/// Builds a recommender by name with optional parameter overrides. Unknown
/// names and unknown parameter keys throw.
std::unique_ptr<Recommender> make_recommender(const std::string& name,
                                              const nlohmann::json& params,
                                              std::uint64_t seed);

}  // namespace sessrec
