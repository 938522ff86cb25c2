// Copyright 2026 The abcgibbs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ABCG_HARNESS_STELLAR_HPP
#define ABCG_HARNESS_STELLAR_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "abcg/model.hpp"

namespace abcg::harness {

struct StellarFlux {
  /// One series per row (objects x days).
  Dataset data;
  /// 1-based line numbers of rows dropped for missing values.
  std::vector<std::size_t> dropped_lines;
  std::vector<std::string> warnings;
};

/// Whitespace-delimited daily flux, one column per object. Lines starting
/// with '#' and blank lines are skipped. Rows holding a missing marker
/// (NA, NaN, na, nan, -, ?) are dropped. Warns unless `expected_days` rows remain.
/// Throws DataFormatError (with the line number) on a bad token or column count.
StellarFlux load_stellar_flux(const std::filesystem::path& path, std::size_t columns = 7,
                              std::size_t expected_days = 208);

}  // namespace abcg::harness

#endif  // ABCG_HARNESS_STELLAR_HPP
