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

#ifndef ABCG_HARNESS_OUTPUT_HPP
#define ABCG_HARNESS_OUTPUT_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "abcg/density_grid.hpp"

namespace abcg::harness {

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double v);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Long format: iteration,block,component,value. Iterations are numbered from `first_iteration`.
void write_samples_csv(const std::filesystem::path& path, const Eigen::MatrixXd& samples,
                       const std::vector<std::string>& block_names, const std::vector<Eigen::Index>& block_dims,
                       std::size_t first_iteration = 0);

/// Columns x,density.
void write_density_csv(const std::filesystem::path& path, const DensityGrid& grid);

/// Silverman-bandwidth Gaussian KDE of the sample, written as x,density.
DensityGrid emit_density(std::span<const double> sample, Eigen::Index resolution, const std::filesystem::path& path);

}  // namespace abcg::harness

#endif  // ABCG_HARNESS_OUTPUT_HPP
