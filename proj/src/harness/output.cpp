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

#include "abcg/harness/output.hpp"

#include <cstdio>
#include <fstream>

#include "abcg/diagnostics.hpp"
#include "abcg/errors.hpp"

namespace abcg::harness {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_samples_csv(const std::filesystem::path& path, const Eigen::MatrixXd& samples,
                       const std::vector<std::string>& block_names, const std::vector<Eigen::Index>& block_dims,
                       std::size_t first_iteration) {
  std::string text = "iteration,block,component,value\n";
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    Eigen::Index col = 0;
    for (std::size_t b = 0; b < block_names.size(); ++b) {
      for (Eigen::Index c = 0; c < block_dims[b]; ++c, ++col) {
        text += std::to_string(first_iteration + static_cast<std::size_t>(r));
        text += ',';
        text += block_names[b];
        text += ',';
        text += std::to_string(c);
        text += ',';
        text += format_double(samples(r, col));
        text += '\n';
      }
    }
  }
  write_text(path, text);
}

void write_density_csv(const std::filesystem::path& path, const DensityGrid& grid) {
  std::string text = "x,density\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    text += format_double(grid.x(i)) + "," + format_double(grid.values[i]) + "\n";
  }
  write_text(path, text);
}

DensityGrid emit_density(std::span<const double> sample, Eigen::Index resolution, const std::filesystem::path& path) {
  DensityGrid g = kde_grid(sample, resolution);
  write_density_csv(path, g);
  return g;
}

}  // namespace abcg::harness
