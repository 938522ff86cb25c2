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

#include "abcg/harness/stellar.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "abcg/errors.hpp"

namespace abcg::harness {
namespace {

const std::set<std::string> kMissing{"NA", "NaN", "na", "nan", "-", "?"};

bool parse_double(const std::string& token, double& out) {
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

}  // namespace

StellarFlux load_stellar_flux(const std::filesystem::path& path, std::size_t columns, std::size_t expected_days) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open flux file '" + path.string() + "'");

  StellarFlux out;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    if (tokens.size() != columns) {
      throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                            " columns, found " + std::to_string(tokens.size()));
    }
    std::vector<double> values(columns);
    bool missing = false;
    for (std::size_t c = 0; c < columns; ++c) {
      if (kMissing.contains(tokens[c])) {
        missing = true;
        continue;
      }
      if (!parse_double(tokens[c], values[c])) {
        throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": malformed value '" + tokens[c] +
                              "'");
      }
    }
    if (missing) {
      out.dropped_lines.push_back(line_no);
    } else {
      rows.push_back(std::move(values));
    }
  }
  if (rows.empty()) throw DataFormatError(path.string() + ": no complete rows");

  out.data.resize(static_cast<Eigen::Index>(columns), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t c = 0; c < columns; ++c) {
      out.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = rows[t][c];
    }
  }
  if (!out.dropped_lines.empty()) {
    out.warnings.push_back("dropped " + std::to_string(out.dropped_lines.size()) + " rows with missing values");
  }
  if (rows.size() != expected_days) {
    out.warnings.push_back("expected " + std::to_string(expected_days) + " usable days, found " +
                           std::to_string(rows.size()));
  }
  return out;
}

}  // namespace abcg::harness
