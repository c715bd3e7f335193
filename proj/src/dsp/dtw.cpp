// Copyright 2026 The clpenh Authors.
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


#include "clpenh/dsp/dtw.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "clpenh/errors.hpp"

namespace clpenh::dsp {

DtwPath dtw_align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, DtwDistance) {
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("dtw_align: empty sequence");
  if (a.cols() != b.cols()) {
    throw DimensionMismatchError("dtw_align: feature dimensions differ (" +
                                 std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) + ")");
  }
  const Eigen::Index m = a.rows(), n = b.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(m, n, kInf);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = (a.row(i) - b.row(j)).norm();
      if (i == 0 && j == 0) {
        acc(i, j) = d;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = acc(i - 1, j - 1);
      if (i > 0) best = std::min(best, acc(i - 1, j));
      if (j > 0) best = std::min(best, acc(i, j - 1));
      acc(i, j) = d + best;
    }
  }

  DtwPath path;
  path.cost = acc(m - 1, n - 1);
  Eigen::Index i = m - 1, j = n - 1;
  path.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = acc(i - 1, j - 1);
      const double up = acc(i - 1, j);
      const double left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    path.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

std::vector<int> map_second_to_first(const DtwPath& path, int n_second) {
  std::vector<int> out(static_cast<std::size_t>(n_second), -1);
  for (const auto& [i, j] : path.pairs) {
    if (j >= 0 && j < n_second && out[j] < 0) out[j] = i;
  }
  for (int j = 1; j < n_second; ++j) {
    if (out[j] < 0) out[j] = out[j - 1];
  }
  return out;
}

}  // namespace clpenh::dsp
