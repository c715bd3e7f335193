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


#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace clpenh::dsp {

enum class DtwDistance { kEuclidean };

// Monotone alignment from (0, 0) to (M-1, N-1) using (+1,0), (0,+1) and
// (+1,+1) steps.
struct DtwPath {
  std::vector<std::pair<int, int>> pairs;
  double cost = 0.0;
};

// Rows are frames. Throws DimensionMismatchError on differing feature
// dimension and std::invalid_argument on empty input. Ties prefer the
// diagonal step.
DtwPath dtw_align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                  DtwDistance distance = DtwDistance::kEuclidean);

// For each frame j of the second sequence, the first frame of the first
// sequence paired with it.
std::vector<int> map_second_to_first(const DtwPath& path, int n_second);

}  // namespace clpenh::dsp
