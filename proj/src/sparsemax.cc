// Copyright 2026 The Lumiparam Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lumiparam/sparsemax.h"

#include <string>

namespace lumiparam {

Credibility ComputeCredibility(const Eigen::VectorXd& p, const AnchorSet& anchors) {
  const int n = static_cast<int>(p.size());
  if (n < 1 || !p.allFinite()) throw InvalidArgument("credibility needs a non-empty finite vector");
  if (n != anchors.count() || static_cast<int>(anchors.neighbors.size()) != n) {
    throw InvalidArgument("distribution has " + std::to_string(n) + " entries but there are " +
                          std::to_string(anchors.count()) + " anchors");
  }
  Credibility c;
  c.p_norm = p.array() - p.maxCoeff();
  c.p_simi.resize(n);
  c.p_cred.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& nbrs = anchors.neighbors[i];
    if (nbrs.empty()) throw InvalidArgument("anchor " + std::to_string(i) + " has no neighbors");
    double mean = 0.0;
    for (int j : nbrs) mean += c.p_norm[j];
    mean /= static_cast<double>(nbrs.size());
    c.p_simi[i] = std::exp(-std::abs(c.p_norm[i] - mean));
    c.p_cred[i] = c.p_norm[i] / std::max(c.p_simi[i], 1e-30);
  }
  c.order.resize(n);
  std::iota(c.order.begin(), c.order.end(), 0);
  std::stable_sort(c.order.begin(), c.order.end(),
                   [&](int a, int b) { return c.p_cred[a] > c.p_cred[b]; });
  return c;
}

SlSparsemaxResult SlSparsemax(const Eigen::VectorXd& p, const AnchorSet& anchors) {
  SlSparsemaxResult result;
  static_cast<Credibility&>(result.report) = ComputeCredibility(p, anchors);
  const SimplexThreshold<double> t = PrefixSupportRule(p, result.report.order);
  result.report.kappa = t.kappa;
  result.report.tau = t.tau;
  result.report.input_sum = p.sum();
  result.report.input_unnormalized = std::abs(result.report.input_sum - 1.0) > 1e-6;
  result.p = (p.array() - t.tau).cwiseMax(0.0);
  return result;
}

}  // namespace lumiparam
