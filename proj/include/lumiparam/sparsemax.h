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

#ifndef LUMIPARAM_SPARSEMAX_H_
#define LUMIPARAM_SPARSEMAX_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "lumiparam/error.h"
#include "lumiparam/sphere.h"

namespace lumiparam {

// Support size and threshold of a simplex projection.
template <typename T>
struct SimplexThreshold {
  int kappa = 0;
  T tau = T(0);
};

// Scans values in the given order and returns the largest prefix length k
// with 1 + k * min(prefix) > sum(prefix), and tau = (sum of that prefix - 1)
// / k. When `order` is value-descending, min(prefix) is simply the last
// element and this is the sparsemax support rule.
template <typename Derived>
SimplexThreshold<typename Derived::Scalar> PrefixSupportRule(
    const Eigen::MatrixBase<Derived>& values, const std::vector<int>& order) {
  using T = typename Derived::Scalar;
  SimplexThreshold<T> out;
  T running_sum = T(0);
  T kappa_sum = T(0);
  T running_min = std::numeric_limits<T>::infinity();
  for (std::size_t k = 1; k <= order.size(); ++k) {
    const T v = values[order[k - 1]];
    running_sum += v;
    running_min = std::min(running_min, v);
    if (T(1) + T(k) * running_min > running_sum) {
      out.kappa = static_cast<int>(k);
      kappa_sum = running_sum;
    }
  }
  out.tau = (kappa_sum - T(1)) / T(out.kappa);
  return out;
}

// Euclidean projection of `z` onto the probability simplex (sparsemax).
// Throws InvalidArgument for empty or non-finite input.
template <typename Derived>
VectorX<typename Derived::Scalar> Sparsemax(const Eigen::MatrixBase<Derived>& z,
                                            SimplexThreshold<typename Derived::Scalar>* threshold = nullptr) {
  using T = typename Derived::Scalar;
  if (z.size() < 1 || !z.allFinite()) {
    throw InvalidArgument("sparsemax needs a non-empty finite vector");
  }
  std::vector<int> order(z.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return z[a] > z[b]; });
  const SimplexThreshold<T> t = PrefixSupportRule(z, order);
  if (threshold != nullptr) *threshold = t;
  return (z.array() - t.tau).cwiseMax(T(0)).matrix();
}

// Steps 1-3 of SLSparsemax: normalization against the maximum, similarity to
// the neighborhood mean, and the resulting credibility ordering.
struct Credibility {
  Eigen::VectorXd p_norm;  // p - max(p), <= 0
  Eigen::VectorXd p_simi;  // exp(-|p_norm_i - mean_{j in nbr(i)} p_norm_j|)
  Eigen::VectorXd p_cred;  // p_norm / max(p_simi, 1e-30)
  std::vector<int> order;  // indices by descending p_cred, ties by index
};

struct CredibilityReport : Credibility {
  int kappa = 0;
  double tau = 0.0;
  double input_sum = 0.0;
  // |sum(p) - 1| > 1e-6: the output is then not a distribution.
  bool input_unnormalized = false;
};

struct SlSparsemaxResult {
  Eigen::VectorXd p;
  CredibilityReport report;
};

// Throws InvalidArgument on non-finite input, a size mismatch with the
// anchors, or an empty neighborhood.
Credibility ComputeCredibility(const Eigen::VectorXd& p, const AnchorSet& anchors);

// Neighborhood-aware sparsemax: values are visited in credibility order and
// the prefix rule (with the prefix minimum, since credibility order need not
// be value order) selects kappa and tau; out_i = max(p_i - tau, 0).
// The input is not renormalized; an unnormalized input is reported.
SlSparsemaxResult SlSparsemax(const Eigen::VectorXd& p, const AnchorSet& anchors);

}  // namespace lumiparam

#endif  // LUMIPARAM_SPARSEMAX_H_
