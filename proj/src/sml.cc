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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lumiparam/error.h"
#include "lumiparam/sg.h"

namespace lumiparam {

namespace {

// Largest relative marginal error accepted at the iteration cap.
constexpr double kRoundingLimit = 1e-3;

double LogSumExp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double peak = v.maxCoeff();
  if (!std::isfinite(peak)) return peak;
  return peak + std::log((v.array() - peak).exp().sum());
}

std::vector<int> Support(const Eigen::VectorXd& mass) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    if (mass[i] > 0.0) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

TransportResult EntropicTransport(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                  const Eigen::MatrixXd& cost, double epsilon,
                                  double tolerance, int max_iterations) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (cost.rows() != a.size() || cost.cols() != b.size()) {
    throw InvalidArgument("cost matrix does not match the marginals");
  }
  // Zero-mass rows and columns carry no plan entries; solving on the
  // supports keeps every log finite.
  const std::vector<int> rows = Support(a);
  const std::vector<int> cols = Support(b);
  if (rows.empty() || cols.empty()) throw InvalidArgument("marginals must have positive mass");
  const int m = static_cast<int>(rows.size());
  const int n = static_cast<int>(cols.size());

  Eigen::MatrixXd c(m, n);
  Eigen::VectorXd log_a(m), log_b(n);
  for (int i = 0; i < m; ++i) log_a[i] = std::log(a[rows[i]]);
  for (int j = 0; j < n; ++j) log_b[j] = std::log(b[cols[j]]);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) c(i, j) = cost(rows[i], cols[j]);
  }
  const double mass = a.sum();

  Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd log_plan(m, n);
  TransportResult result;

  // One Sinkhorn sweep at regularization `eps`; returns the row-marginal L1
  // error of the resulting plan.
  auto sweep = [&](double eps) {
    for (int i = 0; i < m; ++i) {
      f[i] = eps * (log_a[i] - LogSumExp((g.transpose() - c.row(i)) / eps));
    }
    for (int j = 0; j < n; ++j) {
      g[j] = eps * (log_b[j] - LogSumExp((f - c.col(j)) / eps));
    }
    log_plan = ((c.colwise() - f).rowwise() - g.transpose()) / -eps;
    const Eigen::VectorXd row_sums = log_plan.array().exp().rowwise().sum();
    double error = 0.0;
    for (int i = 0; i < m; ++i) error += std::abs(row_sums[i] - a[rows[i]]);
    return error;
  };

  // Epsilon scaling: solve a sequence of halving regularizations, warm
  // starting the potentials, before iterating at the requested epsilon.
  const double cost_scale = std::max(c.cwiseAbs().maxCoeff(), epsilon);
  std::vector<double> schedule;
  for (double eps = cost_scale; eps > epsilon; eps *= 0.5) schedule.push_back(eps);
  int iterations = 0;
  for (double eps : schedule) {
    for (int it = 0; it < 200 && iterations < max_iterations / 2; ++it) {
      ++iterations;
      if (sweep(eps) <= tolerance * mass) break;
    }
  }
  double error = std::numeric_limits<double>::infinity();
  while (iterations < max_iterations) {
    ++iterations;
    error = sweep(epsilon);
    if (error <= tolerance * mass) break;
  }
  if (!(error <= kRoundingLimit * mass)) {
    throw ConvergenceError("Sinkhorn did not converge in " + std::to_string(max_iterations) +
                           " iterations (marginal error " + std::to_string(error) + ")");
  }
  result.iterations = iterations;
  result.marginal_error = error;

  // Round onto the exact marginals: scale down rows and columns that carry
  // too much mass, then spread the remaining deficit as a rank-one update.
  Eigen::MatrixXd plan = log_plan.array().exp();
  Eigen::VectorXd sub_a(m), sub_b(n);
  for (int i = 0; i < m; ++i) sub_a[i] = a[rows[i]];
  for (int j = 0; j < n; ++j) sub_b[j] = b[cols[j]];
  const Eigen::VectorXd row_scale = (sub_a.array() / plan.rowwise().sum().array()).min(1.0);
  plan = row_scale.asDiagonal() * plan;
  const Eigen::VectorXd col_scale = (sub_b.array() / plan.colwise().sum().transpose().array()).min(1.0);
  plan = plan * col_scale.asDiagonal();
  const Eigen::VectorXd row_deficit = (sub_a - plan.rowwise().sum()).cwiseMax(0.0);
  const Eigen::VectorXd col_deficit = (sub_b - plan.colwise().sum().transpose()).cwiseMax(0.0);
  const double deficit = row_deficit.sum();
  if (deficit > 0.0) plan += row_deficit * col_deficit.transpose() / deficit;

  result.plan = Eigen::MatrixXd::Zero(a.size(), b.size());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) result.plan(rows[i], cols[j]) = plan(i, j);
  }
  result.cost = (plan.array() * c.array()).sum();
  return result;
}

Eigen::MatrixXd AnchorDistanceMatrix(const AnchorSet& anchors) {
  const int n = anchors.count();
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d(i, j) = i == j ? 0.0 : GeodesicDistance(anchors.dirs.row(i), anchors.dirs.row(j));
    }
  }
  return d;
}

double SmlLoss(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt,
               const AnchorSet& anchors, double epsilon) {
  auto check = [&](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != anchors.count()) {
      throw InvalidArgument(std::string(name) + " has " + std::to_string(v.size()) +
                            " entries, expected " + std::to_string(anchors.count()));
    }
    if (!v.allFinite() || (v.array() < 0.0).any() || std::abs(v.sum() - 1.0) > 1e-6) {
      throw InvalidArgument(std::string(name) + " is not a normalized distribution");
    }
  };
  check(pred, "prediction");
  check(gt, "target");
  // The cost matrix is symmetric, so transporting gt to pred has the same
  // optimum; a fixed orientation makes the iterate sequence, and thus the
  // returned value, identical for both argument orders.
  const bool swap = std::lexicographical_compare(gt.begin(), gt.end(), pred.begin(), pred.end());
  const Eigen::MatrixXd cost = AnchorDistanceMatrix(anchors);
  return swap ? EntropicTransport(gt, pred, cost, epsilon).cost
              : EntropicTransport(pred, gt, cost, epsilon).cost;
}

}  // namespace lumiparam
