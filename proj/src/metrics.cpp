// Copyright 2026 The qbm-pqa Authors.
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

#include "qbm/metrics.hpp"

#include <algorithm>
#include <vector>

#include "qbm/error.hpp"

namespace qbm {

double accuracy(std::span<const ScoredPrediction> preds) {
  if (preds.empty()) throw Error("accuracy of an empty prediction list");
  std::size_t correct = 0;
  for (const auto& p : preds) correct += (p.predicted == p.truth);
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double auc(std::span<const ScoredPrediction> preds) {
  std::vector<ScoredPrediction> sorted(preds.begin(), preds.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredPrediction& a, const ScoredPrediction& b) { return a.score > b.score; });
  double positives = 0.0;
  double negatives = 0.0;
  for (const auto& p : sorted) (p.truth ? positives : negatives) += 1.0;
  if (positives == 0.0 || negatives == 0.0) throw Error("AUC is undefined when only one class is present");

  // Walk thresholds from high to low; each group of tied scores adds a
  // trapezoid between consecutive ROC points.
  double area = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    double group_tp = 0.0;
    double group_fp = 0.0;
    const double s = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == s; ++i) (sorted[i].truth ? group_tp : group_fp) += 1.0;
    area += group_fp * (tp + 0.5 * group_tp);
    tp += group_tp;
    fp += group_fp;
  }
  return area / (positives * negatives);
}

double composite(double acc, double auc_score) { return 0.5 * acc + 0.5 * auc_score; }

}  // namespace qbm
