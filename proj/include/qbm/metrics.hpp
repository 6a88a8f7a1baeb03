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

#ifndef QBM_METRICS_HPP
#define QBM_METRICS_HPP

#include <cstdint>
#include <span>

namespace qbm {

struct ScoredPrediction {
  double score = 0.0;          // in [0, 1]
  std::uint8_t predicted = 0;  // score >= 0.5 for threshold models
  std::uint8_t truth = 0;
};

inline std::uint8_t threshold_label(double score) { return score >= 0.5 ? 1 : 0; }

double accuracy(std::span<const ScoredPrediction> preds);

// Area under the ROC curve by the trapezoidal rule over the ROC polyline,
// ties in score forming a single diagonal step (worth one half per tied
// positive/negative pair). Throws if only one class is present.
double auc(std::span<const ScoredPrediction> preds);

// 0.5 * ACC + 0.5 * AUC, the hyperparameter selection score.
double composite(double acc, double auc);

}  // namespace qbm

#endif  // QBM_METRICS_HPP
