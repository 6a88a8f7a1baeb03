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

#ifndef QBM_DATASET_HPP
#define QBM_DATASET_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qbm/model.hpp"

namespace qbm {

inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kImagePixels = kImageSide * kImageSide;

enum class Split { kTrain = 0, kVal = 1, kTest = 2 };

std::string to_string(Split split);
Split parse_split(const std::string& name);

struct SplitData {
  std::vector<std::uint8_t> pixels;  // size() * 784, row-major per image
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const std::uint8_t> image(std::size_t i) const { return {pixels.data() + i * kImagePixels, kImagePixels}; }
  void add(std::span<const std::uint8_t> image, std::uint8_t label);

  friend bool operator==(const SplitData&, const SplitData&) = default;
};

/// Binary-labelled 28x28 grayscale images in train/val/test splits.
///
/// QBMD1 file layout: "QBMD1", then train/val/test counts as u32 LE, then
/// per item 784 pixel bytes and one label byte, in split order.
struct Dataset {
  std::array<SplitData, 3> splits;

  SplitData& split(Split s) { return splits[static_cast<std::size_t>(s)]; }
  const SplitData& split(Split s) const { return splits[static_cast<std::size_t>(s)]; }
  std::size_t total() const;
  // Fraction of label 1 over all splits.
  double prevalence() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

Dataset read_dataset(std::istream& in);
void write_dataset(std::ostream& out, const Dataset& ds);
Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Dataset& ds);

// v_d = pixel / 255 (row-major), v_l = (label).
EncodedDataPoint encode(std::span<const std::uint8_t> image, std::uint8_t label);
std::vector<EncodedDataPoint> encode(const SplitData& split);

// Seeded shuffle of [0, n) cut into batches of `batch_size`; the final
// partial batch is kept.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed);
std::vector<std::vector<std::size_t>> batches(const Dataset& ds, Split split, std::size_t batch_size,
                                              std::uint64_t seed);

}  // namespace qbm

#endif  // QBM_DATASET_HPP
