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

// Writes a synthetic QBMD1 file for CLI tests.
//
//   qbm_toy_data <path> <train> <val> <test> <seed> <noise|blobs>
//
// noise: labels drawn with prevalence 0.73 independently of near-constant
//        gray images (chance-level task).
// blobs: label 1 images carry a bright patch in the upper-left corner,
//        label 0 in the lower-right (separable task).

#include <cstdlib>
#include <iostream>
#include <string>

#include "qbm/dataset.hpp"
#include "qbm/random.hpp"

int main(int argc, char** argv) {
  if (argc != 7) {
    std::cerr << "usage: qbm_toy_data <path> <train> <val> <test> <seed> <noise|blobs>\n";
    return 2;
  }
  const std::string kind = argv[6];
  if (kind != "noise" && kind != "blobs") {
    std::cerr << "unknown kind '" << kind << "'\n";
    return 2;
  }
  qbm::Rng rng(std::strtoull(argv[5], nullptr, 10));
  qbm::Dataset ds;
  std::vector<std::uint8_t> img(qbm::kImagePixels);
  for (std::size_t s = 0; s < 3; ++s) {
    const std::size_t n = std::strtoull(argv[2 + s], nullptr, 10);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t label = qbm::uniform01(rng) < 0.73 ? 1 : 0;
      for (auto& p : img) p = static_cast<std::uint8_t>(120 + rng() % 16);
      if (kind == "blobs") {
        const std::size_t r0 = label ? 2 : 18;
        for (std::size_t r = r0; r < r0 + 8; ++r)
          for (std::size_t c = r0; c < r0 + 8; ++c) img[r * qbm::kImageSide + c] = 255;
      }
      ds.splits[s].add(img, label);
    }
  }
  qbm::save_dataset(argv[1], ds);
  return 0;
}
