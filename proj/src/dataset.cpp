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

#include "qbm/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "qbm/error.hpp"
#include "qbm/random.hpp"

namespace qbm {
namespace {

constexpr char kMagic[5] = {'Q', 'B', 'M', 'D', '1'};

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated dataset header");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw Error("unknown split '" + name + "' (expected train, val or test)");
}

void SplitData::add(std::span<const std::uint8_t> image, std::uint8_t label) {
  if (image.size() != kImagePixels) throw DimensionError("image must have 784 pixels");
  if (label > 1) throw Error("labels must be 0 or 1");
  pixels.insert(pixels.end(), image.begin(), image.end());
  labels.push_back(label);
}

std::size_t Dataset::total() const {
  std::size_t n = 0;
  for (const auto& s : splits) n += s.size();
  return n;
}

double Dataset::prevalence() const {
  std::size_t pos = 0;
  for (const auto& s : splits) {
    for (auto l : s.labels) pos += l;
  }
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(n);
}

Dataset read_dataset(std::istream& in) {
  char magic[5];
  if (!in.read(magic, 5) || !std::equal(magic, magic + 5, kMagic)) throw FormatError("bad magic: not a QBMD1 file");
  std::array<std::uint32_t, 3> counts{};
  for (auto& c : counts) c = read_u32(in);
  Dataset ds;
  std::vector<std::uint8_t> item(kImagePixels + 1);
  for (std::size_t s = 0; s < 3; ++s) {
    auto& split = ds.splits[s];
    split.pixels.reserve(static_cast<std::size_t>(counts[s]) * kImagePixels);
    split.labels.reserve(counts[s]);
    for (std::uint32_t i = 0; i < counts[s]; ++i) {
      if (!in.read(reinterpret_cast<char*>(item.data()), static_cast<std::streamsize>(item.size()))) {
        throw FormatError("truncated dataset: expected " + std::to_string(counts[0] + counts[1] + counts[2]) +
                          " items");
      }
      const std::uint8_t label = item.back();
      if (label > 1) throw FormatError("label byte " + std::to_string(label) + " is not 0 or 1");
      split.add(std::span(item.data(), kImagePixels), label);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after dataset items");
  return ds;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  out.write(kMagic, 5);
  for (const auto& s : ds.splits) write_u32(out, static_cast<std::uint32_t>(s.size()));
  for (const auto& s : ds.splits) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto img = s.image(i);
      out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
      out.put(static_cast<char>(s.labels[i]));
    }
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset " + path);
  return read_dataset(in);
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_dataset(out, ds);
}

EncodedDataPoint encode(std::span<const std::uint8_t> image, std::uint8_t label) {
  EncodedDataPoint p;
  p.inputs.resize(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) p.inputs[i] = static_cast<double>(image[i]) / 255.0;
  p.label = {label};
  return p;
}

std::vector<EncodedDataPoint> encode(const SplitData& split) {
  std::vector<EncodedDataPoint> out;
  out.reserve(split.size());
  for (std::size_t i = 0; i < split.size(); ++i) out.push_back(encode(split.image(i), split.labels[i]));
  return out;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw Error("batch size must be positive");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<std::vector<std::size_t>> batches(const Dataset& ds, Split split, std::size_t batch_size,
                                              std::uint64_t seed) {
  return batch_indices(ds.split(split).size(), batch_size, seed);
}

}  // namespace qbm
