// Copyright 2026 The provrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "provrec/error.hpp"
#include "provrec/matrix.hpp"
#include "provrec/random.hpp"

namespace provrec {

struct SyntheticParams {
  std::size_t n_pipelines = 32;
  std::size_t n_datasets = 22;
  std::size_t n_blocks = 3;
  double density = 288.0 / 704.0;
  double noise_rate = 0.1;
  std::uint64_t seed = 1;
};

/// Generated matrix plus the structure it was drawn from.
struct SyntheticMatrix {
  UtilityMatrix matrix;
  std::vector<std::size_t> pipeline_block;
  std::vector<std::size_t> dataset_block;
  std::vector<Outcome> truth;  // noise-free rating of each matrix entry
  std::size_t flipped = 0;

  /// Noise-free rating of any cell.
  Outcome true_rating(std::size_t u, std::size_t i) const {
    return pipeline_block[u] == dataset_block[i] ? Outcome::success : Outcome::failed;
  }
};

namespace detail {
inline std::string padded_id(char prefix, std::size_t n, std::size_t count) {
  auto digits = std::to_string(count).size();
  auto s = std::to_string(n);
  return std::string(1, prefix) + std::string(digits > s.size() ? digits - s.size() : 0, '0') + s;
}
}  // namespace detail

/// Block-structured utility matrix: pipelines and datasets are dealt into
/// n_blocks compatibility groups (balanced, randomly permuted); a pair
/// succeeds iff its groups match. round(density * cells) cells are
/// observed, chosen uniformly, and each observed rating is flipped with
/// probability noise_rate.
inline SyntheticMatrix generate_synthetic(const SyntheticParams& params) {
  if (params.n_pipelines == 0 || params.n_datasets == 0 || params.n_blocks == 0)
    throw InvalidArgument("generate_synthetic: dimensions and block count must be positive");
  if (!(params.density > 0.0 && params.density <= 1.0))
    throw InvalidArgument("generate_synthetic: density must be in (0, 1]");
  if (!(params.noise_rate >= 0.0 && params.noise_rate < 0.5))
    throw InvalidArgument("generate_synthetic: noise_rate must be in [0, 0.5)");

  std::mt19937_64 gen(params.seed);
  SyntheticMatrix out;
  out.pipeline_block.resize(params.n_pipelines);
  out.dataset_block.resize(params.n_datasets);
  for (std::size_t u = 0; u < params.n_pipelines; ++u) out.pipeline_block[u] = u % params.n_blocks;
  for (std::size_t i = 0; i < params.n_datasets; ++i) out.dataset_block[i] = i % params.n_blocks;
  shuffle(std::span(out.pipeline_block), gen);
  shuffle(std::span(out.dataset_block), gen);

  const std::size_t cells = params.n_pipelines * params.n_datasets;
  const auto observed = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(params.density * static_cast<double>(cells))), 1, cells);
  std::vector<std::size_t> cell(cells);
  for (std::size_t c = 0; c < cells; ++c) cell[c] = c;
  shuffle(std::span(cell), gen);
  cell.resize(observed);
  std::sort(cell.begin(), cell.end());

  std::vector<MatrixEntry> entries;
  entries.reserve(observed);
  for (auto c : cell) {
    const std::size_t u = c / params.n_datasets, i = c % params.n_datasets;
    const Outcome t = out.true_rating(u, i);
    out.truth.push_back(t);
    Outcome r = t;
    if (uniform01(gen) < params.noise_rate) {
      r = t == Outcome::success ? Outcome::failed : Outcome::success;
      ++out.flipped;
    }
    entries.push_back({u, i, r});
  }

  std::vector<std::string> pipelines, datasets;
  for (std::size_t u = 0; u < params.n_pipelines; ++u)
    pipelines.push_back(detail::padded_id('P', u + 1, params.n_pipelines));
  for (std::size_t i = 0; i < params.n_datasets; ++i)
    datasets.push_back(detail::padded_id('D', i + 1, params.n_datasets));
  out.matrix = UtilityMatrix(std::move(pipelines), std::move(datasets), std::move(entries));
  return out;
}

}  // namespace provrec
