/* Copyright 2026 The htd Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace htd {

/// One named tensor. Values are kept as doubles in row-major order.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<double> values;

  std::size_t element_count() const;

  Eigen::MatrixXd as_matrix() const;  // requires rank 2
  Eigen::VectorXd as_vector() const;  // requires rank 1

  static Tensor from_matrix(const Eigen::MatrixXd& m);
  static Tensor from_vector(const Eigen::VectorXd& v);
};

using TensorMap = std::map<std::string, Tensor>;

/// Reads a safetensors file (F32 or F64 payloads, little-endian).
TensorMap load_safetensors(const std::filesystem::path& path);

/// Writes tensors in safetensors layout with F64 payloads, so a write/read
/// cycle reproduces the in-memory doubles exactly.
void save_safetensors(const std::filesystem::path& path,
                      const TensorMap& tensors);

}  // namespace htd
