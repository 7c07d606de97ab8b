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

#include "htd/safetensors.hpp"

#include <cstring>

#include <json.hpp>

#include "htd/errors.hpp"
#include "htd/fsio.hpp"

namespace htd {

namespace {

using nlohmann::json;

static_assert(sizeof(float) == 4 && sizeof(double) == 8);

std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (std::int64_t d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

Eigen::MatrixXd Tensor::as_matrix() const {
  if (shape.size() != 2) {
    throw ShapeMismatch("tensor rank " + std::to_string(shape.size()) +
                        ", expected matrix");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(shape[0]);
  const Eigen::Index cols = static_cast<Eigen::Index>(shape[1]);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
    }
  }
  return m;
}

Eigen::VectorXd Tensor::as_vector() const {
  if (shape.size() != 1) {
    throw ShapeMismatch("tensor rank " + std::to_string(shape.size()) +
                        ", expected vector");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(shape[0]));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = values[static_cast<std::size_t>(i)];
  }
  return v;
}

Tensor Tensor::from_matrix(const Eigen::MatrixXd& m) {
  Tensor t;
  t.shape = {m.rows(), m.cols()};
  t.values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.values.push_back(m(r, c));
  }
  return t;
}

Tensor Tensor::from_vector(const Eigen::VectorXd& v) {
  Tensor t;
  t.shape = {v.size()};
  t.values.assign(v.data(), v.data() + v.size());
  return t;
}

TensorMap load_safetensors(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  if (raw.size() < 8) throw IoFailure(path.string() + ": not a safetensors file");
  const std::uint64_t header_len =
      read_u64_le(reinterpret_cast<const unsigned char*>(raw.data()));
  if (8 + header_len > raw.size()) {
    throw IoFailure(path.string() + ": truncated header");
  }
  const json header = json::parse(raw.substr(8, header_len));
  const char* data = raw.data() + 8 + header_len;
  const std::size_t data_size = raw.size() - 8 - header_len;

  TensorMap tensors;
  for (const auto& [name, meta] : header.items()) {
    if (name == "__metadata__") continue;
    const std::string dtype = meta.at("dtype").get<std::string>();
    Tensor t;
    t.shape = meta.at("shape").get<std::vector<std::int64_t>>();
    const std::uint64_t begin = meta.at("data_offsets").at(0).get<std::uint64_t>();
    const std::uint64_t end = meta.at("data_offsets").at(1).get<std::uint64_t>();
    if (end < begin || end > data_size) {
      throw IoFailure(path.string() + ": tensor " + name + " offsets out of range");
    }
    const std::size_t n = t.element_count();
    const std::size_t width = dtype == "F32" ? 4 : dtype == "F64" ? 8 : 0;
    if (width == 0) {
      throw IoFailure(path.string() + ": unsupported dtype " + dtype);
    }
    if (end - begin != n * width) {
      throw IoFailure(path.string() + ": tensor " + name + " size mismatch");
    }
    t.values.resize(n);
    if (width == 4) {
      for (std::size_t i = 0; i < n; ++i) {
        float f;
        std::memcpy(&f, data + begin + 4 * i, 4);
        t.values[i] = static_cast<double>(f);
      }
    } else {
      std::memcpy(t.values.data(), data + begin, n * 8);
    }
    tensors.emplace(name, std::move(t));
  }
  return tensors;
}

void save_safetensors(const std::filesystem::path& path,
                      const TensorMap& tensors) {
  json header = json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    const std::uint64_t bytes = t.element_count() * 8;
    header[name] = {{"dtype", "F64"},
                    {"shape", t.shape},
                    {"data_offsets", {offset, offset + bytes}}};
    offset += bytes;
  }
  const std::string header_str = header.dump();

  std::string out;
  out.reserve(8 + header_str.size() + offset);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((header_str.size() >> (8 * i)) & 0xFF));
  }
  out += header_str;
  for (const auto& [name, t] : tensors) {
    for (double v : t.values) {
      char buf[8];
      std::memcpy(buf, &v, 8);
      out.append(buf, 8);
    }
  }
  write_file_atomic(path, out);
}

}  // namespace htd
