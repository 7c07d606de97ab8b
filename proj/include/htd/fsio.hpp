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

#include <filesystem>
#include <string>
#include <string_view>

namespace htd {

/// Reads a whole file; throws MissingFile / IoFailure.
std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary file in the same directory followed by a rename,
/// so readers never observe a partial file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

std::string sha256_hex(std::string_view data);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace htd
