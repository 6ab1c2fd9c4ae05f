// Copyright 2026 The xscript Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Line manifests: UTF-8, one "image-path<TAB>transcript<TAB>script-id<TAB>split"
// per line. Relative image paths are resolved against the manifest's
// directory.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xscript {

enum class Split { kTrain, kVal, kTest };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);  // throws DataError

struct ManifestRow {
  std::string image_path;  // as written in the manifest
  std::u32string transcript;
  std::string script_id;
  Split split = Split::kTrain;
};

struct Manifest {
  std::filesystem::path source;  // manifest file; empty for in-memory manifests
  std::vector<ManifestRow> rows;

  std::filesystem::path resolve(const ManifestRow& row) const;
  std::vector<const ManifestRow*> rows_in(Split s) const;
  std::vector<std::size_t> indices_in(Split s) const;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestRow> rows);

}  // namespace xscript
