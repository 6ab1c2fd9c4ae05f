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

#include "xscript/manifest.hpp"

#include <fstream>

#include "xscript/common.hpp"
#include "xscript/utf8.hpp"

namespace xscript {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw DataError("unknown split '" + std::string(name) + "'");
}

std::filesystem::path Manifest::resolve(const ManifestRow& row) const {
  const std::filesystem::path p(row.image_path);
  if (p.is_absolute() || source.empty()) return p;
  return source.parent_path() / p;
}

std::vector<const ManifestRow*> Manifest::rows_in(Split s) const {
  std::vector<const ManifestRow*> out;
  for (const auto& r : rows) {
    if (r.split == s) out.push_back(&r);
  }
  return out;
}

std::vector<std::size_t> Manifest::indices_in(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].split == s) out.push_back(i);
  }
  return out;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  Manifest m;
  m.source = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    ManifestRow row;
    row.image_path = fields[0];
    row.transcript = utf8_decode(fields[1]);
    row.script_id = fields[2];
    row.split = parse_split(fields[3]);
    m.rows.push_back(std::move(row));
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestRow> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  for (const auto& r : rows) {
    out << r.image_path << '\t' << utf8_encode(r.transcript) << '\t' << r.script_id << '\t' << split_name(r.split)
        << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace xscript
