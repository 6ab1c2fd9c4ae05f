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

#include "xscript/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace xscript::nn {

namespace {

constexpr const char* kMagic = "XSCRIPT-CKPT";

void put_f32_le(std::ostream& out, const std::vector<float>& values) {
  std::string buf(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<float> get_f32_le(std::istream& in, std::size_t n, const std::string& name) {
  std::string buf(n * 4, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw DataError("checkpoint: truncated data for array '" + name + "'");
  }
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i * 4 + b])) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

std::string header_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string("checkpoint: missing ") + what + " line");
  return line;
}

// Splits "key rest" and checks the key.
std::string expect_key(const std::string& line, const std::string& key) {
  if (line.compare(0, key.size() + 1, key + " ") != 0) {
    throw DataError("checkpoint: expected '" + key + "' line, got '" + line.substr(0, 40) + "'");
  }
  return line.substr(key.size() + 1);
}

}  // namespace

const CheckpointArray* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  out << "config " << ckpt.config.dump() << '\n';
  out << "vocab " << ckpt.vocabulary.size();
  for (char32_t c : ckpt.vocabulary) out << ' ' << static_cast<std::uint32_t>(c);
  out << '\n';
  out << "step " << ckpt.step << '\n';
  out << "arrays " << ckpt.arrays.size() << '\n';
  for (const auto& a : ckpt.arrays) {
    if (a.name.empty() || a.name.find_first_of(" \n\t") != std::string::npos) {
      throw DataError("checkpoint: invalid array name '" + a.name + "'");
    }
    if (Tensor<float>::element_count(a.shape) != a.values.size()) {
      throw DataError("checkpoint: shape/data mismatch for '" + a.name + "'");
    }
    out << a.name << ' ' << a.shape.size();
    for (int d : a.shape) out << ' ' << d;
    out << '\n';
    put_f32_le(out, a.values);
  }
  if (!out) throw DataError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ckpt;
  {
    std::istringstream magic(header_line(in, "magic"));
    std::string tag;
    int version = 0;
    magic >> tag >> version;
    if (tag != kMagic) throw DataError("checkpoint: bad magic");
    if (version != kCheckpointVersion) {
      throw DataError("checkpoint: unsupported version " + std::to_string(version));
    }
  }
  try {
    ckpt.config = nlohmann::json::parse(expect_key(header_line(in, "config"), "config"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: bad config JSON: ") + e.what());
  }
  {
    std::istringstream vs(expect_key(header_line(in, "vocab"), "vocab"));
    std::size_t n = 0;
    if (!(vs >> n)) throw DataError("checkpoint: bad vocab line");
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t c = 0;
      if (!(vs >> c)) throw DataError("checkpoint: truncated vocab line");
      ckpt.vocabulary.push_back(static_cast<char32_t>(c));
    }
  }
  {
    std::istringstream ss(expect_key(header_line(in, "step"), "step"));
    if (!(ss >> ckpt.step)) throw DataError("checkpoint: bad step line");
  }
  std::size_t count = 0;
  {
    std::istringstream as(expect_key(header_line(in, "arrays"), "arrays"));
    if (!(as >> count)) throw DataError("checkpoint: bad arrays line");
  }
  for (std::size_t k = 0; k < count; ++k) {
    std::istringstream ls(header_line(in, "array"));
    CheckpointArray a;
    std::size_t rank = 0;
    if (!(ls >> a.name >> rank)) throw DataError("checkpoint: bad array header");
    for (std::size_t r = 0; r < rank; ++r) {
      int d = 0;
      if (!(ls >> d) || d < 0) throw DataError("checkpoint: bad shape for '" + a.name + "'");
      a.shape.push_back(d);
    }
    a.values = get_f32_le(in, Tensor<float>::element_count(a.shape), a.name);
    ckpt.arrays.push_back(std::move(a));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_checkpoint(ckpt, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

void export_tensors(const TensorList<float>& tensors, Checkpoint& ckpt) {
  for (const auto& t : tensors) {
    CheckpointArray a;
    a.name = t.name;
    a.shape = t.tensor->shape();
    a.values.assign(t.tensor->values().begin(), t.tensor->values().end());
    ckpt.arrays.push_back(std::move(a));
  }
}

void import_tensors(const Checkpoint& ckpt, TensorList<float>& tensors) {
  for (auto& t : tensors) {
    const CheckpointArray* a = ckpt.find(t.name);
    if (!a) throw DataError("checkpoint: missing array '" + t.name + "'");
    if (a->shape != t.tensor->shape()) throw DataError("checkpoint: shape mismatch for '" + t.name + "'");
    std::copy(a->values.begin(), a->values.end(), t.tensor->values().begin());
  }
}

}  // namespace xscript::nn
