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

#include "xscript/synth/image.hpp"

#include <cctype>
#include <fstream>

#include "xscript/common.hpp"

namespace xscript::synth {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) return tok;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return tok;
}

int pgm_int(std::istream& in, const std::filesystem::path& path) {
  const std::string tok = pgm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad PGM header in '" + path.string() + "'");
  }
}

}  // namespace

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  if (img.pixels.size() != static_cast<std::size_t>(img.height) * img.width) {
    throw DataError("write_pgm: pixel buffer does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image '" + path.string() + "'");
  if (pgm_token(in) != "P5") throw DataError("'" + path.string() + "' is not a binary PGM");
  const int w = pgm_int(in, path);
  const int h = pgm_int(in, path);
  const int maxval = pgm_int(in, path);
  if (w < 1 || h < 1 || maxval != 255) throw DataError("unsupported PGM geometry in '" + path.string() + "'");
  GrayImage img(h, w);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw DataError("truncated PGM '" + path.string() + "'");
  }
  return img;
}

}  // namespace xscript::synth
