// src/nn/checkpoint.cc

// Copyright 2026 The lidwb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "lidwb/nn/checkpoint.h"

#include <cstring>
#include <fstream>

#include "lidwb/util/error.h"

namespace lidwb::nn {
namespace {

constexpr uint32_t kVersion = 1;

void PutU32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void PutString(std::ostream& out, const std::string& s) {
  PutU32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw Error("checkpoint: truncated file");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

std::string GetString(std::istream& in) {
  uint32_t n = GetU32(in);
  if (n > (1u << 20)) throw Error("checkpoint: implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw Error("checkpoint: truncated file");
  return s;
}

std::map<std::string, std::string> ReadHeader(std::istream& in, const std::string& where) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LWCK", 4) != 0) throw Error("not a checkpoint: " + where);
  uint32_t version = GetU32(in);
  if (version != kVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }
  std::map<std::string, std::string> meta;
  uint32_t n = GetU32(in);
  for (uint32_t i = 0; i < n; ++i) {
    std::string k = GetString(in);
    meta[k] = GetString(in);
  }
  return meta;
}

void WriteTensor(std::ostream& out, const NamedTensor& t) {
  PutString(out, t.name);
  PutU32(out, static_cast<uint32_t>(t.tensor.rank()));
  for (int64_t d : t.tensor.shape()) PutU32(out, static_cast<uint32_t>(d));
  for (Real v : t.tensor.values()) {
    auto f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    PutU32(out, bits);
  }
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const ParamSet& params,
                    const std::map<std::string, std::string>& metadata) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  out.write("LWCK", 4);
  PutU32(out, kVersion);
  PutU32(out, static_cast<uint32_t>(metadata.size()));
  for (const auto& [k, v] : metadata) {
    PutString(out, k);
    PutString(out, v);
  }
  PutU32(out, static_cast<uint32_t>(params.params().size() + params.buffers().size()));
  for (const auto& t : params.params()) WriteTensor(out, t);
  for (const auto& t : params.buffers()) WriteTensor(out, t);
}

std::map<std::string, std::string> LoadCheckpoint(const std::filesystem::path& path,
                                                  ParamSet* params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  auto meta = ReadHeader(in, path.string());
  std::map<std::string, Tensor> by_name;
  for (const auto& t : params->params()) by_name[t.name] = t.tensor;
  for (const auto& t : params->buffers()) by_name[t.name] = t.tensor;
  uint32_t n = GetU32(in);
  if (n != by_name.size()) {
    throw Error("checkpoint holds " + std::to_string(n) + " tensors, model expects " +
                std::to_string(by_name.size()));
  }
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = GetString(in);
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error("checkpoint tensor not in model: " + name);
    uint32_t rank = GetU32(in);
    Shape shape(rank);
    for (auto& d : shape) d = GetU32(in);
    if (shape != it->second.shape()) {
      throw Error("checkpoint shape mismatch for " + name + ": " + ShapeString(shape) + " vs " +
                  ShapeString(it->second.shape()));
    }
    for (Real& v : it->second.values()) {
      uint32_t bits = GetU32(in);
      float f;
      std::memcpy(&f, &bits, 4);
      v = f;
    }
  }
  return meta;
}

std::map<std::string, std::string> ReadCheckpointMetadata(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  return ReadHeader(in, path.string());
}

}  // namespace lidwb::nn
