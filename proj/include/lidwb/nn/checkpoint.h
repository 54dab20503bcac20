// include/lidwb/nn/checkpoint.h

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

#ifndef LIDWB_NN_CHECKPOINT_H_
#define LIDWB_NN_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>

#include "lidwb/nn/layers.h"

namespace lidwb::nn {

/// Layout: "LWCK", u32 version, u32 metadata entries (key, value strings),
/// u32 tensor count, then per tensor: name, u32 rank, u32 dims, float32 data.
/// Strings are u32 length + bytes; all integers little endian.
void SaveCheckpoint(const std::filesystem::path& path, const ParamSet& params,
                    const std::map<std::string, std::string>& metadata);

/// Loads values into an already-constructed parameter set; names and shapes
/// must match. Returns the metadata.
std::map<std::string, std::string> LoadCheckpoint(const std::filesystem::path& path,
                                                  ParamSet* params);

/// Metadata only.
std::map<std::string, std::string> ReadCheckpointMetadata(const std::filesystem::path& path);

}  // namespace lidwb::nn

#endif  // LIDWB_NN_CHECKPOINT_H_
