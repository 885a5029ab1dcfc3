// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/autodiff/tensor.hpp"
#include "wlab/model/tokenizer.hpp"
#include "wlab/model/transformer.hpp"

namespace wlab {

/// One tensor in a checkpoint. `attrs` carries free-form key fields (adapter
/// checkpoints use target / role / task).
struct StoredTensor {
  std::string key;
  Tensor tensor;
  nlohmann::json attrs = nlohmann::json::object();
};

struct TensorCheckpoint {
  std::vector<StoredTensor> tensors;
  nlohmann::json meta = nlohmann::json::object();
  std::string blob_sha256;
};

/// Writes `dir/manifest.json` and `dir/tensors.bin`. The blob is the
/// concatenation of each tensor's little-endian IEEE-754 doubles in manifest
/// order; the manifest lists key, shape, byte offset, and SHA-256 per tensor.
/// Returns the SHA-256 of tensors.bin.
std::string save_tensors(const std::filesystem::path& dir, const std::vector<StoredTensor>& tensors,
                         const nlohmann::json& meta);
/// Verifies every per-tensor hash; IngestionError on mismatch or malformed manifest.
TensorCheckpoint load_tensors(const std::filesystem::path& dir);

/// Backbone checkpoint: all model parameters plus config and vocabulary.
std::string save_model(const std::filesystem::path& dir, const Transformer& model,
                       const Tokenizer& tokenizer);
struct LoadedModel {
  Transformer model;
  Tokenizer tokenizer;
  std::string hash;
};
LoadedModel load_model(const std::filesystem::path& dir);

}  // namespace wlab
