// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/model/checkpoint.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>

#include "wlab/util/error.hpp"
#include "wlab/util/hash.hpp"
#include "wlab/util/io.hpp"

namespace wlab {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor blobs are written in host order, which must be little-endian");

constexpr const char* kFormat = "wlab-tensors-v1";

std::string tensor_bytes(const Tensor& t) {
  std::string bytes(t.numel() * sizeof(double), '\0');
  if (!bytes.empty()) std::memcpy(bytes.data(), t.values().data(), bytes.size());
  return bytes;
}

}  // namespace

std::string save_tensors(const std::filesystem::path& dir, const std::vector<StoredTensor>& tensors,
                         const nlohmann::json& meta) {
  std::filesystem::create_directories(dir);
  std::string blob;
  nlohmann::json entries = nlohmann::json::array();
  for (const StoredTensor& st : tensors) {
    const std::string bytes = tensor_bytes(st.tensor);
    entries.push_back({{"key", st.key},
                       {"shape", st.tensor.shape()},
                       {"offset", blob.size()},
                       {"nbytes", bytes.size()},
                       {"sha256", sha256_hex(bytes)},
                       {"attrs", st.attrs}});
    blob += bytes;
  }
  const std::string blob_hash = sha256_hex(blob);
  nlohmann::json manifest = {{"format", kFormat},
                             {"dtype", "f64-le"},
                             {"blob", "tensors.bin"},
                             {"blob_sha256", blob_hash},
                             {"tensors", entries},
                             {"meta", meta}};
  write_file(dir / "tensors.bin", blob);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return blob_hash;
}

TensorCheckpoint load_tensors(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(fmt::format("{}: malformed manifest: {}", dir.string(), e.what()));
  }
  if (manifest.value("format", "") != kFormat) {
    throw IngestionError(fmt::format("{}: not a {} checkpoint", dir.string(), kFormat));
  }
  const std::string blob = read_file(dir / manifest.value("blob", "tensors.bin"));
  TensorCheckpoint out;
  out.meta = manifest.value("meta", nlohmann::json::object());
  out.blob_sha256 = sha256_hex(blob);
  if (out.blob_sha256 != manifest.value("blob_sha256", out.blob_sha256)) {
    throw IngestionError(fmt::format("{}: tensor blob fails its content hash", dir.string()));
  }
  for (const auto& e : manifest.at("tensors")) {
    const std::string key = e.at("key");
    const auto shape = e.at("shape").get<Shape>();
    const std::size_t offset = e.at("offset"), nbytes = e.at("nbytes");
    if (nbytes != shape_numel(shape) * sizeof(double) || offset + nbytes > blob.size()) {
      throw IngestionError(fmt::format("{}: tensor {} has an inconsistent extent", dir.string(), key));
    }
    const std::string_view bytes(blob.data() + offset, nbytes);
    if (sha256_hex(bytes) != e.at("sha256").get<std::string>()) {
      throw IngestionError(fmt::format("{}: tensor {} fails its content hash", dir.string(), key));
    }
    std::vector<double> values(shape_numel(shape));
    if (nbytes) std::memcpy(values.data(), bytes.data(), nbytes);
    out.tensors.push_back({key, Tensor(shape, std::move(values)),
                           e.value("attrs", nlohmann::json::object())});
  }
  return out;
}

std::string save_model(const std::filesystem::path& dir, const Transformer& model,
                       const Tokenizer& tokenizer) {
  std::vector<StoredTensor> tensors;
  for (const auto& [name, t] : model.parameters())
    tensors.push_back({name, Tensor(t.shape(), std::vector<double>(t.values().begin(), t.values().end()))});
  nlohmann::json meta = {{"kind", "backbone"}, {"config", model.config()}, {"tokenizer", tokenizer.to_json()}};
  return save_tensors(dir, tensors, meta);
}

LoadedModel load_model(const std::filesystem::path& dir) {
  TensorCheckpoint ckpt = load_tensors(dir);
  if (ckpt.meta.value("kind", "") != "backbone") {
    throw IngestionError(dir.string() + " is not a backbone checkpoint");
  }
  ModelConfig config = ckpt.meta.at("config").get<ModelConfig>();
  Transformer::ParameterMap params;
  for (StoredTensor& st : ckpt.tensors) params.emplace(st.key, std::move(st.tensor));
  Tokenizer tokenizer = Tokenizer::from_json(ckpt.meta.at("tokenizer"));
  return {Transformer(config, std::move(params)), std::move(tokenizer), ckpt.blob_sha256};
}

}  // namespace wlab
