// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <fmt/format.h>

#include "wlab/experiment/synthetic.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/io.hpp"

namespace wlab::cli {
namespace {

using nlohmann::json;

void deep_merge(json& into, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && into.contains(key) && into[key].is_object())
      deep_merge(into[key], value);
    else
      into[key] = value;
  }
}

std::string kind_of(const json& v) {
  if (v.is_number_unsigned()) return "non-negative integer";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

bool same_kind(const json& schema, const json& v) {
  if (schema.is_null()) return true;
  if (schema.is_number_unsigned()) return v.is_number_unsigned();
  if (schema.is_number_integer()) return v.is_number_integer();
  if (schema.is_number()) return v.is_number();
  return schema.type() == v.type();
}

void check_against(const json& value, const json& schema, const std::string& path) {
  if (!schema.is_object()) {
    if (!same_kind(schema, value))
      throw ConfigError(fmt::format("'{}' must be a {}, got {}", path, kind_of(schema), value.dump()));
    return;
  }
  if (!value.is_object()) throw ConfigError(fmt::format("'{}' must be an object", path));
  for (const auto& [key, v] : value.items()) {
    const std::string sub = path.empty() ? key : path + "." + key;
    if (path == "stages") {
      try {
        parse_task(key);
      } catch (const Error&) {
        throw ConfigError(fmt::format("unknown stage '{}' under 'stages'", key));
      }
      check_against(v, default_config_json().at("train"), sub);
      continue;
    }
    if (!schema.contains(key)) throw ConfigError(fmt::format("unknown configuration key '{}'", sub));
    check_against(v, schema.at(key), sub);
  }
}

json parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(fmt::format("override '{}' is not of the form key.path=value", text));
  const std::string path = text.substr(0, eq), raw = text.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json patch = json::object();
  json* cursor = &patch;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(fmt::format("override '{}' has an empty key", text));
    if (dot == std::string::npos) {
      (*cursor)[key] = value;
      break;
    }
    cursor = &(*cursor)[key];
    start = dot + 1;
  }
  return patch;
}

}  // namespace

TrainConfig RunConfig::stage_config(TaskId stage) const {
  auto it = stage_overrides.find(stage);
  if (it == stage_overrides.end()) return train;
  json merged = train;
  deep_merge(merged, it->second);
  return merged.get<TrainConfig>();
}

void RunConfig::validate() const {
  ModelConfig m = model;
  if (m.vocab_size == 0) m.vocab_size = kNumSpecials + 1;  // filled in from the tokenizer later
  m.validate();
  adapter.validate(model.d_model, model.d_model);
  backbone.validate();
  for (TaskId t : kCurriculum) stage_config(t).validate();
  generation.validate();
  judge.validate();
  if (data.foundation_window == 0 || data.foundation_stride == 0)
    throw ConfigError("data.foundation_window and data.foundation_stride must be positive");
  if (data.plot_context == 0) throw ConfigError("data.plot_context must be positive");
}

void to_json(json& j, const RunConfig& c) {
  json stages = json::object();
  for (const auto& [task, patch] : c.stage_overrides) stages[std::string(task_name(task))] = patch;
  j = {{"model_seed", c.model_seed},
       {"adapter_seed", c.adapter_seed},
       {"model", c.model},
       {"adapter", c.adapter},
       {"backbone", c.backbone},
       {"train", c.train},
       {"stages", stages},
       {"data",
        {{"train_chapters", c.data.train_chapters},
         {"foundation_window", c.data.foundation_window},
         {"foundation_stride", c.data.foundation_stride},
         {"plot_context", c.data.plot_context},
         {"cross_chapter", c.data.cross_chapter},
         {"ramp_up", c.data.ramp_up}}},
       {"generation", c.generation},
       {"judge", c.judge},
       {"eval",
        {{"mode", eval_mode_name(c.eval.mode)},
         {"token_mode", token_mode_name(c.eval.token_mode)},
         {"judge", c.eval.judge}}}};
}

json default_config_json() {
  RunConfig c;
  const ExperimentConfig e = ExperimentConfig::defaults();
  c.backbone = e.backbone;
  c.model = e.model;
  json j = c;
  j["model"].erase("vocab_size");  // always taken from the tokenizer
  return j;
}

RunConfig resolve_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  const json schema = default_config_json();
  json merged = schema;
  try {
    if (!file.empty()) {
      if (!std::filesystem::is_regular_file(file))
        throw ConfigError(fmt::format("config file '{}' does not exist", file.string()));
      json from_file;
      try {
        from_file = json::parse(read_file(file));
      } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config file '{}' is not valid JSON: {}", file.string(), e.what()));
      }
      check_against(from_file, schema, "");
      deep_merge(merged, from_file);
    }
    for (const auto& o : overrides) {
      json patch = parse_override(o);
      check_against(patch, schema, "");
      deep_merge(merged, patch);
    }

    RunConfig c;
    c.model_seed = merged.at("model_seed").get<std::uint64_t>();
    c.adapter_seed = merged.at("adapter_seed").get<std::uint64_t>();
    c.model = merged.at("model").get<ModelConfig>();
    c.adapter = merged.at("adapter").get<AdapterSpec>();
    c.backbone = merged.at("backbone").get<TrainConfig>();
    c.train = merged.at("train").get<TrainConfig>();
    for (const auto& [name, patch] : merged.at("stages").items()) c.stage_overrides[parse_task(name)] = patch;
    const json& d = merged.at("data");
    c.data.train_chapters = d.at("train_chapters").get<std::size_t>();
    c.data.foundation_window = d.at("foundation_window").get<std::size_t>();
    c.data.foundation_stride = d.at("foundation_stride").get<std::size_t>();
    c.data.plot_context = d.at("plot_context").get<std::size_t>();
    c.data.cross_chapter = d.at("cross_chapter").get<bool>();
    c.data.ramp_up = d.at("ramp_up").get<bool>();
    c.generation = merged.at("generation").get<GenerationConfig>();
    c.judge = merged.at("judge").get<JudgeConfig>();
    const json& ev = merged.at("eval");
    c.eval.mode = parse_eval_mode(ev.at("mode").get<std::string>());
    c.eval.token_mode = parse_token_mode(ev.at("token_mode").get<std::string>());
    c.eval.judge = ev.at("judge").get<bool>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("invalid configuration: {}", e.what()));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace wlab::cli
