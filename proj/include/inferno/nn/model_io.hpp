#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "inferno/nn/mlp.hpp"

namespace inferno::nn {

struct ModelFile {
  MlpParams params;
  std::string kind;  // "inferno" | "classifier"
  std::uint64_t seed = 0;
  int benchmark_id = -1;  // -1 when not benchmark-specific
  nlohmann::json training_config = nlohmann::json::object();
};

void save_model(const std::string& path, const ModelFile& m);
ModelFile load_model(const std::string& path);

}  // namespace inferno::nn
