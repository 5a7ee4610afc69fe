#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqn/bev_scene.hpp"
#include "gqn/gqn_pipeline.hpp"

namespace gqn::cli {

struct CostSection {
  std::vector<std::uint64_t> m_bev{1024, 16384};
  std::vector<std::string> modes{"naive", "indexed"};
  std::uint64_t full_k = 20;
  // Also time the kNN builder on random points (grids up to 10000 cells).
  bool wall_time = false;
};

struct TrainSection {
  std::size_t steps = 200;
  double learning_rate = 1e-2;
};

struct GradcheckSection {
  double eps = 1e-6;
  double tolerance = 1e-4;
};

/// Everything a command needs. The scene width always follows gqn.dim, and
/// both the scene and the parameters are seeded from `seed`.
struct RunConfig {
  bev::SceneSpec scene;
  pipeline::GqnConfig gqn;
  CostSection cost;
  TrainSection train;
  GradcheckSection gradcheck;
  std::string output = "gqn_out";
  std::uint64_t seed = 0;
  int threads = 1;
};

/// 16 x 16 scene with three objects, d = 8, L = 2, sets 4 x (10 %, K 4),
/// 4 x (20 %, K 8), 4 x (30 %, K 12).
RunConfig default_config();

/// Missing keys keep their defaults; unknown keys and wrong types throw
/// ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config, accepted back by parse_config.
nlohmann::json to_json(const RunConfig& config);

/// Command-line values; each one wins over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<int> threads;
};
void apply(RunConfig& config, const Overrides& overrides);

}  // namespace gqn::cli
