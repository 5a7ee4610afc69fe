#include "gqn/cli/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "gqn/error.hpp"
#include "gqn/training.hpp"

namespace gqn::cli {

using nlohmann::json;

namespace {

void require_object(const json& value, const std::string& where) {
  if (!value.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& object, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : object.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; });
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& object, const char* key, T& target, const std::string& where) {
  const auto it = object.find(key);
  if (it == object.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
    } else if constexpr (std::is_unsigned_v<T>) {
      const bool non_negative =
          it->is_number_unsigned() || (it->is_number_integer() && it->get<std::int64_t>() >= 0);
      if (!non_negative) throw ConfigError(where + "." + key + ": expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    }
    target = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

bev::ObjectBox parse_box(const json& value, const std::string& where) {
  require_object(value, where);
  reject_unknown(value, where,
                 {"center_row", "center_col", "extent_rows", "extent_cols", "signature", "doppler"});
  bev::ObjectBox box;
  read(value, "center_row", box.center_row, where);
  read(value, "center_col", box.center_col, where);
  read(value, "extent_rows", box.extent_rows, where);
  read(value, "extent_cols", box.extent_cols, where);
  read(value, "signature", box.signature, where);
  read(value, "doppler", box.doppler, where);
  return box;
}

query::QuerySetSpec parse_set(const json& value, const std::string& where) {
  require_object(value, where);
  reject_unknown(value, where, {"queries", "ratio", "k"});
  query::QuerySetSpec set;
  read(value, "queries", set.queries, where);
  read(value, "ratio", set.ratio, where);
  read(value, "k", set.k, where);
  return set;
}

void parse_scene(const json& value, RunConfig& config) {
  require_object(value, "scene");
  reject_unknown(value, "scene",
                 {"height", "width", "dim", "cell_size", "clutter_density", "noise", "boxes"});
  auto& scene = config.scene;
  read(value, "height", scene.height, "scene");
  read(value, "width", scene.width, "scene");
  read(value, "cell_size", scene.cell_size, "scene");
  read(value, "clutter_density", scene.clutter_density, "scene");
  read(value, "noise", scene.noise, "scene");
  if (value.contains("dim")) read(value, "dim", scene.dim, "scene");
  if (const auto it = value.find("boxes"); it != value.end()) {
    if (!it->is_array()) throw ConfigError("scene.boxes: expected an array");
    scene.boxes.clear();
    for (std::size_t i = 0; i < it->size(); ++i)
      scene.boxes.push_back(parse_box((*it)[i], "scene.boxes[" + std::to_string(i) + "]"));
  }
}

void parse_gqn(const json& value, RunConfig& config) {
  require_object(value, "gqn");
  reject_unknown(value, "gqn", {"d", "layers", "frequency_base", "sets"});
  read(value, "d", config.gqn.dim, "gqn");
  read(value, "layers", config.gqn.layers, "gqn");
  read(value, "frequency_base", config.gqn.frequency_base, "gqn");
  if (const auto it = value.find("sets"); it != value.end()) {
    if (!it->is_array()) throw ConfigError("gqn.sets: expected an array");
    config.gqn.sets.clear();
    for (std::size_t i = 0; i < it->size(); ++i)
      config.gqn.sets.push_back(parse_set((*it)[i], "gqn.sets[" + std::to_string(i) + "]"));
  }
}

void parse_cost(const json& value, RunConfig& config) {
  require_object(value, "cost");
  reject_unknown(value, "cost", {"m_bev", "modes", "full_k", "wall_time"});
  read(value, "m_bev", config.cost.m_bev, "cost");
  read(value, "modes", config.cost.modes, "cost");
  read(value, "full_k", config.cost.full_k, "cost");
  read(value, "wall_time", config.cost.wall_time, "cost");
  for (const auto& mode : config.cost.modes)
    if (mode != "naive" && mode != "indexed")
      throw ConfigError("cost.modes: unknown mode '" + mode + "'");
}

}  // namespace

RunConfig default_config() {
  RunConfig config;
  config.scene = pipeline::toy_scene(0);
  config.gqn.dim = 8;
  config.gqn.layers = 2;
  config.gqn.sets = {{.queries = 4, .ratio = 0.1, .k = 4},
                     {.queries = 4, .ratio = 0.2, .k = 8},
                     {.queries = 4, .ratio = 0.3, .k = 12}};
  return config;
}

RunConfig parse_config(const json& doc) {
  require_object(doc, "config");
  reject_unknown(doc, "config",
                 {"scene", "gqn", "cost", "train", "gradcheck", "output", "seed", "threads"});
  RunConfig config = default_config();
  if (doc.contains("scene")) parse_scene(doc["scene"], config);
  if (doc.contains("gqn")) parse_gqn(doc["gqn"], config);
  if (doc.contains("cost")) parse_cost(doc["cost"], config);
  if (doc.contains("train")) {
    require_object(doc["train"], "train");
    reject_unknown(doc["train"], "train", {"steps", "learning_rate"});
    read(doc["train"], "steps", config.train.steps, "train");
    read(doc["train"], "learning_rate", config.train.learning_rate, "train");
  }
  if (doc.contains("gradcheck")) {
    require_object(doc["gradcheck"], "gradcheck");
    reject_unknown(doc["gradcheck"], "gradcheck", {"eps", "tolerance"});
    read(doc["gradcheck"], "eps", config.gradcheck.eps, "gradcheck");
    read(doc["gradcheck"], "tolerance", config.gradcheck.tolerance, "gradcheck");
  }
  read(doc, "output", config.output, "config");
  read(doc, "seed", config.seed, "config");
  read(doc, "threads", config.threads, "config");

  if (doc.contains("scene") && doc["scene"].contains("dim") && config.scene.dim != config.gqn.dim)
    throw ConfigError("scene.dim must equal gqn.d");
  config.scene.dim = config.gqn.dim;
  config.scene.seed = config.seed;
  config.gqn.seed = config.seed;
  if (config.threads < 1) throw ConfigError("threads must be >= 1");
  if (!(config.train.learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& config) {
  json boxes = json::array();
  for (const auto& box : config.scene.boxes) {
    boxes.push_back({{"center_row", box.center_row},
                     {"center_col", box.center_col},
                     {"extent_rows", box.extent_rows},
                     {"extent_cols", box.extent_cols},
                     {"signature", box.signature},
                     {"doppler", box.doppler}});
  }
  json sets = json::array();
  for (const auto& set : config.gqn.sets)
    sets.push_back({{"queries", set.queries}, {"ratio", set.ratio}, {"k", set.k}});
  return {
      {"scene",
       {{"height", config.scene.height},
        {"width", config.scene.width},
        {"cell_size", config.scene.cell_size},
        {"clutter_density", config.scene.clutter_density},
        {"noise", config.scene.noise},
        {"boxes", boxes}}},
      {"gqn",
       {{"d", config.gqn.dim},
        {"layers", config.gqn.layers},
        {"frequency_base", config.gqn.frequency_base},
        {"sets", sets}}},
      {"cost",
       {{"m_bev", config.cost.m_bev},
        {"modes", config.cost.modes},
        {"full_k", config.cost.full_k},
        {"wall_time", config.cost.wall_time}}},
      {"train", {{"steps", config.train.steps}, {"learning_rate", config.train.learning_rate}}},
      {"gradcheck", {{"eps", config.gradcheck.eps}, {"tolerance", config.gradcheck.tolerance}}},
      {"output", config.output},
      {"seed", config.seed},
      {"threads", config.threads},
  };
}

void apply(RunConfig& config, const Overrides& overrides) {
  if (overrides.seed) {
    config.seed = *overrides.seed;
    config.scene.seed = config.seed;
    config.gqn.seed = config.seed;
  }
  if (overrides.output) config.output = *overrides.output;
  if (overrides.threads) {
    if (*overrides.threads < 1) throw ConfigError("--threads must be >= 1");
    config.threads = *overrides.threads;
  }
}

}  // namespace gqn::cli
