#include "gqn/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "gqn/cost_model.hpp"
#include "gqn/error.hpp"
#include "gqn/io.hpp"
#include "gqn/numerics/grad_check.hpp"
#include "gqn/numerics/ops.hpp"
#include "gqn/numerics/random.hpp"
#include "gqn/query_init.hpp"
#include "gqn/training.hpp"

namespace gqn::cli {

using nlohmann::json;
using numerics::Tensor;

namespace {

namespace fs = std::filesystem;

// Fresh write; returns the digest of what was written.
std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
  return sha256_hex(text);
}

std::string percent(double fraction) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1f%%", 100.0 * fraction);
  return buffer;
}

void append_row(std::string& out, std::span<const double> values) {
  for (double v : values) {
    out.push_back(',');
    append_double(out, v);
  }
  out.push_back('\n');
}

std::string feature_header(std::size_t dim) {
  std::string out;
  for (std::size_t j = 0; j < dim; ++j) out += ",f" + std::to_string(j);
  return out + "\n";
}

void require_finite(const Tensor& t, const std::string& what) {
  for (double v : t.values())
    if (!std::isfinite(v)) throw NumericError(what + " contains non-finite values");
}

struct Prepared {
  bev::Scene scene;
  bev::FlatGrid grid;
  numerics::ParamStore params;
};

Prepared prepare(const RunConfig& config) {
  config.scene.validate();
  config.gqn.validate(config.scene.height * config.scene.width);
  Prepared p{bev::generate_scene(config.scene), {}, pipeline::init_params(config.gqn, config.scene.height, config.scene.width)};
  p.grid = bev::flatten_grid(
      p.scene.grid, bev::sinusoidal_encoding(config.scene.height, config.scene.width,
                                             config.gqn.dim, config.gqn.frequency_base));
  return p;
}

// The global pathway is out of scope; its stand-in is the input state map.
pipeline::RunOptions run_options(const RunConfig& config, const bev::FlatGrid& grid) {
  return {config.threads, grid.states_tensor()};
}

json ratio_json(const cost::Ratio& r) {
  return {{"num", r.num}, {"den", r.den}, {"value", r.value()}};
}

json graph_json(const cost::GraphCost& g) {
  return {{"nodes", g.nodes},
          {"k", g.k},
          {"queries", g.queries},
          {"processing", g.processing},
          {"naive_construction", g.naive_construction},
          {"indexed_construction", g.indexed_construction}};
}

double time_knn(std::uint64_t n, std::uint64_t k, std::size_t dim, std::uint64_t seed) {
  numerics::CounterRng rng(seed, "bench-points");
  std::vector<double> points(n * dim);
  for (auto& x : points) x = rng.next_uniform(-1.0, 1.0);
  const auto start = std::chrono::steady_clock::now();
  const auto edges = query::build_knn_edges(points, dim, k);
  const auto stop = std::chrono::steady_clock::now();
  if (edges.size() != n * k) throw ContractError("bench: unexpected edge count");
  return std::chrono::duration<double>(stop - start).count();
}

inline constexpr std::uint64_t kWallTimeMaxCells = 10000;

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& log) {
  Prepared p = prepare(config);
  const auto out = pipeline::run_gqn(p.grid, config.gqn, p.params, run_options(config, p.grid));
  require_finite(out.fused, "fused map");
  require_finite(out.context_vectors, "context vectors");

  const std::size_t d = config.gqn.dim;
  const std::size_t width = config.scene.width;
  std::string maps = "map,r,c" + feature_header(d);
  auto emit = [&](const std::string& name, const Tensor& map) {
    for (std::size_t k = 0; k < map.rows(); ++k) {
      maps += name + "," + std::to_string(k / width) + "," + std::to_string(k % width);
      append_row(maps, map.values().subspan(k * d, d));
    }
  };
  emit("fused", out.fused);
  emit("skip_fused", out.skip_fused);
  for (std::size_t s = 0; s < out.set_maps.size(); ++s) emit("set" + std::to_string(s), out.set_maps[s]);

  std::string globals = "query,set,vector" + feature_header(d);
  for (std::size_t q = 0; q < out.queries.size(); ++q) {
    const std::string prefix = std::to_string(q) + "," + std::to_string(out.queries[q].set_index);
    globals += prefix + ",u";
    append_row(globals, out.global_vectors.values().subspan(q * d, d));
    globals += prefix + ",context";
    append_row(globals, out.context_vectors.values().subspan(q * d, d));
  }

  const fs::path dir(config.output);
  json meta = {{"command", "run"},
               {"config", to_json(config)},
               {"global_map", "input_states"},
               {"cells", p.grid.size()},
               {"queries", out.queries.size()},
               {"concatenated_channels", out.concatenated.cols()}};
  meta["digests"]["maps.csv"] = write_file(dir / "maps.csv", maps);
  meta["digests"]["globals.csv"] = write_file(dir / "globals.csv", globals);
  write_file(dir / "meta.json", meta.dump(2) + "\n");
  log << "run: wrote maps.csv, globals.csv, meta.json to " << dir.string() << "\n"
      << "maps.csv sha256 " << meta["digests"]["maps.csv"].get<std::string>() << "\n";
  return kSuccess;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& log) {
  const std::size_t cells = config.scene.height * config.scene.width;
  if (cells > kGradcheckMaxCells) {
    throw ConfigError("gradcheck: grid has " + std::to_string(cells) + " cells, limit is " +
                      std::to_string(kGradcheckMaxCells));
  }
  Prepared p = prepare(config);
  const auto options = run_options(config, p.grid);
  auto loss = [&](const numerics::ParamStore& params) {
    return numerics::sum(pipeline::run_gqn(p.grid, config.gqn, params, options).fused);
  };
  const auto report = numerics::grad_check(loss, p.params, {.eps = config.gradcheck.eps});

  numerics::backward(loss(p.params), p.params);
  const Tensor& u = p.params.get("u");
  std::size_t live_rows = 0;
  for (std::size_t q = 0; q < u.rows(); ++q) {
    bool live = false;
    for (std::size_t j = 0; j < u.cols(); ++j) live = live || u.grad()[q * u.cols() + j] != 0.0;
    live_rows += live ? 1 : 0;
  }

  bool pass = live_rows == u.rows();
  json groups = json::object();
  for (const auto& group : p.params.groups()) {
    const double error = report.group_error.at(group);
    groups[group] = error;
    pass = pass && error <= config.gradcheck.tolerance;
  }
  json doc = {{"max_rel_error", report.max_rel_error},
              {"tolerance", config.gradcheck.tolerance},
              {"eps", config.gradcheck.eps},
              {"coords_checked", report.coords_checked},
              {"groups", groups},
              {"params", report.param_error},
              {"u_rows", u.rows()},
              {"u_rows_with_gradient", live_rows},
              {"pass", pass}};
  write_file(fs::path(config.output) / "gradcheck.json", doc.dump(2) + "\n");
  log << "gradcheck: max relative error " << format_double(report.max_rel_error) << " over "
      << report.coords_checked << " coordinates, " << live_rows << "/" << u.rows()
      << " global vectors with gradient: " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kSuccess : kNumericError;
}

int cmd_bench(const RunConfig& config, std::ostream& log) {
  if (config.cost.m_bev.empty()) throw ConfigError("cost.m_bev: empty sweep");
  json reports = json::array();
  std::string csv = "m_bev,mode,peak_query_cost,full_cost,reduction,query_wall_s,full_wall_s\n";
  for (std::uint64_t m : config.cost.m_bev) {
    const auto r = cost::compare_full_vs_queries(m, config.gqn, config.cost.full_k);
    json entry = {{"m_bev", m},
                  {"full_k", config.cost.full_k},
                  {"full", graph_json(r.full)},
                  {"peak",
                   {{"processing", r.peak_processing},
                    {"naive_construction", r.peak_naive_construction},
                    {"indexed_construction", r.peak_indexed_construction}}},
                  {"reduction",
                   {{"processing", ratio_json(r.processing_reduction)},
                    {"naive_construction", ratio_json(r.naive_construction_reduction)},
                    {"indexed_construction", r.indexed_construction_reduction}}},
                  {"flops", r.flops}};
    entry["sets"] = json::array();
    for (const auto& set : r.sets) entry["sets"].push_back(graph_json(set));

    std::string query_wall, full_wall;
    if (config.cost.wall_time && m <= kWallTimeMaxCells) {
      const auto& peak = *std::max_element(r.sets.begin(), r.sets.end(),
                                           [](const auto& a, const auto& b) { return a.nodes < b.nodes; });
      const double tq = time_knn(peak.nodes, peak.k, config.gqn.dim, config.seed);
      const double tf = time_knn(m, config.cost.full_k, config.gqn.dim, config.seed);
      entry["wall_time_s"] = {{"query_knn", tq}, {"full_knn", tf}};
      query_wall = format_double(tq);
      full_wall = format_double(tf);
    }
    reports.push_back(entry);

    auto row = [&](const std::string& mode, const std::string& peak, const std::string& full,
                   double reduction, bool timed) {
      csv += std::to_string(m) + "," + mode + "," + peak + "," + full + ",";
      append_double(csv, reduction);
      csv += "," + (timed ? query_wall : std::string()) + "," + (timed ? full_wall : std::string()) + "\n";
    };
    row("processing", std::to_string(r.peak_processing), std::to_string(r.full.processing),
        r.processing_reduction.value(), false);
    for (const auto& mode : config.cost.modes) {
      if (mode == "naive") {
        row(mode, std::to_string(r.peak_naive_construction),
            std::to_string(r.full.naive_construction), r.naive_construction_reduction.value(), true);
      } else {
        row(mode, format_double(r.peak_indexed_construction),
            format_double(r.full.indexed_construction), r.indexed_construction_reduction, true);
      }
    }
    log << "M_BEV=" << m << ": peak processing reduction " << percent(r.processing_reduction.value())
        << ", naive construction " << percent(r.naive_construction_reduction.value())
        << ", indexed construction " << percent(r.indexed_construction_reduction) << "\n";
  }
  const fs::path dir(config.output);
  write_file(dir / "cost_report.json", json{{"reports", reports}}.dump(2) + "\n");
  write_file(dir / "bench.csv", csv);
  return kSuccess;
}

int cmd_train_demo(const RunConfig& config, std::ostream& log) {
  config.scene.validate();
  config.gqn.validate(config.scene.height * config.scene.width);
  const auto result = pipeline::toy_train(
      config.scene, config.gqn,
      {.steps = config.train.steps, .learning_rate = config.train.learning_rate, .threads = config.threads});
  std::string csv = "step,loss\n";
  for (std::size_t i = 0; i < result.losses.size(); ++i) {
    csv += std::to_string(i) + ",";
    append_double(csv, result.losses[i]);
    csv += "\n";
  }
  write_file(fs::path(config.output) / "loss_curve.csv", csv);
  if (result.diverged) {
    log << "train-demo: diverged after " << result.losses.size() << " finite losses; last "
        << format_double(result.losses.empty() ? NAN : result.losses.back()) << "\n";
    return kDiverged;
  }
  log << "train-demo: loss " << format_double(result.losses.front()) << " -> "
      << format_double(result.losses.back()) << " (ratio "
      << format_double(result.losses.back() / result.losses.front()) << ")\n";
  return kSuccess;
}

int dispatch(const std::string& command, const fs::path& config_path, const Overrides& overrides,
             std::ostream& log, std::ostream& err) {
  try {
    RunConfig config = config_path.empty() ? default_config() : load_config(config_path);
    apply(config, overrides);
    int (*handler)(const RunConfig&, std::ostream&) = nullptr;
    if (command == "run") handler = cmd_run;
    if (command == "gradcheck") handler = cmd_gradcheck;
    if (command == "bench") handler = cmd_bench;
    if (command == "train-demo") handler = cmd_train_demo;
    if (handler == nullptr) throw ConfigError("unknown command '" + command + "'");
    fs::create_directories(config.output);
    return handler(config, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const InvalidInput& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace gqn::cli
