#include "vgne/game_io.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "vgne/builtins.hpp"
#include "vgne/error.hpp"

namespace vgne {

namespace {

using nlohmann::json;

Vector to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ConfigError(what + " must contain only numbers");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

Matrix to_matrix(const json& j, const std::string& what, Eigen::Index cols) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = to_vector(j[r], what + " row " + std::to_string(r));
    if (row.size() != cols) throw DimensionError(what + " row " + std::to_string(r), cols, row.size());
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

GameSpec from_json(const json& cfg) {
  if (!cfg.is_object()) throw ConfigError("game definition must be a JSON object");

  if (cfg.contains("builtin")) {
    const auto seed = cfg.value("seed", std::uint64_t{0});
    return make_builtin(cfg.at("builtin").get<std::string>(), seed);
  }

  if (!cfg.contains("dims")) throw ConfigError("game definition needs either 'builtin' or 'dims'");
  std::vector<int> dims = cfg.at("dims").get<std::vector<int>>();
  if (cfg.contains("players") && cfg.at("players").get<int>() != static_cast<int>(dims.size()))
    throw DimensionError("'dims' entries", cfg.at("players").get<int>(), static_cast<long>(dims.size()));
  BlockLayout layout(dims);
  const int N = layout.num_players();
  const int D = layout.total_dim();

  if (!cfg.contains("A")) throw ConfigError("explicit games need per-player quadratic blocks 'A'");
  const json& jA = cfg.at("A");
  if (!jA.is_array() || static_cast<int>(jA.size()) != N) throw ConfigError("'A' must hold one matrix per player");
  std::vector<Matrix> A;
  std::vector<Vector> b;
  for (int i = 0; i < N; ++i) {
    A.push_back(to_matrix(jA[i], "A[" + std::to_string(i) + "]", D));
    if (A.back().rows() != D) throw DimensionError("A[" + std::to_string(i) + "] rows", D, A.back().rows());
    if (cfg.contains("b")) {
      b.push_back(to_vector(cfg.at("b").at(i), "b[" + std::to_string(i) + "]"));
      if (b.back().size() != D) throw DimensionError("b[" + std::to_string(i) + "]", D, b.back().size());
    } else {
      b.push_back(Vector::Zero(D));
    }
  }

  ConstraintSet constraints = ConstraintSet::none(D);
  if (cfg.contains("K")) {
    Matrix K = to_matrix(cfg.at("K"), "K", D);
    if (!cfg.contains("l")) throw ConfigError("'K' given without 'l'");
    Vector l = to_vector(cfg.at("l"), "l");
    constraints = ConstraintSet(std::move(K), std::move(l));
  }

  GameSpec spec(QuadraticGame(layout, std::move(A), std::move(b)), std::move(constraints));
  spec.with_name(cfg.value("name", std::string("custom")));
  if (cfg.contains("nu")) spec.with_known_nu(cfg.at("nu").get<double>());
  if (cfg.contains("lipschitz")) spec.with_known_lipschitz(cfg.at("lipschitz").get<double>());
  return spec;
}

double number_or_ratio(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    try {
      const auto slash = s.find('/');
      if (slash == std::string::npos) return std::stod(s);
      const double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw ConfigError(what + ": zero denominator in '" + s + "'");
      return std::stod(s.substr(0, slash)) / den;
    } catch (const std::invalid_argument&) {
      throw ConfigError(what + ": cannot parse '" + s + "' as a number");
    }
  }
  throw ConfigError(what + " must be a number or a \"p/q\" string");
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid " + what + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig experiment_from_json(const json& cfg, const std::string& base_dir) {
  if (!cfg.is_object()) throw ConfigError("experiment definition must be a JSON object");
  std::optional<GameSpec> game;
  if (cfg.contains("game") && cfg.contains("game_file")) throw ConfigError("give either 'game' or 'game_file', not both");
  if (cfg.contains("game")) {
    game = from_json(cfg.at("game"));
  } else if (cfg.contains("game_file")) {
    std::filesystem::path p(cfg.at("game_file").get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    game = from_json(parse_json(read_file(p.string()), "game definition"));
  } else {
    throw ConfigError("experiment definition needs 'game' or 'game_file'");
  }

  ExperimentConfig out(*game);
  if (cfg.contains("schedules")) {
    const json& js = cfg.at("schedules");
    if (!js.is_object()) throw ConfigError("'schedules' must be an object");
    for (const auto& [key, value] : js.items()) {
      double* slot = key == "G" ? &out.schedules.G : key == "g" ? &out.schedules.g
                   : key == "E" ? &out.schedules.E : key == "e" ? &out.schedules.e
                   : key == "S" ? &out.schedules.S : key == "s" ? &out.schedules.s : nullptr;
      if (slot == nullptr) throw ConfigError("unknown schedule key '" + key + "'");
      *slot = number_or_ratio(value, "schedules." + key);
    }
  }
  if (cfg.contains("T")) out.T = cfg.at("T").get<long>();
  if (cfg.contains("seeds") && (cfg.contains("num_seeds") || cfg.contains("seed_base")))
    throw ConfigError("give either 'seeds' or 'num_seeds'/'seed_base', not both");
  if (cfg.contains("seeds")) {
    out.seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
  } else {
    out.seeds = seed_range(cfg.value("seed_base", std::uint64_t{0}), cfg.value("num_seeds", 1));
  }
  out.record_every = cfg.value("record_every", 0L);
  out.output_dir = cfg.value("output_dir", std::string());
  out.label = cfg.value("label", std::string("run"));
  out.allow_invalid_schedules = cfg.value("allow_invalid_schedules", false);
  out.workers = cfg.value("workers", 0);
  out.validate();
  return out;
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir) {
  const json cfg = parse_json(text, "experiment definition");
  try {
    return experiment_from_json(cfg, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid experiment definition: ") + e.what());
  }
}

ExperimentConfig load_experiment(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_experiment(read_file(path), parent.empty() ? "." : parent.string());
}

GameSpec parse_game(const std::string& text) {
  const json cfg = parse_json(text, "game definition");
  try {
    return from_json(cfg);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid game definition: ") + e.what());
  }
}

GameSpec load_game(const std::string& path) { return parse_game(read_file(path)); }

}  // namespace vgne
