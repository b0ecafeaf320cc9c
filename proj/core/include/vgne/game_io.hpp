#pragma once

#include <string>

#include "vgne/game.hpp"
#include "vgne/harness.hpp"

namespace vgne {

/// Parses a game definition (JSON, `//` comments allowed). Either
///
///   { "builtin": "paper-example" | "softplus-coupled" | "random-quadratic",
///     "seed": 3 }
///
/// or an explicit quadratic game
///
///   { "name": "...", "players": 2, "dims": [1, 1],
///     "A": [ [[3, 1], [1, 0]], [[0, -1], [-1, 1]] ],   // one D x D matrix per player
///     "b": [ [0, 0], [0, 0] ],                         // optional, one length-D vector per player
///     "K": [[-1, -1]], "l": [-1],                      // optional coupling constraints
///     "nu": 1.0, "lipschitz": 3.24 }                   // optional known constants
///
/// Throws ConfigError on malformed input.
GameSpec parse_game(const std::string& text);

GameSpec load_game(const std::string& path);

/// Parses an experiment definition:
///
///   { "game": { ...game definition... },       // or "game_file": "path/to/game.json"
///     "schedules": { "G": 1, "g": "4/7", "E": 1, "e": "2/7", "S": 1, "s": "4/7" },
///     "T": 100000,
///     "seeds": [0, 1, 2],                        // or "num_seeds": 20, "seed_base": 0
///     "record_every": 0, "output_dir": "out", "label": "run",
///     "allow_invalid_schedules": false, "workers": 0 }
///
/// Exponents and constants accept numbers or "p/q" strings. Missing schedule
/// entries keep their defaults. A relative game_file is resolved against
/// base_dir.
ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir = ".");

ExperimentConfig load_experiment(const std::string& path);

}  // namespace vgne
