#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "vist/data/synth.hpp"
#include "vist/json_util.hpp"
#include "vist/model/inference.hpp"
#include "vist/text/skipgram.hpp"
#include "vist/training/checkpoint.hpp"

namespace vist::cli {

namespace fs = std::filesystem;

// Input paths are resolved against the config file's directory. Outputs go
// to `out` (the --out flag wins), under fixed file names.
struct Paths {
  fs::path stories;        // train / generate / evaluate references / human side of the rating pool
  fs::path embeddings;     // VEMB photo embeddings
  fs::path checkpoint;     // read by generate; default <out>/model.vstm
  fs::path candidates;     // read by evaluate and serve-ratings; default <out>/candidates.jsonl
  fs::path word_vectors;   // optional text embeddings to start from
  fs::path ratings_log;    // default <out>/ratings.jsonl
  fs::path static_dir;     // optional rating UI bundle
  fs::path out = "out";
};

struct DataOptions {
  std::string train_split = "train";
  std::string eval_split = "test";
  std::uint64_t min_count = 1;
};

struct Word2VecOptions {
  bool enabled = false;
  text::SkipgramConfig skipgram;  // embed_dim and seed come from the run
};

struct RatingOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t raters_per_task = 3;
  int scale_max = 5;
  std::size_t max_stories = 0;  // 0 = every candidate story
};

struct RunConfig {
  fs::path config_dir;
  std::uint64_t seed = 1;
  Paths paths;
  DataOptions data;
  model::ModelConfig model;
  training::TrainConfig train;
  model::DecodeConfig decode;
  Word2VecOptions word2vec;
  data::SynthConfig synth;
  RatingOptions rating;

  fs::path checkpoint_path() const { return paths.checkpoint.empty() ? paths.out / "model.vstm" : paths.checkpoint; }
  fs::path candidates_path() const {
    return paths.candidates.empty() ? paths.out / "candidates.jsonl" : paths.candidates;
  }
  fs::path ratings_log_path() const {
    return paths.ratings_log.empty() ? paths.out / "ratings.jsonl" : paths.ratings_log;
  }
};

namespace detail {

inline fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

inline void read_paths(const Json& j, Paths& p, const fs::path& base) {
  const std::string where = "paths";
  reject_unknown_keys(j, {"stories", "embeddings", "checkpoint", "candidates", "word_vectors", "ratings_log",
                          "static_dir", "out"},
                      where);
  auto path = [&](const char* key, fs::path& out) {
    std::string s = out.string();
    read_opt(j, key, s, where);
    out = resolve(base, s);
  };
  path("stories", p.stories);
  path("embeddings", p.embeddings);
  path("checkpoint", p.checkpoint);
  path("candidates", p.candidates);
  path("word_vectors", p.word_vectors);
  path("ratings_log", p.ratings_log);
  path("static_dir", p.static_dir);
  path("out", p.out);
}

inline void read_data(const Json& j, DataOptions& d) {
  reject_unknown_keys(j, {"train_split", "eval_split", "min_count"}, "data");
  read_opt(j, "train_split", d.train_split, "data");
  read_opt(j, "eval_split", d.eval_split, "data");
  read_opt(j, "min_count", d.min_count, "data");
  if (d.min_count < 1) throw ConfigError("data.min_count must be >= 1");
}

inline void read_word2vec(const Json& j, Word2VecOptions& w) {
  const std::string where = "word2vec";
  reject_unknown_keys(j, {"enabled", "window", "negatives", "epochs", "lr"}, where);
  read_opt(j, "enabled", w.enabled, where);
  read_opt(j, "window", w.skipgram.window, where);
  read_opt(j, "negatives", w.skipgram.negatives, where);
  read_opt(j, "epochs", w.skipgram.epochs, where);
  read_opt(j, "lr", w.skipgram.lr, where);
}

inline void read_decode(const Json& j, model::DecodeConfig& d) {
  reject_unknown_keys(j, {"max_len", "beam_width"}, "decode");
  read_opt(j, "max_len", d.max_len, "decode");
  read_opt(j, "beam_width", d.beam_width, "decode");
  if (d.max_len < 0) throw ConfigError("decode.max_len must be >= 0");
  if (d.beam_width < 1) throw ConfigError("decode.beam_width must be >= 1");
}

inline void read_synth(const Json& j, data::SynthConfig& s) {
  const std::string where = "synth";
  reject_unknown_keys(j, {"n_stories", "image_dim", "noise", "val_fraction", "test_fraction"}, where);
  read_opt(j, "n_stories", s.n_stories, where);
  read_opt(j, "image_dim", s.image_dim, where);
  read_opt(j, "noise", s.noise, where);
  read_opt(j, "val_fraction", s.val_fraction, where);
  read_opt(j, "test_fraction", s.test_fraction, where);
  if (s.val_fraction < 0 || s.test_fraction < 0 || s.val_fraction + s.test_fraction > 1) {
    throw ConfigError("synth: split fractions must be non-negative and sum to at most 1");
  }
}

inline void read_rating(const Json& j, RatingOptions& r) {
  const std::string where = "rating";
  reject_unknown_keys(j, {"host", "port", "raters_per_task", "scale_max", "max_stories"}, where);
  read_opt(j, "host", r.host, where);
  read_opt(j, "port", r.port, where);
  read_opt(j, "raters_per_task", r.raters_per_task, where);
  read_opt(j, "scale_max", r.scale_max, where);
  read_opt(j, "max_stories", r.max_stories, where);
  if (r.port < 0 || r.port > 65535) throw ConfigError("rating.port must be in 0..65535");
  if (r.scale_max < 2) throw ConfigError("rating.scale_max must be >= 2");
}

}  // namespace detail

// Strict parse: unknown keys anywhere are rejected. Image and vocabulary
// sizes are not configurable; they come from the data. The run seed seeds
// model initialization, batch order, skip-gram and the synthetic generator.
inline RunConfig parse_config(const Json& j, const fs::path& config_dir) {
  reject_unknown_keys(j, {"seed", "paths", "data", "model", "train", "decode", "word2vec", "synth", "rating"},
                      "config");
  RunConfig c;
  c.config_dir = config_dir;
  c.paths.out = detail::resolve(config_dir, c.paths.out);
  read_opt(j, "seed", c.seed, "config");
  auto section = [&](const char* key, auto&& fn) {
    if (const auto it = j.find(key); it != j.end()) fn(*it);
  };
  section("paths", [&](const Json& s) { detail::read_paths(s, c.paths, config_dir); });
  section("data", [&](const Json& s) { detail::read_data(s, c.data); });
  section("model", [&](const Json& s) {
    if (s.contains("image_dim") || s.contains("vocab_size")) {
      throw ConfigError("model: image_dim and vocab_size are taken from the data, not the config");
    }
    c.model = training::model_config_from_json(s, c.model);
  });
  section("train", [&](const Json& s) {
    if (s.contains("seed")) throw ConfigError("train.seed: use the top-level seed");
    c.train = training::train_config_from_json(s, c.train);
  });
  section("decode", [&](const Json& s) { detail::read_decode(s, c.decode); });
  section("word2vec", [&](const Json& s) { detail::read_word2vec(s, c.word2vec); });
  section("synth", [&](const Json& s) { detail::read_synth(s, c.synth); });
  section("rating", [&](const Json& s) { detail::read_rating(s, c.rating); });
  try {
    c.train.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (c.model.embed_dim < 1 || c.model.hidden_dim < 1) throw ConfigError("model: dimensions must be positive");
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config file '" + path.string() + "' not found");
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

// Seed and output overrides from the command line; re-derives the seeded
// sub-configs.
inline void apply_overrides(RunConfig& c, std::optional<std::uint64_t> seed, const std::optional<fs::path>& out) {
  if (seed) c.seed = *seed;
  if (out) c.paths.out = fs::absolute(*out).lexically_normal();
  c.train.seed = c.seed;
  c.synth.seed = c.seed;
  c.word2vec.skipgram.seed = c.seed;
  c.word2vec.skipgram.embed_dim = c.model.embed_dim;
}

}  // namespace vist::cli
