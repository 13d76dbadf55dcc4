#pragma once

#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

#include "vist/io.hpp"
#include "vist/json_util.hpp"
#include "vist/model/story_model.hpp"
#include "vist/training/adam.hpp"

namespace vist::training {

// Checkpoint layout (all integers little-endian):
//   "VSTM" | u32 version
//   section* : 4-byte tag | u64 payload length | payload
//     CONF  JSON {model, train}
//     VOCB  u32 n, then n x (string token, u64 count)
//     PARM  u8 scalar bytes (4|8), u32 n, then n x (string name, u32 rows,
//           u32 cols, rows*cols column-major IEEE-754 values)
//     OPTM  u64 step, then two tensor lists shaped like PARM (m, v)
// Strings are u32 length + bytes.
inline constexpr char kCheckpointMagic[4] = {'V', 'S', 'T', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
struct Checkpoint {
  model::ModelConfig model_config;
  TrainConfig train_config;
  text::Vocab vocab;
  model::StoryParams<T> params;
  OptimState<T> optim;
};

inline Json to_json(const model::ModelConfig& c) {
  return Json{{"image_dim", c.image_dim},
              {"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},
              {"vocab_size", c.vocab_size},
              {"share_embeddings", c.share_embeddings},
              {"freeze_embeddings", c.freeze_embeddings},
              {"decoder_init", c.decoder_init == model::DecoderInit::kHiddenOnly ? "hidden" : "hidden_cell"}};
}

// Strict: unknown keys are rejected. Missing keys keep `base` values.
inline model::ModelConfig model_config_from_json(const Json& j, model::ModelConfig base = {},
                                                 const std::string& where = "model") {
  reject_unknown_keys(j, {"image_dim", "embed_dim", "hidden_dim", "vocab_size", "share_embeddings",
                          "freeze_embeddings", "decoder_init"},
                      where);
  read_opt(j, "image_dim", base.image_dim, where);
  read_opt(j, "embed_dim", base.embed_dim, where);
  read_opt(j, "hidden_dim", base.hidden_dim, where);
  read_opt(j, "vocab_size", base.vocab_size, where);
  read_opt(j, "share_embeddings", base.share_embeddings, where);
  read_opt(j, "freeze_embeddings", base.freeze_embeddings, where);
  std::string init = base.decoder_init == model::DecoderInit::kHiddenOnly ? "hidden" : "hidden_cell";
  read_opt(j, "decoder_init", init, where);
  if (init == "hidden") {
    base.decoder_init = model::DecoderInit::kHiddenOnly;
  } else if (init == "hidden_cell") {
    base.decoder_init = model::DecoderInit::kHiddenAndCell;
  } else {
    throw ConfigError(where + ".decoder_init: expected \"hidden_cell\" or \"hidden\"");
  }
  return base;
}

inline Json to_json(const TrainConfig& c) {
  return Json{{"lr", c.lr},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps},
              {"clip_norm", c.clip_norm},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"precision", c.precision}};
}

inline TrainConfig train_config_from_json(const Json& j, TrainConfig base = {},
                                          const std::string& where = "train") {
  reject_unknown_keys(j, {"lr", "beta1", "beta2", "eps", "clip_norm", "batch_size", "epochs", "seed",
                          "precision"},
                      where);
  read_opt(j, "lr", base.lr, where);
  read_opt(j, "beta1", base.beta1, where);
  read_opt(j, "beta2", base.beta2, where);
  read_opt(j, "eps", base.eps, where);
  read_opt(j, "clip_norm", base.clip_norm, where);
  read_opt(j, "batch_size", base.batch_size, where);
  read_opt(j, "epochs", base.epochs, where);
  read_opt(j, "seed", base.seed, where);
  read_opt(j, "precision", base.precision, where);
  return base;
}

namespace detail {

inline FormatError corrupt(const std::string& why) {
  return FormatError(FormatError::Kind::kCorrupt, "checkpoint corrupt: " + why);
}

template <typename T>
void write_tensors(io::ByteWriter& w, const model::StoryParams<T>& p) {
  std::uint32_t n = 0;
  zip_params([&](const std::string&, const auto&) { ++n; }, p);
  w.u32(n);
  zip_params(
      [&](const std::string& name, const auto& t) {
        w.string(name);
        w.u32(static_cast<std::uint32_t>(t.rows()));
        w.u32(static_cast<std::uint32_t>(t.cols()));
        for (Eigen::Index i = 0; i < t.size(); ++i) {
          if constexpr (std::is_same_v<T, float>) {
            w.f32(t.data()[i]);
          } else {
            w.f64(t.data()[i]);
          }
        }
      },
      p);
}

// Reads into tensors already shaped by the model config; any name or shape
// disagreement means the file does not describe this model.
template <typename T>
void read_tensors(io::ByteReader& r, model::StoryParams<T>& p) {
  std::uint32_t expected = 0;
  zip_params([&](const std::string&, const auto&) { ++expected; }, p);
  if (r.u32() != expected) throw corrupt("tensor count does not match the model config");
  zip_params(
      [&](const std::string& name, auto& t) {
        if (r.string() != name) throw corrupt("unexpected tensor (wanted '" + name + "')");
        const auto rows = r.u32();
        const auto cols = r.u32();
        if (rows != t.rows() || cols != t.cols()) throw corrupt("tensor '" + name + "' has the wrong shape");
        for (Eigen::Index i = 0; i < t.size(); ++i) {
          if constexpr (std::is_same_v<T, float>) {
            t.data()[i] = r.f32();
          } else {
            t.data()[i] = r.f64();
          }
        }
      },
      p);
}

inline void write_section(io::ByteWriter& w, const char (&tag)[5], const std::string& payload) {
  w.bytes(std::string_view(tag, 4));
  w.u64(payload.size());
  w.bytes(payload);
}

inline std::string_view read_section(io::ByteReader& r, const char (&tag)[5]) {
  if (r.bytes(4) != std::string_view(tag, 4)) throw corrupt(std::string("expected section ") + tag);
  const auto len = r.u64();
  if (len > r.remaining()) {
    throw FormatError(FormatError::Kind::kTruncated,
                      std::string("checkpoint truncated: section ") + tag + " declares " +
                          std::to_string(len) + " bytes, " + std::to_string(r.remaining()) + " left");
  }
  return r.bytes(static_cast<std::size_t>(len));
}

}  // namespace detail

template <typename T>
std::string serialize_checkpoint(const Checkpoint<T>& ck) {
  io::ByteWriter w;
  w.bytes(std::string_view(kCheckpointMagic, 4));
  w.u32(kCheckpointVersion);

  const Json conf{{"model", to_json(ck.model_config)}, {"train", to_json(ck.train_config)}};
  detail::write_section(w, "CONF", conf.dump());

  io::ByteWriter vocab;
  vocab.u32(static_cast<std::uint32_t>(ck.vocab.size()));
  for (std::size_t i = 0; i < ck.vocab.size(); ++i) {
    vocab.string(ck.vocab.tokens()[i]);
    vocab.u64(ck.vocab.counts()[i]);
  }
  detail::write_section(w, "VOCB", vocab.data());

  io::ByteWriter parm;
  parm.u8(sizeof(T));
  detail::write_tensors(parm, ck.params);
  detail::write_section(w, "PARM", parm.data());

  io::ByteWriter optm;
  optm.u64(ck.optim.t);
  detail::write_tensors(optm, ck.optim.m);
  detail::write_tensors(optm, ck.optim.v);
  detail::write_section(w, "OPTM", optm.data());
  return w.take();
}

// Scalar width (4 or 8) stored in a serialized checkpoint.
inline int checkpoint_scalar_bytes(std::string_view bytes) {
  io::ByteReader r(bytes, "checkpoint");
  if (r.bytes(4) != std::string_view(kCheckpointMagic, 4)) throw detail::corrupt("bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatError::Kind::kVersionMismatch,
                      "checkpoint version mismatch: file has " + std::to_string(version) +
                          ", expected " + std::to_string(kCheckpointVersion));
  }
  detail::read_section(r, "CONF");
  detail::read_section(r, "VOCB");
  const auto parm = detail::read_section(r, "PARM");
  if (parm.empty()) throw detail::corrupt("empty PARM section");
  return static_cast<unsigned char>(parm[0]);
}

template <typename T>
Checkpoint<T> deserialize_checkpoint(std::string_view bytes) {
  const int width = checkpoint_scalar_bytes(bytes);
  if (width != sizeof(T)) {
    throw detail::corrupt("precision mismatch: file stores " + std::to_string(width) +
                          "-byte scalars, reader expects " + std::to_string(sizeof(T)));
  }
  io::ByteReader r(bytes, "checkpoint");
  r.bytes(8);

  Checkpoint<T> ck;
  {
    const auto conf = detail::read_section(r, "CONF");
    Json j;
    try {
      j = Json::parse(conf);
      ck.model_config = model_config_from_json(j.at("model"));
      ck.train_config = train_config_from_json(j.at("train"));
      ck.model_config.validate();
    } catch (const std::exception& e) {
      throw detail::corrupt(std::string("config section: ") + e.what());
    }
  }
  {
    io::ByteReader v(detail::read_section(r, "VOCB"), "checkpoint vocab");
    const auto n = v.u32();
    std::vector<std::string> tokens;
    std::vector<std::uint64_t> counts;
    for (std::uint32_t i = 0; i < n; ++i) {
      tokens.push_back(v.string());
      counts.push_back(v.u64());
    }
    if (!v.done()) throw detail::corrupt("trailing bytes in vocab section");
    try {
      ck.vocab = text::Vocab::from_tokens(tokens, counts);
    } catch (const FormatError& e) {
      throw detail::corrupt(e.what());
    }
    if (ck.vocab.size() != static_cast<std::size_t>(ck.model_config.vocab_size)) {
      throw detail::corrupt("vocab size disagrees with model config");
    }
  }
  {
    io::ByteReader p(detail::read_section(r, "PARM"), "checkpoint parameters");
    p.u8();
    ck.params = model::StoryParams<T>::zeros(ck.model_config);
    detail::read_tensors(p, ck.params);
    if (!p.done()) throw detail::corrupt("trailing bytes in parameter section");
  }
  {
    io::ByteReader o(detail::read_section(r, "OPTM"), "checkpoint optimizer");
    ck.optim = OptimState<T>::zeros(ck.model_config);
    ck.optim.t = o.u64();
    detail::read_tensors(o, ck.optim.m);
    detail::read_tensors(o, ck.optim.v);
    if (!o.done()) throw detail::corrupt("trailing bytes in optimizer section");
  }
  if (!r.done()) throw detail::corrupt("trailing bytes after last section");
  return ck;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ck) {
  io::atomic_write(path, serialize_checkpoint(ck));
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint<T>(io::read_file(path));
}

}  // namespace vist::training
