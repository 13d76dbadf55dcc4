#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vist/data/stories.hpp"
#include "vist/io.hpp"
#include "vist/model/story_model.hpp"

namespace vist::data {

// Binary embedding file:
//   "VEMB" | u32 version | u32 count | u32 image_dim
//   count x (u32 id length, id bytes, image_dim f32 little-endian)
inline constexpr char kEmbeddingMagic[4] = {'V', 'E', 'M', 'B'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t image_dim) : image_dim_(image_dim) {}

  std::size_t image_dim() const { return image_dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.count(id) != 0; }

  void insert(const std::string& photo_id, std::vector<float> v) {
    if (v.size() != image_dim_) {
      throw DimensionError("embedding for '" + photo_id + "' has " + std::to_string(v.size()) +
                           " values, store expects " + std::to_string(image_dim_));
    }
    if (!vectors_.emplace(photo_id, std::move(v)).second) {
      throw FormatError(FormatError::Kind::kDuplicate, "duplicate photo id '" + photo_id + "'");
    }
  }

  const std::vector<float>& at(const std::string& photo_id) const {
    const auto it = vectors_.find(photo_id);
    if (it == vectors_.end()) throw MissingEmbedding(photo_id);
    return it->second;
  }

  const std::map<std::string, std::vector<float>>& entries() const { return vectors_; }

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  std::size_t image_dim_ = 0;
  std::map<std::string, std::vector<float>> vectors_;
};

inline std::string serialize_embeddings(const EmbeddingStore& store) {
  io::ByteWriter w;
  w.bytes(std::string_view(kEmbeddingMagic, 4));
  w.u32(kEmbeddingVersion);
  w.u32(static_cast<std::uint32_t>(store.size()));
  w.u32(static_cast<std::uint32_t>(store.image_dim()));
  for (const auto& [id, v] : store.entries()) {
    w.string(id);
    for (float x : v) w.f32(x);
  }
  return w.take();
}

inline EmbeddingStore deserialize_embeddings(std::string_view bytes) {
  io::ByteReader r(bytes, "embeddings");
  if (r.bytes(4) != std::string_view(kEmbeddingMagic, 4)) {
    throw FormatError(FormatError::Kind::kCorrupt, "embeddings: bad magic");
  }
  const auto version = r.u32();
  if (version != kEmbeddingVersion) {
    throw FormatError(FormatError::Kind::kVersionMismatch,
                      "embeddings: version " + std::to_string(version) + " unsupported");
  }
  const auto count = r.u32();
  const auto dim = r.u32();
  EmbeddingStore store(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string id = r.string();
    std::vector<float> v(dim);
    for (auto& x : v) x = r.f32();
    store.insert(id, std::move(v));
  }
  if (!r.done()) throw FormatError(FormatError::Kind::kCorrupt, "embeddings: trailing bytes");
  return store;
}

inline void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store) {
  io::atomic_write(path, serialize_embeddings(store));
}

inline EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  return deserialize_embeddings(io::read_file(path));
}

// Looks up all five photos of a story; a miss names the photo id.
template <typename T>
model::ImageSequence<T> resolve_images(const EmbeddingStore& store, const StoryRecord& rec) {
  model::ImageSequence<T> seq;
  for (std::size_t k = 0; k < kNumImages; ++k) {
    const auto& v = store.at(rec.photos[k]);
    seq[k] = Eigen::Map<const Eigen::VectorXf>(v.data(), static_cast<Eigen::Index>(v.size())).template cast<T>();
  }
  return seq;
}

// Fails on the first story with an unresolvable photo.
inline void check_joined(const EmbeddingStore& store, const std::vector<StoryRecord>& records) {
  for (const auto& rec : records) {
    for (const auto& photo : rec.photos) {
      if (!store.contains(photo)) throw MissingEmbedding(photo);
    }
  }
}

}  // namespace vist::data
