#pragma once

#include <array>
#include <chrono>
#include <ctime>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "vist/json_util.hpp"
#include "vist/model/story_model.hpp"

namespace vist::rating {

inline constexpr std::size_t kNumAspects = 6;
inline constexpr std::array<char, kNumAspects> kAspectLetters = {'a', 'b', 'c', 'd', 'e', 'f'};
inline const std::array<std::string, kNumAspects> kAspectLabels = {
    "the story is focused",
    "the story has good structure and coherence",
    "would you share this story",
    "do you think this story was written by a human",
    "the story is visually grounded",
    "the story is detailed",
};

inline const std::string kModelSource = "model";
inline const std::string kHumanSource = "human";

struct RatingTask {
  std::string task_id;
  std::string story_id;
  std::array<std::string, model::kNumImages> segments;
  std::string source;               // never leaves the server
  std::vector<std::string> images;  // optional references, may be empty
};

using Scores = std::array<int, kNumAspects>;

struct RatingRecord {
  std::string task_id;
  std::string rater_id;
  Scores scores{};
  std::string timestamp;

  // Same judgment; the timestamp is not part of it.
  bool same_judgment(const RatingRecord& o) const {
    return task_id == o.task_id && rater_id == o.rater_id && scores == o.scores;
  }
};

// What a rater sees. Built field by field so the source tag cannot slip in.
inline Json rater_payload(const RatingTask& t) {
  Json j;
  j["task_id"] = t.task_id;
  j["story_id"] = t.story_id;
  j["segments"] = t.segments;
  if (!t.images.empty()) j["images"] = t.images;
  return j;
}

inline std::string log_line(const RatingRecord& r) {
  nlohmann::ordered_json j;
  j["task_id"] = r.task_id;
  j["rater_id"] = r.rater_id;
  j["scores"] = r.scores;
  j["timestamp"] = r.timestamp;
  return j.dump();
}

// Raised for a record that fails validation; the message is meant for the rater.
class RatingRejected : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Parses and range-checks a submitted record. Scores come either as a list of
// six integers in aspect order or as an object keyed "a".."f".
inline RatingRecord parse_rating(const Json& j, int scale_max = 5) {
  if (!j.is_object()) throw RatingRejected("rating must be a JSON object");
  RatingRecord r;
  auto text_field = [&](const char* key, bool required) -> std::string {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) throw RatingRejected(std::string("missing field '") + key + "'");
      return {};
    }
    if (!it->is_string()) throw RatingRejected(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };
  r.task_id = text_field("task_id", true);
  r.rater_id = text_field("rater_id", true);
  r.timestamp = text_field("timestamp", false);
  if (r.rater_id.empty()) throw RatingRejected("rater_id must not be empty");

  const auto it = j.find("scores");
  if (it == j.end()) throw RatingRejected("missing field 'scores'");
  std::array<const Json*, kNumAspects> raw{};
  if (it->is_array()) {
    if (it->size() != kNumAspects) {
      throw RatingRejected(fmt::format("expected {} scores (aspects a-f), got {}", kNumAspects, it->size()));
    }
    for (std::size_t k = 0; k < kNumAspects; ++k) raw[k] = &(*it)[k];
  } else if (it->is_object()) {
    if (it->size() != kNumAspects) throw RatingRejected("scores must name exactly the aspects a-f");
    for (std::size_t k = 0; k < kNumAspects; ++k) {
      const auto s = it->find(std::string(1, kAspectLetters[k]));
      if (s == it->end()) throw RatingRejected(fmt::format("missing score for aspect {}", kAspectLetters[k]));
      raw[k] = &*s;
    }
  } else {
    throw RatingRejected("scores must be a list or an object");
  }
  for (std::size_t k = 0; k < kNumAspects; ++k) {
    const Json& v = *raw[k];
    if (!v.is_number_integer()) {
      throw RatingRejected(fmt::format("aspect {}: score must be an integer", kAspectLetters[k]));
    }
    const auto s = v.get<long long>();
    if (s < 1 || s > scale_max) {
      throw RatingRejected(fmt::format("aspect {}: score {} outside 1..{}", kAspectLetters[k], s, scale_max));
    }
    r.scores[k] = static_cast<int>(s);
  }
  return r;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

}  // namespace vist::rating
