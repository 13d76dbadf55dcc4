#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "vist/json_util.hpp"
#include "vist/model/story_model.hpp"

namespace vist::data {

using model::kNumImages;

struct StoryRecord {
  std::string story_id;
  std::array<std::string, kNumImages> photos;
  std::array<std::string, kNumImages> texts;
  std::string split;

  friend bool operator==(const StoryRecord&, const StoryRecord&) = default;
};

struct StoryLoad {
  std::vector<StoryRecord> records;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

// Stories file: one JSON object per line, either a whole story
//   {"story_id", "photos": [5 ids], "texts": [5 strings], "split"}
// or one annotation entry per image, grouped by story id
//   {"story_id", "position": 1..5, "photo_id", "text", "split"}.
// Stories that do not end up with exactly five images are dropped with a
// warning; malformed lines raise a FormatError naming the line.
inline StoryLoad parse_stories(std::istream& is) {
  struct Partial {
    std::size_t first_line = 0;
    std::string split;
    std::vector<std::string> photos;
    std::vector<std::string> texts;
    bool whole = false;
    std::map<int, std::pair<std::string, std::string>> entries;
  };
  std::vector<std::string> order;
  std::map<std::string, Partial> stories;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return FormatError(FormatError::Kind::kMalformed,
                         "stories line " + std::to_string(lineno) + ": " + why);
    };
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw fail("invalid JSON");
    }
    if (!j.is_object()) throw fail("expected an object");
    auto str = [&](const char* key) {
      const auto it = j.find(key);
      if (it == j.end() || !it->is_string()) throw fail(std::string("missing or non-string field '") + key + "'");
      return it->get<std::string>();
    };
    const std::string id = str("story_id");
    const std::string split = j.contains("split") ? str("split") : std::string();

    const bool whole = j.contains("photos") || j.contains("texts");
    auto [it, fresh] = stories.try_emplace(id);
    Partial& part = it->second;
    if (fresh) {
      order.push_back(id);
      part.first_line = lineno;
      part.split = split;
      part.whole = whole;
    } else if (whole || part.whole) {
      throw FormatError(FormatError::Kind::kDuplicate,
                        "stories line " + std::to_string(lineno) + ": duplicate story id '" + id + "'");
    } else if (part.split != split) {
      throw fail("story '" + id + "' has entries in more than one split");
    }

    if (whole) {
      const auto ph = j.find("photos");
      const auto tx = j.find("texts");
      if (ph == j.end() || !ph->is_array()) throw fail("missing array field 'photos'");
      if (tx == j.end() || !tx->is_array()) throw fail("missing array field 'texts'");
      if (ph->size() != tx->size()) throw fail("'photos' and 'texts' differ in length");
      for (std::size_t k = 0; k < ph->size(); ++k) {
        if (!(*ph)[k].is_string() || !(*tx)[k].is_string()) throw fail("photos/texts must be strings");
        part.photos.push_back((*ph)[k].get<std::string>());
        part.texts.push_back((*tx)[k].get<std::string>());
      }
    } else {
      const auto pos = j.find("position");
      if (pos == j.end() || !pos->is_number_integer()) throw fail("missing integer field 'position'");
      const int p = pos->get<int>();
      if (p < 1 || p > static_cast<int>(kNumImages)) {
        throw fail("bad position " + std::to_string(p) + " (expected 1..5)");
      }
      if (part.entries.count(p)) throw fail("duplicate position " + std::to_string(p) + " in story '" + id + "'");
      part.entries[p] = {str("photo_id"), str("text")};
    }
  }

  StoryLoad out;
  for (const auto& id : order) {
    Partial& part = stories[id];
    if (!part.whole) {
      for (auto& [_, entry] : part.entries) {
        part.photos.push_back(entry.first);
        part.texts.push_back(entry.second);
      }
    }
    if (part.photos.size() != kNumImages) {
      ++out.dropped;
      out.warnings.push_back("story '" + id + "' (line " + std::to_string(part.first_line) + ") has " +
                             std::to_string(part.photos.size()) + " images, expected 5; dropped");
      continue;
    }
    StoryRecord rec;
    rec.story_id = id;
    rec.split = part.split;
    for (std::size_t k = 0; k < kNumImages; ++k) {
      rec.photos[k] = part.photos[k];
      rec.texts[k] = part.texts[k];
    }
    out.records.push_back(std::move(rec));
    ++out.kept;
  }
  return out;
}

inline StoryLoad load_stories(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open stories file '" + path.string() + "'");
  return parse_stories(is);
}

inline void write_stories(std::ostream& os, const std::vector<StoryRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["story_id"] = r.story_id;
    j["photos"] = r.photos;
    j["texts"] = r.texts;
    j["split"] = r.split;
    os << j.dump() << '\n';
  }
}

inline std::vector<StoryRecord> filter_split(const std::vector<StoryRecord>& records, const std::string& split) {
  std::vector<StoryRecord> out;
  for (const auto& r : records) {
    if (split.empty() || r.split == split) out.push_back(r);
  }
  return out;
}

}  // namespace vist::data
