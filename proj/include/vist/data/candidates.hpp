#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "vist/json_util.hpp"
#include "vist/model/story_model.hpp"

namespace vist::data {

// One generated story: the five decoder outputs and their concatenation.
struct CandidateRecord {
  std::string story_id;
  std::array<std::string, model::kNumImages> texts;
  std::string concatenated;

  friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

inline std::string join_segments(const std::array<std::string, model::kNumImages>& texts) {
  std::string out;
  for (const auto& t : texts) {
    if (t.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

inline void write_candidates(std::ostream& os, const std::vector<CandidateRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["story_id"] = r.story_id;
    j["texts"] = r.texts;
    j["concatenated"] = r.concatenated;
    os << j.dump() << '\n';
  }
}

// Accepts generator output ({story_id, texts, concatenated}) and plain
// {story_id, text} lines; the latter leave `texts` empty.
inline std::vector<CandidateRecord> parse_candidates(std::istream& is) {
  std::vector<CandidateRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "candidates line " + std::to_string(lineno);
    auto fail = [&](const std::string& why) { return FormatError(FormatError::Kind::kMalformed, where + ": " + why); };
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw fail("invalid JSON");
    }
    if (!j.is_object()) throw fail("expected an object");
    CandidateRecord r;
    try {
      r.story_id = j.at("story_id").get<std::string>();
      if (j.contains("texts")) {
        const auto texts = j.at("texts").get<std::vector<std::string>>();
        if (texts.size() != model::kNumImages) throw fail("texts must hold 5 segments");
        std::copy(texts.begin(), texts.end(), r.texts.begin());
        r.concatenated = j.contains("concatenated") ? j.at("concatenated").get<std::string>() : join_segments(r.texts);
      } else {
        r.concatenated = j.at("text").get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("missing or mistyped field (") + e.what() + ")");
    }
    if (!seen.insert(r.story_id).second) {
      throw FormatError(FormatError::Kind::kDuplicate, where + ": duplicate story_id '" + r.story_id + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<CandidateRecord> load_candidates(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open candidates file '" + path.string() + "'");
  return parse_candidates(is);
}

}  // namespace vist::data
