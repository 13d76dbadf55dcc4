#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "vist/rating/records.hpp"

namespace vist::rating {

struct SourceSummary {
  std::array<double, kNumAspects> means{};
  double total = 0.0;  // sum of the six means, unrounded
  std::size_t ratings = 0;
};

struct AggregateReport {
  std::map<std::string, SourceSummary> sources;

  bool empty() const { return sources.empty(); }
};

// One rating with the source of the task it judged.
struct SourcedScores {
  std::string source;
  Scores scores;
};

inline AggregateReport aggregate(const std::vector<SourcedScores>& ratings) {
  std::map<std::string, std::array<long long, kNumAspects>> sums;
  AggregateReport report;
  for (const auto& r : ratings) {
    auto& s = sums[r.source];
    for (std::size_t k = 0; k < kNumAspects; ++k) s[k] += r.scores[k];
    ++report.sources[r.source].ratings;
  }
  for (auto& [source, summary] : report.sources) {
    const auto n = static_cast<double>(summary.ratings);
    for (std::size_t k = 0; k < kNumAspects; ++k) {
      summary.means[k] = static_cast<double>(sums[source][k]) / n;
      summary.total += summary.means[k];
    }
  }
  return report;
}

inline Json to_json(const AggregateReport& report) {
  Json j;
  if (report.empty()) {
    j["status"] = "empty";
    j["message"] = "no ratings yet";
    return j;
  }
  j["status"] = "ok";
  Json sources = Json::object();
  for (const auto& [source, s] : report.sources) {
    Json means = Json::object();
    for (std::size_t k = 0; k < kNumAspects; ++k) means[std::string(1, kAspectLetters[k])] = s.means[k];
    sources[source] = {{"means", means}, {"total", s.total}, {"ratings", s.ratings}};
  }
  j["sources"] = sources;
  return j;
}

// Row label used in the rendered table.
inline std::string source_label(const std::string& source) {
  if (source == kModelSource) return "Ours";
  if (source == kHumanSource) return "Human";
  return source;
}

// Rows "Ours" then "Human" (then any other tag), columns a) .. f) and the
// total, three decimals.
inline std::string render_table(const AggregateReport& report) {
  if (report.empty()) return "no ratings yet\n";
  std::string out = "      | a)    | b)    | c)    | d)    | e)    | f)    | Total score\n";
  auto row = [&](const std::string& source, const SourceSummary& s) {
    out += fmt::format("{:<5} ", source_label(source));
    for (double m : s.means) out += fmt::format("| {:.3f} ", m);
    out += fmt::format("| {:.3f}\n", s.total);
  };
  for (const auto* tag : {&kModelSource, &kHumanSource}) {
    if (const auto it = report.sources.find(*tag); it != report.sources.end()) row(it->first, it->second);
  }
  for (const auto& [source, s] : report.sources) {
    if (source != kModelSource && source != kHumanSource) row(source, s);
  }
  return out;
}

}  // namespace vist::rating
