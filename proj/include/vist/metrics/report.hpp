#pragma once

#include <fmt/format.h>

#include <array>
#include <string>
#include <vector>

#include "vist/json_util.hpp"
#include "vist/metrics/bleu.hpp"
#include "vist/metrics/cider.hpp"
#include "vist/metrics/meteor.hpp"
#include "vist/metrics/rouge.hpp"

namespace vist::metrics {

struct StoryScores {
  std::string story_id;
  std::array<double, kMaxBleuN> bleu{};  // sentence-level, same formula as the corpus score
  double meteor = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;

  friend bool operator==(const StoryScores&, const StoryScores&) = default;
};

// Corpus BLEU-1..4, and METEOR, ROUGE-L and CIDEr averaged over stories.
struct MetricReport {
  std::array<double, kMaxBleuN> bleu{};
  double meteor = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;
  std::vector<StoryScores> stories;

  // Column order of the published comparison table.
  std::array<double, 7> columns() const { return {bleu[0], bleu[1], bleu[2], bleu[3], meteor, rouge_l, cider}; }

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline constexpr std::array<const char*, 7> kReportColumns = {"BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4",
                                                             "METEOR", "ROUGE", "CIDEr"};

enum class Scale { kFraction, kPercent };

// One row of scores joined by " | ". Percent multiplies every column,
// CIDEr included, by 100 and keeps one decimal; fractions keep four.
inline std::string render_row(const MetricReport& r, Scale scale) {
  std::string out;
  for (const double v : r.columns()) {
    if (!out.empty()) out += " | ";
    out += scale == Scale::kPercent ? fmt::format("{:.1f}", v * 100.0) : fmt::format("{:.4f}", v);
  }
  return out;
}

inline std::string render_header() {
  std::string out;
  for (const char* c : kReportColumns) {
    if (!out.empty()) out += " | ";
    out += c;
  }
  return out;
}

inline std::string render_table(const MetricReport& r) {
  return render_header() + "\n" + render_row(r, Scale::kPercent) + "\n" + render_row(r, Scale::kFraction) + "\n";
}

inline MetricReport evaluate_corpus(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) throw InvalidArgument("evaluate: empty corpus");
  const auto tokenized = tokenize_pairs(pairs);
  MetricReport r;
  r.bleu = corpus_bleu(tokenized);
  const auto cider = cider_scores(tokenized);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    StoryScores s;
    s.story_id = pairs[i].story_id;
    s.bleu = bleu_from_stats(bleu_stats(tokenized[i]));
    s.meteor = meteor(tokenized[i]);
    s.rouge_l = rouge_l(tokenized[i]);
    s.cider = cider[i];
    r.meteor += s.meteor;
    r.rouge_l += s.rouge_l;
    r.cider += s.cider;
    r.stories.push_back(std::move(s));
  }
  const auto n = static_cast<double>(pairs.size());
  r.meteor /= n;
  r.rouge_l /= n;
  r.cider /= n;
  return r;
}

inline Json to_json(const MetricReport& r) {
  Json stories = Json::array();
  for (const auto& s : r.stories) {
    stories.push_back({{"story_id", s.story_id},
                       {"bleu", s.bleu},
                       {"meteor", s.meteor},
                       {"rouge_l", s.rouge_l},
                       {"cider", s.cider}});
  }
  Json percent = Json::object();
  const auto cols = r.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) percent[kReportColumns[i]] = cols[i] * 100.0;
  return {{"bleu", r.bleu},   {"meteor", r.meteor},   {"rouge_l", r.rouge_l},
          {"cider", r.cider}, {"percent", percent},   {"stories", stories}};
}

inline MetricReport metric_report_from_json(const Json& j) {
  MetricReport r;
  try {
    r.bleu = j.at("bleu").get<std::array<double, kMaxBleuN>>();
    r.meteor = j.at("meteor").get<double>();
    r.rouge_l = j.at("rouge_l").get<double>();
    r.cider = j.at("cider").get<double>();
    for (const auto& s : j.at("stories")) {
      r.stories.push_back({s.at("story_id").get<std::string>(), s.at("bleu").get<std::array<double, kMaxBleuN>>(),
                           s.at("meteor").get<double>(), s.at("rouge_l").get<double>(), s.at("cider").get<double>()});
    }
  } catch (const Json::exception& e) {
    throw FormatError(FormatError::Kind::kMalformed, std::string("metric report: ") + e.what());
  }
  return r;
}

}  // namespace vist::metrics
