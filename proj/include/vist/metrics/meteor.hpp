#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "vist/metrics/eval_pair.hpp"
#include "vist/metrics/porter_stemmer.hpp"

namespace vist::metrics {

// Alignments with at most this many matches are searched exhaustively for
// the fewest chunks; larger ones are aligned greedily.
inline constexpr std::size_t kMeteorExhaustiveMax = 12;

struct MeteorDetail {
  std::size_t matches = 0;
  std::size_t exact_matches = 0;
  std::size_t stem_matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

namespace detail {

// Two-stage unigram alignment problem. Stage 1 pairs identical words; stage
// 2 pairs words left over from stage 1 whose Porter stems agree. Each stage
// takes as many pairs as possible, which fixes the number of exact pairs per
// word and of stem pairs per stem; only which positions pair up is free.
class MeteorAligner {
 public:
  MeteorAligner(const Tokens& cand, const Tokens& ref) : cand_(cand), ref_(ref) {
    for (const auto& t : cand) cand_stem_.push_back(porter_stem(t));
    for (const auto& t : ref) ref_stem_.push_back(porter_stem(t));

    std::map<std::string, std::size_t> cc, rc;
    for (const auto& t : cand) ++cc[t];
    for (const auto& t : ref) ++rc[t];
    std::map<std::string, std::size_t> cand_left, ref_left;  // by stem
    for (const auto& [w, c] : cc) {
      const auto r = rc.count(w) ? rc.at(w) : 0;
      exact_quota_[w] = std::min(c, r);
      exact_total_ += exact_quota_[w];
      cand_left[porter_stem(w)] += c - exact_quota_[w];
    }
    for (const auto& [w, r] : rc) {
      const auto c = cc.count(w) ? cc.at(w) : 0;
      ref_left[porter_stem(w)] += r - std::min(c, r);
    }
    for (const auto& [s, c] : cand_left) {
      const auto r = ref_left.count(s) ? ref_left.at(s) : 0;
      if (std::min(c, r) > 0) {
        stem_quota_[s] = std::min(c, r);
        stem_total_ += stem_quota_[s];
      }
    }
  }

  std::size_t exact_total() const { return exact_total_; }
  std::size_t stem_total() const { return stem_total_; }
  std::size_t total() const { return exact_total_ + stem_total_; }

  std::size_t min_chunks() {
    if (total() == 0) return 0;
    align_.assign(cand_.size(), kNone);
    std::size_t best = greedy_chunks();
    if (total() <= kMeteorExhaustiveMax) {
      best_ = best;
      ref_used_.assign(ref_.size(), false);
      align_.assign(cand_.size(), kNone);
      exact_used_.clear();
      stem_used_.clear();
      search(0, 0, 0);
      best = best_;
    }
    return best;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  static std::size_t quota(const std::map<std::string, std::size_t>& q, const std::string& k) {
    const auto it = q.find(k);
    return it == q.end() ? 0 : it->second;
  }

  bool exact_ok(std::size_t i, std::size_t j) const {
    if (cand_[i] != ref_[j]) return false;
    return quota(exact_used_, cand_[i]) < quota(exact_quota_, cand_[i]);
  }

  bool stem_ok(std::size_t i, std::size_t j) const {
    if (cand_[i] == ref_[j] || cand_stem_[i] != ref_stem_[j]) return false;
    return quota(stem_used_, cand_stem_[i]) < quota(stem_quota_, cand_stem_[i]);
  }

  static std::size_t chunks_of(const std::vector<std::size_t>& align) {
    std::size_t chunks = 0;
    std::size_t prev_i = kNone, prev_j = kNone;
    for (std::size_t i = 0; i < align.size(); ++i) {
      if (align[i] == kNone) continue;
      if (prev_i == kNone || prev_i + 1 != i || prev_j + 1 != align[i]) ++chunks;
      prev_i = i;
      prev_j = align[i];
    }
    return chunks;
  }

  // Stage by stage, left to right; each word prefers the reference position
  // that extends the current chunk, else the first free one.
  std::size_t greedy_chunks() {
    ref_used_.assign(ref_.size(), false);
    exact_used_.clear();
    stem_used_.clear();
    for (int stage = 0; stage < 2; ++stage) {
      for (std::size_t i = 0; i < cand_.size(); ++i) {
        if (align_[i] != kNone) continue;
        auto ok = [&](std::size_t j) { return !ref_used_[j] && (stage == 0 ? exact_ok(i, j) : stem_ok(i, j)); };
        std::size_t pick = kNone;
        if (i > 0 && align_[i - 1] != kNone && align_[i - 1] + 1 < ref_.size() && ok(align_[i - 1] + 1)) {
          pick = align_[i - 1] + 1;
        } else {
          for (std::size_t j = 0; j < ref_.size() && pick == kNone; ++j) {
            if (ok(j)) pick = j;
          }
        }
        if (pick == kNone) continue;
        take(i, pick, stage == 0);
      }
    }
    return chunks_of(align_);
  }

  void take(std::size_t i, std::size_t j, bool exact) {
    align_[i] = j;
    ref_used_[j] = true;
    if (exact) {
      ++exact_used_[cand_[i]];
    } else {
      ++stem_used_[cand_stem_[i]];
    }
  }

  void release(std::size_t i, std::size_t j, bool exact) {
    align_[i] = kNone;
    ref_used_[j] = false;
    if (exact) {
      --exact_used_[cand_[i]];
    } else {
      --stem_used_[cand_stem_[i]];
    }
  }

  // Branch and bound over the position of candidate word i. Chunks only
  // grow as words are added, so a partial count at or above the best
  // complete one is pruned.
  void search(std::size_t i, std::size_t matched, std::size_t chunks) {
    if (chunks >= best_) return;
    if (matched + (cand_.size() - i) < total()) return;
    if (i == cand_.size()) {
      best_ = chunks;
      return;
    }
    std::size_t prev_j = kNone;
    if (i > 0 && align_[i - 1] != kNone) prev_j = align_[i - 1];

    auto try_pair = [&](std::size_t j, bool exact) {
      const bool extends = prev_j != kNone && prev_j + 1 == j;
      take(i, j, exact);
      search(i + 1, matched + 1, chunks + (extends ? 0 : 1));
      release(i, j, exact);
    };
    if (prev_j != kNone && prev_j + 1 < ref_.size() && !ref_used_[prev_j + 1]) {
      if (exact_ok(i, prev_j + 1)) try_pair(prev_j + 1, true);
      if (stem_ok(i, prev_j + 1)) try_pair(prev_j + 1, false);
    }
    for (std::size_t j = 0; j < ref_.size(); ++j) {
      if (ref_used_[j] || (prev_j != kNone && j == prev_j + 1)) continue;
      if (exact_ok(i, j)) try_pair(j, true);
      if (stem_ok(i, j)) try_pair(j, false);
    }
    search(i + 1, matched, chunks);
  }

  const Tokens& cand_;
  const Tokens& ref_;
  std::vector<std::string> cand_stem_, ref_stem_;
  std::map<std::string, std::size_t> exact_quota_, stem_quota_;
  std::size_t exact_total_ = 0, stem_total_ = 0;

  std::vector<std::size_t> align_;
  std::vector<bool> ref_used_;
  std::map<std::string, std::size_t> exact_used_, stem_used_;
  std::size_t best_ = 0;
};

}  // namespace detail

inline MeteorDetail meteor_detail(const Tokens& cand, const Tokens& ref) {
  MeteorDetail d;
  detail::MeteorAligner aligner(cand, ref);
  d.exact_matches = aligner.exact_total();
  d.stem_matches = aligner.stem_total();
  d.matches = aligner.total();
  if (d.matches == 0) return d;
  d.chunks = aligner.min_chunks();
  const auto m = static_cast<double>(d.matches);
  d.precision = m / static_cast<double>(cand.size());
  d.recall = m / static_cast<double>(ref.size());
  d.fmean = 10.0 * d.precision * d.recall / (d.recall + 9.0 * d.precision);
  d.penalty = 0.5 * std::pow(static_cast<double>(d.chunks) / m, 3.0);
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

// Best score over the references.
inline double meteor(const TokenizedPair& p) {
  double best = 0.0;
  for (const auto& ref : p.references) best = std::max(best, meteor_detail(p.candidate, ref).score);
  return best;
}

inline double meteor(const EvalPair& p) { return meteor(tokenize_pair(p)); }

}  // namespace vist::metrics
