#pragma once

#include <string>
#include <string_view>

namespace vist::metrics {

// Porter (1980) suffix stripper for lowercase ASCII words. Follows the
// original rule set; like the reference C implementation, words of one or
// two letters are returned unchanged.
class PorterStemmer {
 public:
  std::string operator()(std::string_view word) const {
    std::string w(word);
    if (w.size() <= 2) return w;
    step1a(w);
    step1b(w);
    step1c(w);
    step2(w);
    step3(w);
    step4(w);
    step5(w);
    return w;
  }

 private:
  static bool consonant(const std::string& w, std::size_t i) {
    switch (w[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 || !consonant(w, i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in w[0, len).
  static int measure(const std::string& w, std::size_t len) {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(w, i)) ++i;
    while (i < len) {
      while (i < len && !consonant(w, i)) ++i;
      if (i >= len) break;
      while (i < len && consonant(w, i)) ++i;
      ++m;
    }
    return m;
  }

  static bool has_vowel(const std::string& w, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      if (!consonant(w, i)) return true;
    }
    return false;
  }

  static bool double_consonant(const std::string& w, std::size_t len) {
    return len >= 2 && w[len - 1] == w[len - 2] && consonant(w, len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, last not w, x or y.
  static bool cvc(const std::string& w, std::size_t len) {
    if (len < 3) return false;
    if (!consonant(w, len - 3) || consonant(w, len - 2) || !consonant(w, len - 1)) return false;
    const char c = w[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  static bool ends(const std::string& w, std::string_view s) {
    return w.size() >= s.size() && std::string_view(w).substr(w.size() - s.size()) == s;
  }

  static std::size_t stem_len(const std::string& w, std::string_view suffix) { return w.size() - suffix.size(); }

  static void replace(std::string& w, std::string_view suffix, std::string_view with) {
    w.replace(w.size() - suffix.size(), suffix.size(), with);
  }

  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };

  // Applies the first rule whose suffix matches, if the stem before it has
  // measure > min_m. Rule lists are ordered so the longest suffix wins.
  template <std::size_t N>
  static void apply_longest(std::string& w, const Rule (&rules)[N], int min_m) {
    for (const auto& r : rules) {
      if (ends(w, r.suffix)) {
        if (measure(w, stem_len(w, r.suffix)) > min_m) replace(w, r.suffix, r.replacement);
        return;
      }
    }
  }

  static void step1a(std::string& w) {
    if (ends(w, "sses")) {
      replace(w, "sses", "ss");
    } else if (ends(w, "ies")) {
      replace(w, "ies", "i");
    } else if (ends(w, "ss")) {
      // unchanged
    } else if (ends(w, "s")) {
      w.pop_back();
    }
  }

  static void step1b(std::string& w) {
    if (ends(w, "eed")) {
      if (measure(w, stem_len(w, "eed")) > 0) w.pop_back();
      return;
    }
    std::string_view cut;
    if (ends(w, "ed") && has_vowel(w, stem_len(w, "ed"))) {
      cut = "ed";
    } else if (ends(w, "ing") && has_vowel(w, stem_len(w, "ing"))) {
      cut = "ing";
    } else {
      return;
    }
    w.resize(stem_len(w, cut));
    if (ends(w, "at") || ends(w, "bl") || ends(w, "iz")) {
      w += 'e';
    } else if (double_consonant(w, w.size())) {
      const char c = w.back();
      if (c != 'l' && c != 's' && c != 'z') w.pop_back();
    } else if (measure(w, w.size()) == 1 && cvc(w, w.size())) {
      w += 'e';
    }
  }

  static void step1c(std::string& w) {
    if (ends(w, "y") && has_vowel(w, w.size() - 1)) w.back() = 'i';
  }

  static void step2(std::string& w) {
    static constexpr Rule rules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},  {"izer", "ize"},
        {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},      {"ousli", "ous"},
        {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},    {"alism", "al"},   {"iveness", "ive"},
        {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"},
    };
    // Suffixes here never nest except ation/ization and tional/ational,
    // where the longer one is listed first.
    apply_longest(w, rules, 0);
  }

  static void step3(std::string& w) {
    static constexpr Rule rules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""}, {"ness", ""},
    };
    apply_longest(w, rules, 0);
  }

  static void step4(std::string& w) {
    static constexpr std::string_view suffixes[] = {
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
    };
    std::string_view best;
    for (const auto s : suffixes) {
      if (ends(w, s) && s.size() > best.size()) best = s;
    }
    if (best.empty()) return;
    const std::size_t len = stem_len(w, best);
    if (measure(w, len) <= 1) return;
    if (best == "ion" && !(len > 0 && (w[len - 1] == 's' || w[len - 1] == 't'))) return;
    w.resize(len);
  }

  static void step5(std::string& w) {
    if (ends(w, "e")) {
      const std::size_t len = w.size() - 1;
      const int m = measure(w, len);
      if (m > 1 || (m == 1 && !cvc(w, len))) w.pop_back();
    }
    if (ends(w, "ll") && measure(w, w.size()) > 1) w.pop_back();
  }
};

inline std::string porter_stem(std::string_view word) { return PorterStemmer{}(word); }

}  // namespace vist::metrics
