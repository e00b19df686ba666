// Porter suffix stripping with the common extensions: y->i only after a
// consonant that is not the first letter, a small irregular-forms table, the
// "ies"/"ied" short-word cases, and the -fulli / -logi step-2 rules.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "topiclens/text.hpp"

namespace topiclens {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 16> kIrregular{{
    {"sky", "sky"},         {"skies", "sky"},        {"dying", "die"},     {"lying", "lie"},
    {"tying", "tie"},       {"news", "news"},        {"innings", "inning"}, {"inning", "inning"},
    {"outings", "outing"},  {"outing", "outing"},    {"cannings", "canning"}, {"canning", "canning"},
    {"howe", "howe"},       {"proceed", "proceed"},  {"exceed", "exceed"}, {"succeed", "succeed"},
}};

bool is_vowel_letter(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// y is a consonant at the start of a word or after a vowel.
bool is_consonant(std::string_view w, std::size_t i) {
  if (is_vowel_letter(w[i])) return false;
  if (w[i] == 'y') return i == 0 ? true : !is_consonant(w, i - 1);
  return true;
}

std::vector<bool> consonant_flags(std::string_view w) {
  std::vector<bool> flags(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel_letter(w[i])) {
      flags[i] = false;
    } else if (w[i] == 'y') {
      flags[i] = i == 0 ? true : !flags[i - 1];
    } else {
      flags[i] = true;
    }
  }
  return flags;
}

// m in [C](VC){m}[V]
int measure(std::string_view stem) {
  const auto flags = consonant_flags(stem);
  int m = 0;
  for (std::size_t i = 1; i < flags.size(); ++i) {
    if (!flags[i - 1] && flags[i]) ++m;
  }
  return m;
}

bool contains_vowel(std::string_view stem) {
  const auto flags = consonant_flags(stem);
  for (bool c : flags) {
    if (!c) return true;
  }
  return false;
}

bool ends_double_consonant(std::string_view w) {
  return w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2] && is_consonant(w, w.size() - 1);
}

// *o: stem ends consonant-vowel-consonant, last not w/x/y; also a two-letter
// vowel-consonant stem.
bool ends_cvc(std::string_view w) {
  const std::size_t n = w.size();
  if (n >= 3 && is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) && w[n - 1] != 'w' &&
      w[n - 1] != 'x' && w[n - 1] != 'y') {
    return true;
  }
  return n == 2 && !is_consonant(w, 0) && is_consonant(w, 1);
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

std::string_view drop(std::string_view w, std::size_t n) { return w.substr(0, w.size() - n); }

enum class Cond { none, m_gt0, m_gt1, vowel, step1c, ion, logi };

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  Cond cond;
};

bool holds(Cond c, std::string_view stem, std::string_view word) {
  switch (c) {
    case Cond::none: return true;
    case Cond::m_gt0: return measure(stem) > 0;
    case Cond::m_gt1: return measure(stem) > 1;
    case Cond::vowel: return contains_vowel(stem);
    case Cond::step1c: return stem.size() > 1 && is_consonant(stem, stem.size() - 1);
    case Cond::ion: return measure(stem) > 1 && !stem.empty() && (stem.back() == 's' || stem.back() == 't');
    case Cond::logi: return measure(drop(word, 3)) > 0;
  }
  return false;
}

// The first rule whose suffix matches decides; a failed condition leaves the word unchanged.
template <std::size_t N>
std::string apply_rules(std::string_view word, const std::array<Rule, N>& rules) {
  for (const auto& r : rules) {
    if (ends_with(word, r.suffix)) {
      const auto stem = drop(word, r.suffix.size());
      if (holds(r.cond, stem, word)) return std::string(stem) + std::string(r.replacement);
      return std::string(word);
    }
  }
  return std::string(word);
}

std::string step1a(std::string_view w) {
  if (ends_with(w, "ies") && w.size() == 4) return std::string(drop(w, 3)) + "ie";
  static constexpr std::array<Rule, 4> rules{{
      {"sses", "ss", Cond::none}, {"ies", "i", Cond::none}, {"ss", "ss", Cond::none}, {"s", "", Cond::none}}};
  return apply_rules(w, rules);
}

std::string step1b(std::string_view w) {
  if (ends_with(w, "ied")) return std::string(drop(w, 3)) + (w.size() == 4 ? "ie" : "i");
  if (ends_with(w, "eed")) {
    const auto stem = drop(w, 3);
    return measure(stem) > 0 ? std::string(stem) + "ee" : std::string(w);
  }
  std::optional<std::string_view> stem;
  for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (ends_with(w, suffix) && contains_vowel(drop(w, suffix.size()))) {
      stem = drop(w, suffix.size());
      break;
    }
  }
  if (!stem) return std::string(w);
  const std::string_view s = *stem;
  if (ends_with(s, "at") || ends_with(s, "bl") || ends_with(s, "iz")) return std::string(s) + "e";
  if (ends_double_consonant(s)) {
    const char last = s.back();
    if (last != 'l' && last != 's' && last != 'z') return std::string(drop(s, 1));
    return std::string(s);
  }
  if (measure(s) == 1 && ends_cvc(s)) return std::string(s) + "e";
  return std::string(s);
}

std::string step1c(std::string_view w) {
  static constexpr std::array<Rule, 1> rules{{{"y", "i", Cond::step1c}}};
  return apply_rules(w, rules);
}

std::string step2(std::string_view w) {
  if (ends_with(w, "alli") && measure(drop(w, 4)) > 0) return step2(std::string(drop(w, 4)) + "al");
  static constexpr std::array<Rule, 22> rules{{
      {"ational", "ate", Cond::m_gt0}, {"tional", "tion", Cond::m_gt0}, {"enci", "ence", Cond::m_gt0},
      {"anci", "ance", Cond::m_gt0},   {"izer", "ize", Cond::m_gt0},    {"bli", "ble", Cond::m_gt0},
      {"alli", "al", Cond::m_gt0},     {"entli", "ent", Cond::m_gt0},   {"eli", "e", Cond::m_gt0},
      {"ousli", "ous", Cond::m_gt0},   {"ization", "ize", Cond::m_gt0}, {"ation", "ate", Cond::m_gt0},
      {"ator", "ate", Cond::m_gt0},    {"alism", "al", Cond::m_gt0},    {"iveness", "ive", Cond::m_gt0},
      {"fulness", "ful", Cond::m_gt0}, {"ousness", "ous", Cond::m_gt0}, {"aliti", "al", Cond::m_gt0},
      {"iviti", "ive", Cond::m_gt0},   {"biliti", "ble", Cond::m_gt0},  {"fulli", "ful", Cond::m_gt0},
      {"logi", "log", Cond::logi},
  }};
  return apply_rules(w, rules);
}

std::string step3(std::string_view w) {
  static constexpr std::array<Rule, 7> rules{{
      {"icate", "ic", Cond::m_gt0}, {"ative", "", Cond::m_gt0}, {"alize", "al", Cond::m_gt0},
      {"iciti", "ic", Cond::m_gt0}, {"ical", "ic", Cond::m_gt0}, {"ful", "", Cond::m_gt0},
      {"ness", "", Cond::m_gt0},
  }};
  return apply_rules(w, rules);
}

std::string step4(std::string_view w) {
  static constexpr std::array<Rule, 19> rules{{
      {"al", "", Cond::m_gt1},    {"ance", "", Cond::m_gt1}, {"ence", "", Cond::m_gt1}, {"er", "", Cond::m_gt1},
      {"ic", "", Cond::m_gt1},    {"able", "", Cond::m_gt1}, {"ible", "", Cond::m_gt1}, {"ant", "", Cond::m_gt1},
      {"ement", "", Cond::m_gt1}, {"ment", "", Cond::m_gt1}, {"ent", "", Cond::m_gt1},  {"ion", "", Cond::ion},
      {"ou", "", Cond::m_gt1},    {"ism", "", Cond::m_gt1},  {"ate", "", Cond::m_gt1},  {"iti", "", Cond::m_gt1},
      {"ous", "", Cond::m_gt1},   {"ive", "", Cond::m_gt1},  {"ize", "", Cond::m_gt1},
  }};
  return apply_rules(w, rules);
}

std::string step5a(std::string_view w) {
  if (ends_with(w, "e")) {
    const auto stem = drop(w, 1);
    const int m = measure(stem);
    if (m > 1 || (m == 1 && !ends_cvc(stem))) return std::string(stem);
  }
  return std::string(w);
}

std::string step5b(std::string_view w) {
  if (ends_with(w, "ll") && measure(drop(w, 1)) > 1) return std::string(drop(w, 1));
  return std::string(w);
}

}  // namespace

std::string stem(std::string_view token) {
  std::string w;
  w.reserve(token.size());
  for (unsigned char c : token) w.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
  for (const auto& [form, base] : kIrregular) {
    if (w == form) return std::string(base);
  }
  if (w.size() <= 2) return w;
  w = step1a(w);
  w = step1b(w);
  w = step1c(w);
  w = step2(w);
  w = step3(w);
  w = step4(w);
  w = step5a(w);
  w = step5b(w);
  return w;
}

}  // namespace topiclens
