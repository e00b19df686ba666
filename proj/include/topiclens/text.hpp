#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace topiclens {

struct TokenStream {
  std::string doc_id;
  std::vector<std::string> tokens;

  bool operator==(const TokenStream&) const = default;
};

class StopwordList {
 public:
  StopwordList() = default;
  // Entries are lowercased; empty entries are rejected.
  explicit StopwordList(const std::vector<std::string>& words);

  bool contains(std::string_view w) const { return words_.contains(std::string(w)); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::unordered_set<std::string>& words() const noexcept { return words_; }

 private:
  std::unordered_set<std::string> words_;
};

constexpr std::size_t kDefaultMinTokenLength = 2;

// Lowercases ASCII letters and splits on every other byte. Tokens shorter than
// `min_length` are dropped.
std::vector<std::string> tokenize(std::string_view text, std::size_t min_length = kDefaultMinTokenLength);
TokenStream tokenize(std::string doc_id, std::string_view text,
                     std::size_t min_length = kDefaultMinTokenLength);

TokenStream remove_stopwords(const TokenStream& ts, const StopwordList& sw);

// Porter suffix stripper, extended variant: y->i only after a consonant,
// an irregular-forms table, and the -fulli / -logi step-2 rules.
std::string stem(std::string_view token);

struct PipelineOptions {
  std::size_t min_token_length = kDefaultMinTokenLength;
  bool stemming = true;
};

// tokenize -> remove_stopwords -> stem
TokenStream preprocess(std::string doc_id, std::string_view text, const StopwordList& sw,
                       const PipelineOptions& opts = {});

}  // namespace topiclens
