#include "topiclens/text.hpp"

#include <algorithm>

#include "topiclens/error.hpp"

namespace topiclens {

namespace {

bool is_ascii_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
char to_lower_ascii(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c); }

}  // namespace

StopwordList::StopwordList(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    if (w.empty()) throw DataError("stopword list: empty entry");
    std::string lower;
    lower.reserve(w.size());
    for (unsigned char c : w) lower.push_back(to_lower_ascii(c));
    words_.insert(std::move(lower));
  }
}

std::vector<std::string> tokenize(std::string_view text, std::size_t min_length) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && current.size() >= min_length) tokens.push_back(current);
    current.clear();
  };
  for (unsigned char c : text) {
    if (is_ascii_alpha(c)) {
      current.push_back(to_lower_ascii(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

TokenStream tokenize(std::string doc_id, std::string_view text, std::size_t min_length) {
  return {std::move(doc_id), tokenize(text, min_length)};
}

TokenStream remove_stopwords(const TokenStream& ts, const StopwordList& sw) {
  TokenStream out{ts.doc_id, {}};
  out.tokens.reserve(ts.tokens.size());
  std::copy_if(ts.tokens.begin(), ts.tokens.end(), std::back_inserter(out.tokens),
               [&](const std::string& t) { return !sw.contains(t); });
  return out;
}

TokenStream preprocess(std::string doc_id, std::string_view text, const StopwordList& sw,
                       const PipelineOptions& opts) {
  TokenStream ts = remove_stopwords(tokenize(std::move(doc_id), text, opts.min_token_length), sw);
  if (opts.stemming) {
    for (auto& t : ts.tokens) t = stem(t);
  }
  return ts;
}

}  // namespace topiclens
