#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace topiclens {

struct RawDocument {
  std::string id;
  std::string band;
  std::string album;
  std::string title;
  std::string text;
  // Optional release year; orders albums within a band when present.
  std::optional<int> year;
};

struct DroppedSpan {
  std::size_t offset = 0;  // byte offset into the raw text
  std::size_t length = 0;  // line length, excluding the newline
  std::string reason;      // the stoplist phrase that matched

  bool operator==(const DroppedSpan&) const = default;
};

struct CleanDocument {
  std::string id;
  std::string band;
  std::string album;
  std::string title;
  std::optional<int> year;
  std::string text;
  std::vector<DroppedSpan> dropped_spans;
};

// Case-insensitive phrases marking non-lyric lines (production credits etc).
class MetaStoplist {
 public:
  MetaStoplist() = default;
  explicit MetaStoplist(std::vector<std::string> phrases);

  const std::vector<std::string>& phrases() const noexcept { return phrases_; }
  bool empty() const noexcept { return phrases_.empty(); }

  // First phrase found in `line` on word boundaries, if any.
  std::optional<std::string_view> match(std::string_view line) const;

 private:
  std::vector<std::string> phrases_;  // lowercased, trimmed
};

// Reads a phrase list: UTF-8, one entry per line, '#' starts a comment,
// blank lines ignored. Entries are trimmed and lowercased.
std::vector<std::string> read_phrase_file(const std::filesystem::path& path);
std::vector<std::string> parse_phrase_list(std::istream& in);

// JSONL corpus: one object per line with string keys id, band, album, title, text
// and an optional integer "year". Throws DataError with the 1-based line number on
// malformed records and names the id on duplicates.
std::vector<RawDocument> load_corpus(const std::filesystem::path& path);
std::vector<RawDocument> parse_corpus(std::istream& in);
void write_corpus(std::ostream& out, const std::vector<RawDocument>& docs);

// Removes every line containing a stoplist phrase. Retained lines are kept
// byte-identical and rejoined with '\n'.
CleanDocument scrub_meta(const RawDocument& doc, const MetaStoplist& stoplist);

// Function-word ratio test. Zero tokens classify as non-English.
bool english_heuristic(const CleanDocument& doc, const std::unordered_set<std::string>& function_words,
                       double threshold);

constexpr double kDefaultEnglishThreshold = 0.15;

// Clean-document store, persisted as JSONL with the dropped-line count.
void write_clean_corpus(std::ostream& out, const std::vector<CleanDocument>& docs);
std::vector<CleanDocument> parse_clean_corpus(std::istream& in);

}  // namespace topiclens
