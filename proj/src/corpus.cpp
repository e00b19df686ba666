#include "topiclens/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "topiclens/error.hpp"
#include "topiclens/text.hpp"

namespace topiclens {

namespace {

using nlohmann::json;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

std::string required_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw DataError("corpus line " + std::to_string(line_no) + ": missing field \"" + key + "\"");
  }
  if (!it->is_string()) {
    throw DataError("corpus line " + std::to_string(line_no) + ": field \"" + key + "\" is not a string");
  }
  return it->get<std::string>();
}

}  // namespace

MetaStoplist::MetaStoplist(std::vector<std::string> phrases) {
  phrases_.reserve(phrases.size());
  for (const auto& p : phrases) {
    auto t = trim(p);
    if (t.empty()) throw DataError("meta stoplist: empty phrase");
    phrases_.push_back(lowercase(t));
  }
}

std::optional<std::string_view> MetaStoplist::match(std::string_view line) const {
  if (phrases_.empty()) return std::nullopt;
  const std::string lower = lowercase(line);
  for (const auto& phrase : phrases_) {
    std::size_t pos = 0;
    while ((pos = lower.find(phrase, pos)) != std::string::npos) {
      const bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]);
      const std::size_t end = pos + phrase.size();
      const bool right_ok = end == lower.size() || !is_word_char(lower[end]);
      if (left_ok && right_ok) return std::string_view(phrase);
      ++pos;
    }
  }
  return std::nullopt;
}

std::vector<std::string> parse_phrase_list(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view v = line;
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (!v.empty()) out.push_back(lowercase(v));
  }
  return out;
}

std::vector<std::string> read_phrase_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open list file " + path.string());
  return parse_phrase_list(in);
}

std::vector<RawDocument> parse_corpus(std::istream& in) {
  std::vector<RawDocument> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("corpus line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw DataError("corpus line " + std::to_string(line_no) + ": record is not an object");
    RawDocument doc;
    doc.id = required_string(obj, "id", line_no);
    doc.band = required_string(obj, "band", line_no);
    doc.album = required_string(obj, "album", line_no);
    doc.title = required_string(obj, "title", line_no);
    doc.text = required_string(obj, "text", line_no);
    if (auto it = obj.find("year"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer()) {
        throw DataError("corpus line " + std::to_string(line_no) + ": field \"year\" is not an integer");
      }
      doc.year = it->get<int>();
    }
    if (doc.id.empty()) throw DataError("corpus line " + std::to_string(line_no) + ": empty id");
    if (!seen.insert(doc.id).second) {
      throw DataError("corpus line " + std::to_string(line_no) + ": duplicate id \"" + doc.id + "\"");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<RawDocument> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<RawDocument>& docs) {
  for (const auto& d : docs) {
    json obj = {{"id", d.id}, {"band", d.band}, {"album", d.album}, {"title", d.title}, {"text", d.text}};
    if (d.year) obj["year"] = *d.year;
    out << obj.dump() << '\n';
  }
}

CleanDocument scrub_meta(const RawDocument& doc, const MetaStoplist& stoplist) {
  CleanDocument clean{doc.id, doc.band, doc.album, doc.title, doc.year, {}, {}};
  if (stoplist.empty()) {
    clean.text = doc.text;
    return clean;
  }
  const std::string_view text = doc.text;
  std::size_t start = 0;
  bool first = true;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    const std::string_view line = text.substr(start, end - start);
    if (auto hit = stoplist.match(line)) {
      clean.dropped_spans.push_back({start, line.size(), std::string(*hit)});
    } else {
      if (!first) clean.text.push_back('\n');
      clean.text.append(line);
      first = false;
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return clean;
}

bool english_heuristic(const CleanDocument& doc, const std::unordered_set<std::string>& function_words,
                       double threshold) {
  if (function_words.empty()) throw UsageError("english heuristic: empty function-word list");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw UsageError("english heuristic: threshold outside [0, 1]");
  // Single-letter function words ("a", "i") count here.
  const auto tokens = tokenize(doc.text, 1);
  if (tokens.empty()) return false;
  const auto hits = std::count_if(tokens.begin(), tokens.end(),
                                  [&](const std::string& t) { return function_words.contains(t); });
  return static_cast<double>(hits) / static_cast<double>(tokens.size()) >= threshold;
}

void write_clean_corpus(std::ostream& out, const std::vector<CleanDocument>& docs) {
  for (const auto& d : docs) {
    json spans = json::array();
    for (const auto& s : d.dropped_spans) spans.push_back({{"offset", s.offset}, {"length", s.length}, {"reason", s.reason}});
    json obj = {{"id", d.id},     {"band", d.band}, {"album", d.album},
                {"title", d.title}, {"text", d.text}, {"dropped_spans", std::move(spans)}};
    if (d.year) obj["year"] = *d.year;
    out << obj.dump() << '\n';
  }
}

std::vector<CleanDocument> parse_clean_corpus(std::istream& in) {
  std::vector<CleanDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("document store line " + std::to_string(line_no) + ": malformed JSON");
    }
    CleanDocument d;
    d.id = required_string(obj, "id", line_no);
    d.band = required_string(obj, "band", line_no);
    d.album = required_string(obj, "album", line_no);
    d.title = required_string(obj, "title", line_no);
    d.text = required_string(obj, "text", line_no);
    if (auto it = obj.find("year"); it != obj.end() && it->is_number_integer()) d.year = it->get<int>();
    if (auto it = obj.find("dropped_spans"); it != obj.end()) {
      for (const auto& s : *it) {
        d.dropped_spans.push_back({s.at("offset").get<std::size_t>(), s.at("length").get<std::size_t>(),
                                   s.at("reason").get<std::string>()});
      }
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace topiclens
