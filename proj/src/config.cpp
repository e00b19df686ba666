#include "topiclens/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "topiclens/error.hpp"
#include "topiclens/rng.hpp"

namespace topiclens {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Drops a trailing '#' comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

ConfigValue parse_scalar_or_array(const std::string& raw, std::size_t line_no) {
  auto fail = [&](const std::string& why) -> UsageError {
    return UsageError("config line " + std::to_string(line_no) + ": " + why);
  };
  if (raw.empty()) throw fail("missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw fail("unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) {
        ++i;
        out.push_back(raw[i] == 'n' ? '\n' : raw[i] == 't' ? '\t' : raw[i]);
      } else {
        out.push_back(raw[i]);
      }
    }
    return out;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.front() == '[') {
    if (raw.back() != ']') throw fail("unterminated array");
    std::vector<double> values;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (end != item.c_str() + item.size()) throw fail("array entries must be numbers");
      values.push_back(v);
    }
    return values;
  }
  std::string num;
  for (char c : raw) {
    if (c != '_') num.push_back(c);
  }
  const bool integral = num.find_first_of(".eE") == std::string::npos;
  char* end = nullptr;
  if (integral) {
    const long long v = std::strtoll(num.c_str(), &end, 10);
    if (end == num.c_str() + num.size()) return static_cast<std::int64_t>(v);
  } else {
    const double v = std::strtod(num.c_str(), &end);
    if (end == num.c_str() + num.size()) return v;
  }
  throw fail("cannot parse value \"" + raw + "\"");
}

}  // namespace

ConfigTable parse_config_text(std::istream& in) {
  ConfigTable table;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw UsageError("config line " + std::to_string(line_no) + ": malformed section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.contains(full)) throw UsageError("config line " + std::to_string(line_no) + ": duplicate key " + full);
    table[full] = parse_scalar_or_array(trim(std::string_view(s).substr(eq + 1)), line_no);
  }
  return table;
}

namespace {

class Reader {
 public:
  explicit Reader(const ConfigTable& t) : table_(t) {}

  template <typename F>
  void get(const std::string& key, F&& assign) {
    auto it = table_.find(key);
    if (it == table_.end()) return;
    used_.insert(key);
    assign(it->second, key);
  }

  void check_unused() const {
    for (const auto& [key, value] : table_) {
      if (!used_.contains(key)) throw UsageError("config: unknown key \"" + key + "\"");
    }
  }

 private:
  const ConfigTable& table_;
  std::set<std::string> used_;
};

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  throw UsageError("config: \"" + key + "\" must be " + expected);
}

std::string as_string(const ConfigValue& v, const std::string& key) {
  if (auto p = std::get_if<std::string>(&v)) return *p;
  type_error(key, "a string");
}

std::int64_t as_int(const ConfigValue& v, const std::string& key) {
  if (auto p = std::get_if<std::int64_t>(&v)) return *p;
  type_error(key, "an integer");
}

double as_double(const ConfigValue& v, const std::string& key) {
  if (auto p = std::get_if<double>(&v)) return *p;
  if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
  type_error(key, "a number");
}

bool as_bool(const ConfigValue& v, const std::string& key) {
  if (auto p = std::get_if<bool>(&v)) return *p;
  type_error(key, "true or false");
}

std::size_t as_count(const ConfigValue& v, const std::string& key) {
  const auto n = as_int(v, key);
  if (n < 0) type_error(key, "non-negative");
  return static_cast<std::size_t>(n);
}

}  // namespace

PipelineConfig config_from_table(const ConfigTable& table, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  Reader r(table);
  auto path_of = [&](std::filesystem::path& target) {
    return [&target, &base_dir](const ConfigValue& v, const std::string& key) {
      std::filesystem::path p = as_string(v, key);
      target = p.is_absolute() ? p : (base_dir / p).lexically_normal();
    };
  };
  c.output_dir = (base_dir / "out").lexically_normal();
  r.get("paths.corpus", path_of(c.corpus));
  r.get("paths.stopwords", path_of(c.stopwords));
  r.get("paths.meta_stoplist", path_of(c.meta_stoplist));
  r.get("paths.function_words", path_of(c.function_words));
  r.get("paths.features", path_of(c.features));
  r.get("paths.output_dir", path_of(c.output_dir));
  r.get("seed", [&](const ConfigValue& v, const std::string& k) { c.seed = static_cast<std::uint64_t>(as_int(v, k)); });

  r.get("pipeline.min_token_length", [&](const ConfigValue& v, const std::string& k) { c.min_token_length = as_count(v, k); });
  r.get("pipeline.min_df", [&](const ConfigValue& v, const std::string& k) { c.min_df = as_int(v, k); });
  r.get("pipeline.max_df_fraction", [&](const ConfigValue& v, const std::string& k) { c.max_df_fraction = as_double(v, k); });
  r.get("pipeline.english_filter", [&](const ConfigValue& v, const std::string& k) { c.english_filter = as_bool(v, k); });
  r.get("pipeline.english_threshold", [&](const ConfigValue& v, const std::string& k) { c.english_threshold = as_double(v, k); });
  r.get("pipeline.stemming", [&](const ConfigValue& v, const std::string& k) { c.stemming = as_bool(v, k); });

  r.get("lda.k", [&](const ConfigValue& v, const std::string& k) { c.lda.num_topics = static_cast<int>(as_int(v, k)); });
  r.get("lda.alpha", [&](const ConfigValue& v, const std::string& k) { c.lda.alpha = as_double(v, k); });
  r.get("lda.beta", [&](const ConfigValue& v, const std::string& k) { c.lda.beta = as_double(v, k); });
  r.get("lda.iterations", [&](const ConfigValue& v, const std::string& k) { c.lda.iterations = static_cast<int>(as_int(v, k)); });
  r.get("lda.burn_in", [&](const ConfigValue& v, const std::string& k) { c.lda.burn_in = static_cast<int>(as_int(v, k)); });
  r.get("lda.thin", [&](const ConfigValue& v, const std::string& k) { c.lda.thin = static_cast<int>(as_int(v, k)); });
  r.get("lda.workers", [&](const ConfigValue& v, const std::string& k) { c.lda.workers = static_cast<int>(as_int(v, k)); });

  r.get("eval.k_grid", [&](const ConfigValue& v, const std::string& k) {
    auto p = std::get_if<std::vector<double>>(&v);
    if (!p) type_error(k, "an array of integers");
    c.k_grid.clear();
    for (double x : *p) {
      if (x != static_cast<double>(static_cast<int>(x))) type_error(k, "an array of integers");
      c.k_grid.push_back(static_cast<int>(x));
    }
  });
  r.get("eval.test_fraction", [&](const ConfigValue& v, const std::string& k) { c.test_fraction = as_double(v, k); });
  r.get("eval.top_m", [&](const ConfigValue& v, const std::string& k) { c.top_m = as_count(v, k); });
  r.get("eval.fold_in_sweeps", [&](const ConfigValue& v, const std::string& k) { c.fold_in_sweeps = static_cast<int>(as_int(v, k)); });

  r.get("topic_space.lambda", [&](const ConfigValue& v, const std::string& k) { c.lambda = as_double(v, k); });
  r.get("topic_space.top_r", [&](const ConfigValue& v, const std::string& k) { c.top_r = as_count(v, k); });
  r.get("topic_space.group_level", [&](const ConfigValue& v, const std::string& k) {
    const auto s = as_string(v, k);
    if (s == "band") {
      c.group_level = GroupLevel::band;
    } else if (s == "album") {
      c.group_level = GroupLevel::album;
    } else {
      type_error(k, "\"band\" or \"album\"");
    }
  });

  r.get("correlate.sample", [&](const ConfigValue& v, const std::string& k) { c.sample = as_count(v, k); });
  r.get("correlate.alpha", [&](const ConfigValue& v, const std::string& k) { c.alpha = as_double(v, k); });
  r.get("correlate.permutations", [&](const ConfigValue& v, const std::string& k) { c.permutations = as_count(v, k); });
  r.get("correlate.p_method", [&](const ConfigValue& v, const std::string& k) {
    c.p_method = as_string(v, k);
    if (c.p_method != "t" && c.p_method != "permutation") type_error(k, "\"t\" or \"permutation\"");
  });
  r.check_unused();

  if (c.min_token_length < 1) throw UsageError("config: pipeline.min_token_length must be >= 1");
  if (c.min_df < 1) throw UsageError("config: pipeline.min_df must be >= 1");
  if (!(c.max_df_fraction > 0.0 && c.max_df_fraction <= 1.0)) throw UsageError("config: pipeline.max_df_fraction must lie in (0, 1]");
  if (!(c.english_threshold >= 0.0 && c.english_threshold <= 1.0)) throw UsageError("config: pipeline.english_threshold must lie in [0, 1]");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw UsageError("config: eval.test_fraction must lie in (0, 1)");
  if (c.top_m < 2) throw UsageError("config: eval.top_m must be >= 2");
  if (c.fold_in_sweeps < 1) throw UsageError("config: eval.fold_in_sweeps must be >= 1");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw UsageError("config: topic_space.lambda must lie in [0, 1]");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("config: correlate.alpha must lie in (0, 1)");
  if (c.k_grid.empty()) throw UsageError("config: eval.k_grid must not be empty");
  c.base_dir = base_dir;
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  const auto table = parse_config_text(in);
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return config_from_table(table, base);
}

std::uint64_t PipelineConfig::lda_seed() const { return derive_seed(seed, "lda"); }
std::uint64_t PipelineConfig::sample_seed() const { return derive_seed(seed, "sample"); }

std::string PipelineConfig::canonical() const {
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  auto rel = [&](const std::filesystem::path& p) {
    if (p.empty()) return std::string("\"\"");
    return nlohmann::json(p.lexically_relative(base_dir).generic_string()).dump();
  };
  std::ostringstream s;
  s << "correlate.alpha = " << num(alpha) << '\n'
    << "correlate.p_method = " << nlohmann::json(p_method).dump() << '\n'
    << "correlate.permutations = " << permutations << '\n'
    << "correlate.sample = " << sample << '\n';
  s << "eval.fold_in_sweeps = " << fold_in_sweeps << '\n' << "eval.k_grid = [";
  for (std::size_t i = 0; i < k_grid.size(); ++i) s << (i ? ", " : "") << k_grid[i];
  s << "]\n"
    << "eval.test_fraction = " << num(test_fraction) << '\n'
    << "eval.top_m = " << top_m << '\n';
  s << "lda.alpha = " << num(lda.alpha) << '\n'
    << "lda.beta = " << num(lda.beta) << '\n'
    << "lda.burn_in = " << lda.burn_in << '\n'
    << "lda.iterations = " << lda.iterations << '\n'
    << "lda.k = " << lda.num_topics << '\n'
    << "lda.thin = " << lda.thin << '\n'
    << "lda.workers = " << lda.workers << '\n';
  s << "paths.corpus = " << rel(corpus) << '\n'
    << "paths.features = " << rel(features) << '\n'
    << "paths.function_words = " << rel(function_words) << '\n'
    << "paths.meta_stoplist = " << rel(meta_stoplist) << '\n'
    << "paths.stopwords = " << rel(stopwords) << '\n';
  s << "pipeline.english_filter = " << (english_filter ? "true" : "false") << '\n'
    << "pipeline.english_threshold = " << num(english_threshold) << '\n'
    << "pipeline.max_df_fraction = " << num(max_df_fraction) << '\n'
    << "pipeline.min_df = " << min_df << '\n'
    << "pipeline.min_token_length = " << min_token_length << '\n'
    << "pipeline.stemming = " << (stemming ? "true" : "false") << '\n';
  s << "seed = " << seed << '\n';
  s << "topic_space.group_level = " << (group_level == GroupLevel::band ? "\"band\"" : "\"album\"") << '\n'
    << "topic_space.lambda = " << num(lambda) << '\n'
    << "topic_space.top_r = " << top_r << '\n';
  return s.str();
}

std::uint64_t PipelineConfig::hash() const { return fnv1a(canonical()); }

std::string PipelineConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

}  // namespace topiclens
