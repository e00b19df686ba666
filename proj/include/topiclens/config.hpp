#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "topiclens/assoc.hpp"
#include "topiclens/lda.hpp"
#include "topiclens/topic_space.hpp"

namespace topiclens {

// Subset of TOML: [section] headers, key = value, '#' comments. Values are
// double-quoted strings, integers, floats, booleans or flat arrays of numbers.
using ConfigValue = std::variant<std::string, std::int64_t, double, bool, std::vector<double>>;
using ConfigTable = std::map<std::string, ConfigValue>;  // keys are "section.key"

ConfigTable parse_config_text(std::istream& in);

struct PipelineConfig {
  // [paths], relative entries resolved against the config file's directory
  std::filesystem::path corpus;
  std::filesystem::path stopwords;
  std::filesystem::path meta_stoplist;
  std::filesystem::path function_words;
  std::filesystem::path features;
  std::filesystem::path output_dir = "out";

  std::uint64_t seed = 42;

  // [pipeline]
  std::size_t min_token_length = 2;
  std::int64_t min_df = 5;
  double max_df_fraction = 0.5;
  bool english_filter = false;
  double english_threshold = 0.15;
  bool stemming = true;

  // [lda]; lda.seed is derived from the top-level seed
  LdaConfig lda;

  // [eval]
  std::vector<int> k_grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  double test_fraction = 0.1;
  std::size_t top_m = 10;
  int fold_in_sweeps = 50;

  // [topic_space]
  double lambda = kDefaultLambda;
  std::size_t top_r = 30;
  GroupLevel group_level = GroupLevel::album;

  // [correlate]
  std::size_t sample = 0;
  double alpha = 0.05;
  std::string p_method = "t";  // "t" or "permutation"
  std::size_t permutations = kDefaultPermutations;

  std::filesystem::path base_dir = ".";

  std::uint64_t lda_seed() const;
  std::uint64_t sample_seed() const;

  // Canonical "key = value" dump; the config hash is FNV-1a over it. The output
  // directory is left out so relocated runs hash identically.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

// Throws UsageError on unknown keys, wrong value types or invalid ranges.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_table(const ConfigTable& table, const std::filesystem::path& base_dir);

}  // namespace topiclens
