#pragma once

#include <filesystem>
#include <fstream>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "topiclens/bow.hpp"
#include "topiclens/text.hpp"

namespace testutil {

inline std::filesystem::path test_data(const std::string& name) { return std::filesystem::path(TOPICLENS_TEST_DATA) / name; }
inline std::filesystem::path shipped_data(const std::string& name) { return std::filesystem::path(TOPICLENS_DATA) / name; }

inline std::vector<std::pair<std::string, std::string>> read_pairs(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("topiclens-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Tokens given directly as streams, e.g. {{"d1", {"a", "b"}}, ...}.
inline std::vector<topiclens::TokenStream> streams(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& docs) {
  std::vector<topiclens::TokenStream> out;
  for (const auto& [id, toks] : docs) out.push_back({id, toks});
  return out;
}

// Vocabulary in the given term order with unit frequencies.
inline topiclens::Vocabulary vocab_of(const std::vector<std::string>& terms) {
  std::vector<topiclens::Vocabulary::Entry> e;
  for (const auto& t : terms) e.push_back({t, 1, 1});
  return topiclens::Vocabulary(std::move(e));
}

// Synthetic corpus with disjoint vocabulary blocks, one generating topic per block.
struct PlantedCorpus {
  topiclens::DocTermMatrix matrix;
  topiclens::Vocabulary vocab;
  std::vector<std::vector<double>> phi;  // K x V generating distributions
  std::vector<std::vector<double>> theta;
  std::vector<std::size_t> block_begin, block_end;
};

inline PlantedCorpus planted_corpus(std::size_t docs, const std::vector<std::size_t>& blocks, std::size_t doc_length,
                                    double doc_alpha, std::uint64_t seed) {
  PlantedCorpus pc;
  const std::size_t K = blocks.size();
  std::size_t V = 0;
  for (std::size_t b : blocks) {
    pc.block_begin.push_back(V);
    V += b;
    pc.block_end.push_back(V);
  }
  std::vector<std::string> terms;
  for (std::size_t v = 0; v < V; ++v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "w%03d", static_cast<int>(v));
    terms.emplace_back(buf);
  }
  pc.phi.assign(K, std::vector<double>(V, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t v = pc.block_begin[k]; v < pc.block_end[k]; ++v) pc.phi[k][v] = 1.0 / static_cast<double>(blocks[k]);
  }
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(doc_alpha, 1.0);
  std::vector<topiclens::TokenStream> ts;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<double> th(K);
    double s = 0.0;
    for (auto& x : th) s += (x = gamma(rng));
    for (auto& x : th) x /= s;
    pc.theta.push_back(th);
    std::discrete_distribution<std::size_t> pick_topic(th.begin(), th.end());
    topiclens::TokenStream doc{"doc-" + std::to_string(d), {}};
    for (std::size_t i = 0; i < doc_length; ++i) {
      const std::size_t k = pick_topic(rng);
      std::uniform_int_distribution<std::size_t> pick_word(pc.block_begin[k], pc.block_end[k] - 1);
      doc.tokens.push_back(terms[pick_word(rng)]);
    }
    ts.push_back(std::move(doc));
  }
  std::vector<std::int64_t> cf(V, 0), df(V, 0);
  for (const auto& doc : ts) {
    std::vector<char> seen(V, 0);
    for (const auto& t : doc.tokens) {
      const auto v = static_cast<std::size_t>(std::stoi(t.substr(1)));
      ++cf[v];
      if (!seen[v]) {
        seen[v] = 1;
        ++df[v];
      }
    }
  }
  std::vector<topiclens::Vocabulary::Entry> entries;
  for (std::size_t v = 0; v < V; ++v) entries.push_back({terms[v], df[v], cf[v]});
  pc.vocab = topiclens::Vocabulary(std::move(entries));
  pc.matrix = topiclens::vectorize(ts, pc.vocab);
  return pc;
}

}  // namespace testutil
