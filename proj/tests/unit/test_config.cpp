#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "common.hpp"
#include "topiclens/config.hpp"
#include "topiclens/error.hpp"

using namespace topiclens;

namespace {

ConfigTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config_text(in);
}

PipelineConfig from(const std::string& text, const std::filesystem::path& base = "/base") {
  return config_from_table(parse(text), base);
}

}  // namespace

TEST_CASE("config parser value types") {
  const auto t = parse(
      "# comment\n"
      "seed = 7\n"
      "[paths]\n"
      "corpus = \"songs.jsonl\"  # trailing\n"
      "[lda]\n"
      "beta = 0.05\n"
      "[eval]\n"
      "k_grid = [10, 20, 30]\n"
      "[pipeline]\n"
      "stemming = false\n");
  CHECK(std::get<std::int64_t>(t.at("seed")) == 7);
  CHECK(std::get<std::string>(t.at("paths.corpus")) == "songs.jsonl");
  CHECK(std::get<double>(t.at("lda.beta")) == 0.05);
  CHECK(std::get<std::vector<double>>(t.at("eval.k_grid")) == std::vector<double>{10, 20, 30});
  CHECK(std::get<bool>(t.at("pipeline.stemming")) == false);
}

TEST_CASE("config parser errors") {
  CHECK_THROWS_AS(parse("seed\n"), UsageError);
  CHECK_THROWS_AS(parse("[lda\n"), UsageError);
  CHECK_THROWS_AS(parse("seed = \n"), UsageError);
  CHECK_THROWS_AS(parse("a = \"open\n"), UsageError);
  CHECK_THROWS_AS(parse("a = [1, x]\n"), UsageError);
  CHECK_THROWS_AS(parse("seed = 1\nseed = 2\n"), UsageError);
  CHECK_THROWS_AS(parse("a = what\n"), UsageError);
}

TEST_CASE("pipeline config defaults") {
  const auto c = from("");
  CHECK(c.lda.num_topics == 20);
  CHECK(c.lda.beta == 0.01);
  CHECK(c.lda.effective_alpha() == 2.5);
  CHECK(c.lda.iterations == 1000);
  CHECK(c.lda.burn_in == 500);
  CHECK(c.lda.thin == 10);
  CHECK(c.min_df == 5);
  CHECK(c.max_df_fraction == 0.5);
  CHECK(c.min_token_length == 2);
  CHECK_FALSE(c.english_filter);
  CHECK(c.english_threshold == 0.15);
  CHECK(c.test_fraction == 0.1);
  CHECK(c.top_m == 10);
  CHECK(c.lambda == 0.6);
  CHECK(c.alpha == 0.05);
  CHECK(c.p_method == "t");
  CHECK(c.permutations == 10000);
  CHECK(c.k_grid.size() == 10);
  CHECK(c.output_dir == std::filesystem::path("/base/out"));
}

TEST_CASE("pipeline config values and validation") {
  const auto c = from(
      "seed = 11\n[paths]\ncorpus = \"data/c.jsonl\"\nfeatures = \"/abs/f.csv\"\n"
      "[lda]\nk = 7\nworkers = 2\n[topic_space]\ngroup_level = \"band\"\n[correlate]\nsample = 503\n");
  CHECK(c.seed == 11);
  CHECK(c.corpus == std::filesystem::path("/base/data/c.jsonl"));
  CHECK(c.features == std::filesystem::path("/abs/f.csv"));
  CHECK(c.lda.num_topics == 7);
  CHECK(c.lda.workers == 2);
  CHECK(c.group_level == GroupLevel::band);
  CHECK(c.sample == 503);

  CHECK_THROWS_AS(from("[lda]\nkk = 3\n"), UsageError);
  CHECK_THROWS_AS(from("[lda]\nk = \"three\"\n"), UsageError);
  CHECK_THROWS_AS(from("[topic_space]\ngroup_level = \"song\"\n"), UsageError);
  CHECK_THROWS_AS(from("[topic_space]\nlambda = 2.0\n"), UsageError);
  CHECK_THROWS_AS(from("[pipeline]\nmax_df_fraction = 0\n"), UsageError);
  CHECK_THROWS_AS(from("[eval]\nk_grid = []\n"), UsageError);
  CHECK_THROWS_AS(from("[correlate]\np_method = \"exact\"\n"), UsageError);
}

TEST_CASE("config hash and derived seeds") {
  const auto a = from("seed = 1\n[lda]\nk = 5\n");
  const auto b = from("# same\nseed   =   1\n\n[lda]\nk = 5 # five\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash_hex().size() == 16);
  CHECK(from("seed = 2\n[lda]\nk = 5\n").hash() != a.hash());
  CHECK(from("seed = 1\n[lda]\nk = 6\n").hash() != a.hash());
  // Relative paths hash the same wherever the project lives.
  CHECK(from("[paths]\ncorpus = \"c.jsonl\"\n", "/x").hash() == from("[paths]\ncorpus = \"c.jsonl\"\n", "/y").hash());
  CHECK(from("[paths]\noutput_dir = \"o1\"\n").hash() == from("[paths]\noutput_dir = \"o2\"\n").hash());
  CHECK(a.lda_seed() != a.sample_seed());
  CHECK(a.lda_seed() == b.lda_seed());
  CHECK(from("seed = 2\n").lda_seed() != a.lda_seed());
}

TEST_CASE("load_config resolves paths against the file") {
  testutil::TempDir dir("config");
  std::filesystem::create_directories(dir / "sub");
  {
    std::ofstream out(dir / "sub" / "p.toml");
    out << "[paths]\ncorpus = \"../c.jsonl\"\n";
  }
  const auto c = load_config(dir / "sub" / "p.toml");
  CHECK(c.corpus.lexically_normal() == (dir / "c.jsonl").lexically_normal());
  CHECK_THROWS_AS(load_config(dir / "missing.toml"), UsageError);
}

TEST_CASE("shipped fixture config loads") {
  const auto c = load_config(testutil::shipped_data("fixture/topiclens.toml"));
  CHECK(std::filesystem::exists(c.corpus));
  CHECK(std::filesystem::exists(c.stopwords));
  CHECK(std::filesystem::exists(c.meta_stoplist));
  CHECK(std::filesystem::exists(c.features));
}
