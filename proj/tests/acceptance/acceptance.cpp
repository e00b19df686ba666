// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "common.hpp"
#include "oracles/t_dist.hpp"
#include "topiclens/assoc.hpp"
#include "topiclens/bow.hpp"
#include "topiclens/cli.hpp"
#include "topiclens/eval.hpp"
#include "topiclens/lda.hpp"
#include "topiclens/text.hpp"
#include "topiclens/topic_space.hpp"

using namespace topiclens;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and limits.
constexpr double kBonferroniExpected = 0.00125;
constexpr double kPlantedMaxMeanTv = 0.10;
constexpr double kPlantedMaxSeconds = 60.0;
constexpr double kMetricTol = 1e-12;
constexpr double kPValueTol = 1e-9;
constexpr double kMdsTol = 1e-9;
constexpr double kNullRawLo = 0.02, kNullRawHi = 0.08;
constexpr double kNullCorrectedHi = 0.01;
constexpr double kNullMaxSeconds = 120.0;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")" << std::endl;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome bonferroni_constant() {
  std::vector<CorrelationEntry> entries(40);
  const auto r = bonferroni(entries, 0.05);
  return {r.m_tests == 40 && r.corrected_alpha == kBonferroniExpected,
          "m=" + std::to_string(r.m_tests) + " threshold=" + fmt("%.17g", r.corrected_alpha)};
}

Outcome strongest_correlation() {
  const auto p = spearman_p(0.267, 503).p;
  return {p < kBonferroniExpected, "p=" + fmt("%.6g", p)};
}

Outcome stemmer() {
  const auto pairs = testutil::read_pairs(testutil::test_data("table1_stems.tsv"));
  std::size_t bad = 0;
  std::string first_bad;
  for (const auto& [word, expected] : pairs) {
    if (stem(word) != expected) {
      if (!bad++) first_bad = word + "->" + stem(word);
    }
  }
  const bool flying = stem("flying") == "fli";
  return {flying && bad == 0 && pairs.size() >= 20,
          "flying->" + stem("flying") + ", " + std::to_string(pairs.size() - bad) + "/" + std::to_string(pairs.size()) +
              " table stems" + (bad ? ", first mismatch " + first_bad : "")};
}

Outcome planted_recovery() {
  const auto t0 = Clock::now();
  const std::vector<std::size_t> blocks = {60, 70, 70};
  const auto pc = testutil::planted_corpus(400, blocks, 50, 0.1, 20240817);
  LdaConfig cfg;
  cfg.num_topics = 3;
  cfg.seed = 1;
  cfg.workers = 1;
  const auto f = fit(pc.matrix, cfg);
  const double secs = seconds_since(t0);

  const auto& phi = f.estimates.phi;
  const std::size_t K = 3, V = pc.vocab.size();
  std::vector<std::vector<double>> tv(K, std::vector<double>(K, 0.0));
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = 0; b < K; ++b) {
      for (std::size_t v = 0; v < V; ++v) tv[a][b] += 0.5 * std::abs(phi(a, v) - pc.phi[b][v]);
    }
  }
  // Greedy alignment: repeatedly take the closest unmatched pair.
  std::vector<int> match(K, -1);
  std::vector<char> used_est(K, 0), used_gen(K, 0);
  double total = 0.0;
  for (std::size_t step = 0; step < K; ++step) {
    double best = 1e300;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t b = 0; b < K; ++b) {
        if (!used_est[a] && !used_gen[b] && tv[a][b] < best) best = tv[a][b], ba = a, bb = b;
      }
    }
    used_est[ba] = used_gen[bb] = 1;
    match[ba] = static_cast<int>(bb);
    total += best;
  }
  const double mean_tv = total / K;
  bool exclusive = true;
  for (std::size_t a = 0; a < K; ++a) {
    const auto b = static_cast<std::size_t>(match[a]);
    for (TermId w : top_terms(f.estimates, pc.vocab, static_cast<int>(a), 10)) {
      const auto u = static_cast<std::size_t>(w);
      if (u < pc.block_begin[b] || u >= pc.block_end[b]) exclusive = false;
    }
  }
  return {mean_tv < kPlantedMaxMeanTv && exclusive && secs < kPlantedMaxSeconds,
          "mean TV=" + fmt("%.4f", mean_tv) + ", top-10 exclusive=" + (exclusive ? "yes" : "no") + ", " +
              fmt("%.1f", secs) + " s"};
}

DocTermMatrix fixture_matrix(const fs::path& out) {
  if (run_cli({"ingest", "--config", testutil::shipped_data("fixture/topiclens.toml").string(), "--out", out.string()}) != 0) {
    throw std::runtime_error("fixture ingest failed");
  }
  std::ifstream in(out / "dtm.txt");
  return read_matrix(in);
}

Outcome gibbs_invariants() {
  testutil::TempDir dir("accept-gibbs");
  const auto m = fixture_matrix(dir.path());
  std::size_t checked = 0, broken = 0;
  bool deterministic = true;
  for (int workers : {1, 2, 4}) {
    LdaConfig cfg;
    cfg.num_topics = 6;
    cfg.iterations = 200;
    cfg.burn_in = 100;
    cfg.seed = 42;
    cfg.workers = workers;
    FitObserver obs{[&](const LdaState& s, int) {
      ++checked;
      if (!check_consistency(s).empty()) ++broken;
    }};
    const auto a = fit(m, cfg, obs);
    const auto b = fit(m, cfg);
    deterministic = deterministic && a.state.z == b.state.z && a.estimates.theta == b.estimates.theta &&
                    a.estimates.phi == b.estimates.phi;
  }
  return {broken == 0 && checked == 600 && deterministic,
          std::to_string(checked - broken) + "/" + std::to_string(checked) + " sweeps consistent, W in {1,2,4} " +
              (deterministic ? "bitwise reproducible" : "NOT reproducible")};
}

Outcome metric_oracles() {
  std::vector<std::string> notes;
  bool ok = true;

  // Uniform model perplexity.
  const auto pc = testutil::planted_corpus(40, {11, 13, 17}, 25, 0.5, 5);
  const std::size_t V = pc.vocab.size();
  LdaEstimates uni;
  uni.phi = DenseMatrix(4, V, 1.0 / static_cast<double>(V));
  LdaConfig c4;
  c4.num_topics = 4;
  const double ppl = held_out_perplexity(pc.matrix, uni, c4, 10).perplexity;
  const double ppl_err = std::abs(ppl - static_cast<double>(V)) / static_cast<double>(V);
  ok = ok && ppl_err < kMetricTol;
  notes.push_back("perplexity rel err " + fmt("%.1e", ppl_err));

  // UMass on the 4-document toy corpus: D(a)=3, D(b)=2, D(c)=2, D(d)=1, D(a,b)=2, D(a,c)=2, D(b,c)=1.
  const auto toy = vectorize(testutil::streams({{"d1", {"a", "b", "c", "a"}}, {"d2", {"a", "b"}},
                                                {"d3", {"c", "a", "c"}}, {"d4", {"d"}}}),
                             testutil::vocab_of({"a", "b", "c", "d"}));
  const std::vector<std::pair<std::vector<TermId>, double>> umass_cases = {
      {{0, 1}, std::log(3.0 / 3.0)},
      {{1, 0}, std::log(3.0 / 2.0)},
      {{0, 3}, std::log(1.0 / 3.0)},
      {{2, 1}, std::log(2.0 / 2.0)},
      {{1, 2, 0}, std::log(2.0 / 2.0) + 2.0 * std::log(3.0 / 2.0)},
      // [a, b, c, d]: (b,a) 3/3, (c,a) 3/3, (c,b) 2/2, (d,a) 1/3, (d,b) 1/2, (d,c) 1/2
      {{0, 1, 2, 3}, std::log(1.0 / 3.0) + 2.0 * std::log(1.0 / 2.0)},
  };
  double umass_err = 0.0;
  for (const auto& [terms, expected] : umass_cases) umass_err = std::max(umass_err, std::abs(umass_score(toy, terms) - expected));
  ok = ok && umass_err < kMetricTol;
  notes.push_back("UMass max err " + fmt("%.1e", umass_err));

  // JSD of disjoint distributions.
  DenseMatrix disjoint(2, 4, 0.0);
  disjoint(0, 0) = disjoint(0, 1) = 0.5;
  disjoint(1, 2) = 0.25;
  disjoint(1, 3) = 0.75;
  const double jsd_err = std::abs(jsd_matrix(disjoint)(0, 1) - 1.0);
  ok = ok && jsd_err < kMetricTol;
  notes.push_back("disjoint JSD err " + fmt("%.1e", jsd_err));

  // Spearman against the counting-rank oracle on tied vectors.
  std::mt19937_64 rng(2024);
  double rho_err = 0.0;
  int vectors = 0;
  while (vectors < 1000) {
    const std::size_t n = 5 + rng() % 60;
    const int levels = 2 + static_cast<int>(rng() % 8);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % static_cast<unsigned>(levels));
      y[i] = rng() % 4 == 0 ? 0.0 : static_cast<double>(rng() % 100) / 7.0;
    }
    const std::vector<double> flat(n, (n + 1) / 2.0);
    if (oracle::counting_ranks(x) == flat || oracle::counting_ranks(y) == flat) continue;
    rho_err = std::max(rho_err, std::abs(spearman(x, y) - oracle::spearman_by_counting(x, y)));
    ++vectors;
  }
  ok = ok && rho_err < kMetricTol;
  notes.push_back("Spearman max err " + fmt("%.1e", rho_err));

  // t-based p-values against quadrature of the t density.
  double p_err = 0.0;
  for (std::size_t n : {4u, 5u, 10u, 30u, 100u, 503u, 5000u}) {
    for (double rho : {0.01, 0.05, 0.1, 0.267, 0.5, 0.8, 0.95, -0.3, -0.7}) {
      const double t = rho * std::sqrt((n - 2.0) / (1.0 - rho * rho));
      p_err = std::max(p_err, std::abs(spearman_p(rho, n).p - oracle::t_two_sided_p(t, static_cast<double>(n - 2))));
    }
  }
  ok = ok && p_err < kPValueTol;
  notes.push_back("p-value max err " + fmt("%.1e", p_err));

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {ok, detail};
}

Outcome mds_exactness() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (std::size_t n = 3; n <= 30; ++n) {
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = u(rng), y[i] = u(rng);
    DenseMatrix d(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d(i, j) = std::hypot(x[i] - x[j], y[i] - y[j]);
    }
    const auto r = classical_mds(d, 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double e = std::hypot(r.coords(i, 0) - r.coords(j, 0), r.coords(i, 1) - r.coords(j, 1));
        worst = std::max(worst, std::abs(e - d(i, j)));
      }
    }
  }
  return {worst < kMdsTol, "K=3..30, max distance err " + fmt("%.1e", worst)};
}

Outcome null_calibration() {
  const auto t0 = Clock::now();
  constexpr std::size_t reps = 200, n = 500, topics = 20;
  std::mt19937_64 rng(4242);
  std::gamma_distribution<double> gamma(0.5, 1.0);
  std::normal_distribution<double> normal;
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "s" + std::to_string(i);
  std::size_t tests = 0, raw = 0, corrected = 0, families = 0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    DenseMatrix theta(n, topics);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < topics; ++k) s += (theta(i, k) = gamma(rng));
      for (std::size_t k = 0; k < topics; ++k) theta(i, k) /= s;
    }
    DenseMatrix feats(n, 2);
    for (std::size_t i = 0; i < n; ++i) feats(i, 0) = normal(rng), feats(i, 1) = normal(rng);
    const FeatureTable table({"hardness", "darkness"}, ids, feats);
    const auto r = correlate(theta, ids, table, {});
    bool any = false;
    for (const auto& e : r.entries) {
      ++tests;
      raw += e.significant_raw;
      corrected += e.significant_corrected;
      any = any || e.significant_corrected;
    }
    families += any;
    if (r.m_tests != 40) return {false, "m=" + std::to_string(r.m_tests)};
  }
  const double secs = seconds_since(t0);
  const double raw_rate = static_cast<double>(raw) / tests;
  const double corr_rate = static_cast<double>(corrected) / tests;
  return {raw_rate >= kNullRawLo && raw_rate <= kNullRawHi && corr_rate <= kNullCorrectedHi && secs < kNullMaxSeconds,
          "raw rate " + fmt("%.4f", raw_rate) + ", corrected per-test rate " + fmt("%.5f", corr_rate) +
              ", family-wise " + fmt("%.3f", static_cast<double>(families) / reps) + ", " + fmt("%.1f", secs) + " s"};
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Outcome end_to_end() {
  testutil::TempDir dir("accept-e2e");
  const std::string cfg = testutil::shipped_data("fixture/topiclens.toml").string();
  const std::string bin = TOPICLENS_CLI;
  const fs::path first = dir / "first", second = dir / "second";
  if (std::system((bin + " train --config " + cfg + " --out " + first.string() + " > /dev/null 2>&1").c_str()) == 0) {
    return {false, "train succeeded without ingest"};
  }
  if (std::system((bin + " ingest --config " + cfg + " --out " + first.string() + " > /dev/null").c_str()) != 0 ||
      std::system((bin + " train --config " + cfg + " --out " + first.string() + " > /dev/null").c_str()) != 0) {
    return {false, "ingest/train failed"};
  }

  // hardness = theta_k + noise for a planted k; darkness is pure noise.
  const auto theta = read_tsv(first / "theta.tsv");
  constexpr std::size_t planted = 3;  // 1-based topic id
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 0.02);
  const fs::path csv = dir / "features.csv";
  {
    std::ofstream out(csv);
    out << "id,hardness,darkness\n";
    for (std::size_t r = 1; r < theta.size(); ++r) {
      const double h = std::stod(theta[r][planted]) + noise(rng);
      out << theta[r][0] << ',' << nlohmann::json(h).dump() << ',' << nlohmann::json(noise(rng)).dump() << '\n';
    }
  }

  const int code = std::system((bin + " all --config " + cfg + " --out " + second.string() + " --features " + csv.string() + " > /dev/null").c_str());
  const int status = WEXITSTATUS(code);
  const std::vector<std::string> artifacts = {
      "docs.jsonl", "ingest.json", "vocab.tsv", "dtm.txt", "model.json", "theta.tsv", "topics.tsv", "sweep.tsv",
      "evaluation.json", "topic_space.json", "relevance.tsv", "heatmap_album.tsv", "correlations.tsv",
      "correlations.json", "vis.json", "run_times.json"};
  std::size_t present = 0;
  for (const auto& a : artifacts) present += fs::exists(second / a);

  int argmax = 0;
  double best = -2.0;
  if (fs::exists(second / "correlations.json")) {
    std::ifstream in(second / "correlations.json");
    const auto j = nlohmann::json::parse(in);
    for (const auto& e : j["entries"]) {
      if (e["feature"] == "hardness" && e["rho"].get<double>() > best) best = e["rho"], argmax = e["topic"];
    }
  }
  return {status == 0 && present == artifacts.size() && argmax == static_cast<int>(planted),
          "exit " + std::to_string(status) + ", " + std::to_string(present) + "/" + std::to_string(artifacts.size()) +
              " artifacts, max rho " + fmt("%.3f", best) + " at topic " + std::to_string(argmax) + " (planted " +
              std::to_string(planted) + ")"};
}

}  // namespace

int main() {
  report("Bonferroni constant 0.05 / (20 x 2) = 0.00125", bonferroni_constant);
  report("rho = 0.267 at n = 503 is below 0.00125", strongest_correlation);
  report("stemmer reproduces flying->fli and the table stems", stemmer);
  report("planted-topic recovery (D=400, V=200, K=3)", planted_recovery);
  report("Gibbs count invariants and bitwise determinism on the fixture", gibbs_invariants);
  report("metric oracles (perplexity, UMass, JSD, Spearman, p-values)", metric_oracles);
  report("MDS reproduces planar distances", mds_exactness);
  report("null calibration (200 replicates, n = 500, m = 40)", null_calibration);
  report("end-to-end `all` on the fixture with a planted feature link", end_to_end);
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failures ? 1 : 0;
}
