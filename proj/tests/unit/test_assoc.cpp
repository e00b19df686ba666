#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "common.hpp"
#include "oracles/t_dist.hpp"
#include "topiclens/assoc.hpp"
#include "topiclens/error.hpp"

using namespace topiclens;

namespace {

FeatureTable table(const std::vector<std::string>& ids, const std::vector<std::vector<double>>& cols,
                   std::vector<std::string> names) {
  DenseMatrix v(ids.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t i = 0; i < ids.size(); ++i) v(i, c) = cols[c][i];
  }
  return FeatureTable(std::move(names), ids, std::move(v));
}

std::vector<std::string> ids_of(std::size_t n, const std::string& prefix = "s") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(1000 + i));
  return ids;
}

}  // namespace

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3};
  CHECK(spearman(x, std::vector<double>{10, 20, 30}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spearman(x, std::vector<double>{30, 20, 10}) == doctest::Approx(-1.0).epsilon(1e-15));
  // ranks x = [1, 2.5, 2.5, 4], y = [3, 1, 2, 4]; Pearson by hand = 0.6 / sqrt(0.9 * 1.0) * ... see below
  const std::vector<double> a{1, 2, 2, 4}, b{3, 1, 2, 4};
  // centered ranks: x [-1.5, 0, 0, 1.5], y [0.5, -1.5, -0.5, 1.5]; sxy = 1.5, sxx = 4.5, syy = 5
  CHECK(std::abs(spearman(a, b) - 1.5 / std::sqrt(4.5 * 5.0)) < 1e-15);
}

TEST_CASE("average ranks") {
  const std::vector<double> x{10, 30, 20, 20, 10, 40};
  CHECK(average_ranks(x) == std::vector<double>{1.5, 5, 3.5, 3.5, 1.5, 6});
}

TEST_CASE("spearman agrees with a counting-rank oracle on tied vectors") {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 5 + rng() % 60;
    const int levels = 2 + static_cast<int>(rng() % 8);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % static_cast<unsigned>(levels));
      y[i] = rng() % 4 == 0 ? 0.0 : static_cast<double>(rng() % 100) / 7.0;
    }
    if (oracle::counting_ranks(x) == std::vector<double>(n, (n + 1) / 2.0)) continue;
    if (oracle::counting_ranks(y) == std::vector<double>(n, (n + 1) / 2.0)) continue;
    worst = std::max(worst, std::abs(spearman(x, y) - oracle::spearman_by_counting(x, y)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("spearman properties") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<double> x(200), y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    x[i] = g(rng);
    y[i] = x[i] + g(rng);
  }
  const double r = spearman(x, y);
  CHECK(r == spearman(y, x));
  std::vector<double> tx(200), ty(200);
  for (std::size_t i = 0; i < 200; ++i) {
    tx[i] = std::exp(x[i]);
    ty[i] = -1.0 / (10.0 + y[i]);
  }
  CHECK(std::abs(spearman(tx, ty) - r) < 1e-12);
  CHECK(r <= 1.0);
  CHECK(r >= -1.0);
}

TEST_CASE("spearman errors") {
  const std::vector<double> c{1, 1, 1, 1}, x{1, 2, 3, 4};
  try {
    spearman(c, x);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("undefined correlation") != std::string::npos);
  }
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{2, 1}), NumericError);
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2, 3}), NumericError);
}

TEST_CASE("spearman_p examples") {
  CHECK(spearman_p(0.0, 50).p == 1.0);
  CHECK(spearman_p(0.267, 503).p < 0.00125);
  const auto one = spearman_p(1.0, 10);
  CHECK(one.p == 0.0);
  CHECK(one.exact);
  CHECK(spearman_p(-1.0, 10).exact);
  CHECK_THROWS_AS(spearman_p(0.5, 3), NumericError);
  CHECK_THROWS_AS(spearman_p(1.5, 10), NumericError);
}

TEST_CASE("spearman_p matches the t-density quadrature oracle") {
  double worst = 0.0;
  for (std::size_t n : {4u, 5u, 10u, 30u, 100u, 503u, 5000u}) {
    for (double rho : {0.01, 0.05, 0.1, 0.267, 0.5, 0.8, 0.95, -0.3, -0.7}) {
      const double t = rho * std::sqrt((n - 2.0) / (1.0 - rho * rho));
      const double expected = oracle::t_two_sided_p(t, static_cast<double>(n - 2));
      worst = std::max(worst, std::abs(spearman_p(rho, n).p - expected));
    }
  }
  CHECK(worst < 1e-9);
  const double t = 0.5 * std::sqrt(8.0 / 0.75);
  CHECK(std::abs(spearman_p(0.5, 10).p - oracle::t_two_sided_p(t, 8.0)) < 1e-9);
}

TEST_CASE("spearman_p is monotone in |rho|") {
  double prev = 1.0;
  for (int i = 1; i < 100; ++i) {
    const double p = spearman_p(i / 100.0, 40).p;
    CHECK(p < prev);
    CHECK(spearman_p(-i / 100.0, 40).p == p);
    prev = p;
  }
}

TEST_CASE("permutation p-values") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> x(30), y(30), z(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x[i] = g(rng);
    y[i] = x[i] + 0.3 * g(rng);
    z[i] = g(rng);
  }
  const double strong = spearman_permutation_p(x, y, 2000, 1);
  CHECK(strong == doctest::Approx(1.0 / 2001.0));
  const double null_p = spearman_permutation_p(x, z, 2000, 1);
  CHECK(null_p == spearman_permutation_p(x, z, 2000, 1));
  CHECK(std::abs(null_p - spearman_p(spearman(x, z), 30).p) < 0.05);
  CHECK_THROWS_AS(spearman_permutation_p(x, z, 0, 1), UsageError);
}

TEST_CASE("bonferroni") {
  std::vector<CorrelationEntry> entries;
  for (int k = 0; k < 20; ++k) {
    for (const char* f : {"hardness", "darkness"}) entries.push_back({k, f, 0.1, 0.01, false, false, false});
  }
  entries[0].p_value = 0.001;
  entries[1].p_value = 0.2;
  const auto r = bonferroni(entries, 0.05);
  CHECK(r.m_tests == 40);
  CHECK(r.corrected_alpha == 0.00125);
  CHECK(r.entries[0].significant_raw);
  CHECK(r.entries[0].significant_corrected);
  CHECK_FALSE(r.entries[1].significant_raw);
  CHECK(r.entries[2].significant_raw);
  CHECK_FALSE(r.entries[2].significant_corrected);
  for (const auto& e : r.entries) CHECK((!e.significant_corrected || e.significant_raw));

  const auto single = bonferroni({{0, "f", 0.5, 0.03, false, false, false}}, 0.05);
  CHECK(single.corrected_alpha == 0.05);
  CHECK(single.entries[0].significant_corrected);
  CHECK_THROWS(bonferroni({}, 0.05));
}

TEST_CASE("feature CSV") {
  std::istringstream in("id,hardness,darkness\ns1,0.5,0.25\ns2,1e-3,-2\n");
  const auto t = read_feature_csv(in);
  CHECK(t.names() == std::vector<std::string>{"hardness", "darkness"});
  CHECK(t.n_rows() == 2);
  CHECK(t.values()(1, 1) == -2.0);
  CHECK(t.find("s2") == 1);
  std::istringstream dup("id,h\ns1,1\ns1,2\n");
  CHECK_THROWS_AS(read_feature_csv(dup), DataError);
  std::istringstream nan("id,h\ns1,nan\n");
  CHECK_THROWS_AS(read_feature_csv(nan), DataError);
  std::istringstream bad("name,h\ns1,1\n");
  CHECK_THROWS_AS(read_feature_csv(bad), DataError);
  std::istringstream ragged("id,h,d\ns1,1\n");
  CHECK_THROWS_AS(read_feature_csv(ragged), DataError);
}

TEST_CASE("correlate") {
  const std::size_t n = 60, K = 3;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.05);
  DenseMatrix theta(n, K);
  for (std::size_t d = 0; d < n; ++d) {
    double s = 0;
    for (std::size_t k = 0; k < K; ++k) s += (theta(d, k) = u(rng) + 0.01);
    for (std::size_t k = 0; k < K; ++k) theta(d, k) /= s;
  }
  const auto ids = ids_of(n);
  std::vector<double> copy(n), linked(n), noise(n);
  for (std::size_t d = 0; d < n; ++d) {
    copy[d] = theta(d, 1);
    linked[d] = theta(d, 2) + g(rng);
    noise[d] = u(rng);
  }
  const auto features = table(ids, {copy, linked, noise}, {"copy", "linked", "noise"});
  CorrelateOptions opts;
  const auto r = correlate(theta, ids, features, opts);
  CHECK(r.m_tests == 9);
  CHECK(r.n == n);
  CHECK(r.corrected_alpha == doctest::Approx(0.05 / 9));
  auto entry = [&](std::size_t k, const std::string& f) {
    for (const auto& e : r.entries) {
      if (static_cast<std::size_t>(e.topic) == k && e.feature == f) return e;
    }
    FAIL("missing entry");
    return CorrelationEntry{};
  };
  CHECK(entry(1, "copy").rho == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(entry(1, "copy").p_exact);
  double best = -2;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (entry(k, "linked").rho > best) {
      best = entry(k, "linked").rho;
      arg = k;
    }
  }
  CHECK(arg == 2);

  SUBCASE("id order of theta does not matter") {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    DenseMatrix t2(n, K);
    std::vector<std::string> ids2;
    for (std::size_t i = 0; i < n; ++i) {
      ids2.push_back(ids[perm[i]]);
      for (std::size_t k = 0; k < K; ++k) t2(i, k) = theta(perm[i], k);
    }
    const auto r2 = correlate(t2, ids2, features, opts);
    for (std::size_t i = 0; i < r.entries.size(); ++i) CHECK(r2.entries[i].rho == r.entries[i].rho);
  }
  SUBCASE("seeded sample is reproducible and recorded") {
    opts.sample_size = 25;
    opts.seed = 7;
    const auto a = correlate(theta, ids, features, opts);
    const auto b = correlate(theta, ids, features, opts);
    CHECK(a.n == 25);
    CHECK(a.sample_ids == b.sample_ids);
    CHECK(std::is_sorted(a.sample_ids.begin(), a.sample_ids.end()));
    CHECK(a.sample_seed == 7);
    CHECK(a.requested_sample == 25);
    opts.seed = 8;
    CHECK(correlate(theta, ids, features, opts).sample_ids != a.sample_ids);
    opts.sample_size = n + 1;
    CHECK_THROWS_AS(correlate(theta, ids, features, opts), DataError);
  }
  SUBCASE("explicit ids must exist in both inputs") {
    const std::vector<std::string> want{ids[0], ids[1], "ghost-1", ids[3], "ghost-2"};
    try {
      correlate(theta, ids, features, opts, &want);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("ghost-1") != std::string::npos);
      CHECK(msg.find("ghost-2") != std::string::npos);
    }
  }
  SUBCASE("permutation mode") {
    opts.permutations = 500;
    const auto p = correlate(theta, ids, features, opts);
    CHECK(p.p_method == "permutation");
    CHECK(entry(1, "copy").rho == doctest::Approx(1.0));
    for (const auto& e : p.entries) CHECK(e.p_value >= 1.0 / 501.0);
  }
  SUBCASE("report serialization") {
    std::ostringstream tsv, js;
    write_report_tsv(tsv, r, "topiclens test");
    write_report_json(js, r, "topiclens test");
    CHECK(tsv.str().find("topic\tfeature\trho\tp_value\tsignificant_raw\tsignificant_corrected") != std::string::npos);
    const auto j = nlohmann::json::parse(js.str());
    CHECK(j.at("m_tests") == 9);
    CHECK(j.at("corrected_alpha").get<double>() == doctest::Approx(0.05 / 9));
    CHECK(j.at("entries").size() == 9);
    CHECK(j.at("entries")[0].at("topic") == 1);
  }
}

TEST_CASE("correlate reports constant columns") {
  const auto ids = ids_of(6);
  DenseMatrix theta(6, 2, 0.5);
  const auto f = table(ids, {{1, 2, 3, 4, 5, 6}}, {"h"});
  try {
    correlate(theta, ids, f, {});
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("topic 1") != std::string::npos);
  }
  DenseMatrix small(3, 1);
  CHECK_THROWS_AS(correlate(small, {"a", "b", "c"}, table({"a", "b", "c"}, {{1, 2, 3}}, {"h"}), {}), DataError);
}
