#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "topiclens/matrix.hpp"

namespace topiclens {

// Numeric feature columns keyed by document id (e.g. hardness, darkness).
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(std::vector<std::string> names, std::vector<std::string> ids, DenseMatrix values);

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const DenseMatrix& values() const noexcept { return values_; }
  std::size_t n_rows() const noexcept { return ids_.size(); }
  std::optional<std::size_t> find(const std::string& id) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::string> ids_;
  DenseMatrix values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// CSV with header "id,<feature>,...". Values must be finite; ids unique.
FeatureTable read_feature_csv(std::istream& in);
FeatureTable load_feature_csv(const std::filesystem::path& path);

// Ranks 1..n, ties get the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation of average ranks. Throws NumericError for length < 3,
// mismatched lengths or a constant vector.
double spearman(std::span<const double> x, std::span<const double> y);

struct PValue {
  double p = 1.0;
  bool exact = false;  // |rho| = 1: p reported as 0
};

// Two-sided p from t = rho sqrt((n-2)/(1-rho^2)) with n-2 degrees of freedom.
PValue spearman_p(double rho, std::size_t n);

constexpr std::size_t kDefaultPermutations = 10000;

// Two-sided permutation p: (1 + #{|rho_perm| >= |rho|}) / (1 + permutations).
double spearman_permutation_p(std::span<const double> x, std::span<const double> y, std::size_t permutations,
                              std::uint64_t seed);

struct CorrelationEntry {
  int topic = 0;
  std::string feature;
  double rho = 0.0;
  double p_value = 1.0;
  bool p_exact = false;
  bool significant_raw = false;
  bool significant_corrected = false;
};

struct CorrelationReport {
  std::vector<CorrelationEntry> entries;
  std::size_t m_tests = 0;
  double alpha = 0.05;
  double corrected_alpha = 0.05;
  std::size_t n = 0;
  std::vector<std::string> sample_ids;
  std::uint64_t sample_seed = 0;
  std::size_t requested_sample = 0;  // 0 = all shared ids
  std::string p_method = "t";
};

constexpr double kDefaultAlpha = 0.05;

// Sets m_tests, corrected_alpha = alpha / m_tests and both significance flags.
CorrelationReport bonferroni(std::vector<CorrelationEntry> entries, double alpha = kDefaultAlpha);

struct CorrelateOptions {
  std::size_t sample_size = 0;  // 0 = every id present in both inputs
  std::uint64_t seed = 7;
  double alpha = kDefaultAlpha;
  std::size_t permutations = 0;  // > 0 switches to permutation p-values
};

// Spearman rho of every theta column against every feature column over the
// sample, then Bonferroni. An explicit id subset must be present in both inputs.
CorrelationReport correlate(const DenseMatrix& theta, const std::vector<std::string>& doc_ids,
                            const FeatureTable& features, const CorrelateOptions& options,
                            const std::vector<std::string>* explicit_ids = nullptr);

void write_report_tsv(std::ostream& out, const CorrelationReport& report, const std::string& provenance);
void write_report_json(std::ostream& out, const CorrelationReport& report, const std::string& provenance);

}  // namespace topiclens
