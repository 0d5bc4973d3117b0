#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cds/catalog.hpp"
#include "cds/critique.hpp"

namespace cds::analytics {

// All variances here are sample variances (n - 1 denominator).

/// Dense row-major matrix of integer item scores: one row per respondent,
/// one column per item.
class ItemMatrix {
 public:
  ItemMatrix(std::size_t cols, std::vector<std::int64_t> values);

  std::size_t rows() const { return cols_ == 0 ? 0 : values_.size() / cols_; }
  std::size_t cols() const { return cols_; }
  std::int64_t at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<const std::int64_t> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  const std::vector<std::int64_t>& values() const { return values_; }

 private:
  std::size_t cols_;
  std::vector<std::int64_t> values_;
};

struct RowLabel {
  std::string respondent;
  std::string group;
  std::string stimulus;

  bool operator==(const RowLabel&) const = default;
};

/// Cohort responses: each row is one respondent's 30 answers to one stimulus.
class ResponseMatrix {
 public:
  using Row = std::array<int, kHeuristicCount>;

  /// Throws Error(kOutOfRange) naming the row and column of any value
  /// outside -2..+2, or Error(kInvalidArgument) if the label count differs.
  ResponseMatrix(std::vector<Row> rows, std::vector<RowLabel> labels);

  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<RowLabel>& labels() const { return labels_; }
  std::size_t size() const { return rows_.size(); }

  ItemMatrix items() const;
  /// Total score (sum of the 30 items) per row.
  std::vector<double> totals() const;

 private:
  std::vector<Row> rows_;
  std::vector<RowLabel> labels_;
};

/// Parses `respondent,group,stimulus,q1..q30`. Errors name the offending
/// line and column.
ResponseMatrix import_matrix(std::string_view csv_text);

struct ReliabilityResult {
  double alpha = 0.0;
  int k = 0;
  std::size_t n = 0;
  std::vector<double> item_variances;
  double total_variance = 0.0;
};

/// alpha = k/(k-1) * (1 - sum(item variances) / variance(row totals)).
/// Throws Error(kUndefined) for fewer than 2 rows, fewer than 2 items, or a
/// zero total variance.
ReliabilityResult cronbach_alpha(const ResponseMatrix& matrix);

/// Integer route: variances are accumulated as exact integer moments, so the
/// result is invariant to row order, column order and translation.
ReliabilityResult cronbach_alpha(const ItemMatrix& matrix);

/// Real-valued route (two-pass variances) for arbitrary item data.
ReliabilityResult cronbach_alpha(std::span<const double> values, std::size_t rows, std::size_t cols);

enum class TTestVariant : std::uint8_t { kStudent, kWelch };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_tailed = 1.0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  double sd1 = 0.0;
  double sd2 = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  TTestVariant variant = TTestVariant::kStudent;
};

/// Independent two-sample t-test. Student's pooled form by default
/// (df = n1 + n2 - 2); Welch's unequal-variance form on request.
/// Throws Error(kInvalidArgument) if either group has fewer than 2 values
/// and Error(kUndefined) when the (pooled) variance is zero.
TTestResult t_test_independent(std::span<const double> group1, std::span<const double> group2,
                               TTestVariant variant = TTestVariant::kStudent);

struct Descriptive {
  double mean = 0.0;
  std::optional<double> sd;  // unset when n < 2
  std::size_t n = 0;
};

/// Throws Error(kInvalidArgument) on an empty list.
Descriptive descriptive_stats(std::span<const double> values);

/// Word counts per (group, stimulus), over the whole lexicon.
class WordFrequencyTable {
 public:
  using Key = std::pair<std::string, std::string>;  // (group, stimulus)

  struct Cell {
    int sheets = 0;
    std::vector<int> counts;  // parallel to words()
  };

  explicit WordFrequencyTable(std::vector<std::string> words = {}) : words_(std::move(words)) {}

  void add(const std::string& group, const std::string& stimulus, const std::vector<std::string>& circled);

  bool empty() const { return cells_.empty(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::map<Key, Cell>& cells() const { return cells_; }
  int count(const std::string& group, const std::string& stimulus, std::string_view word) const;
  int sheets(const std::string& group, const std::string& stimulus) const;

  /// `group,stimulus,word,count`, groups and stimuli sorted, words in
  /// lexicon order.
  std::string to_csv() const;

 private:
  std::vector<std::string> words_;
  std::map<Key, Cell> cells_;
};

/// Maps a sheet to its (group, stimulus) tags.
using GroupingFn = std::function<WordFrequencyTable::Key(const CritiqueSheet&)>;

/// Tags by appraiser, artefact, catalog version or a single "all" group;
/// the stimulus is always the artefact key. Throws Error(kInvalidArgument)
/// for other tags.
GroupingFn grouping_by(std::string_view tag);

/// Counts circled words of finalized sheets; drafts are skipped.
WordFrequencyTable word_frequencies(const std::vector<CritiqueSheet>& sheets, const GroupingFn& grouping,
                                    const HeuristicCatalog& catalog);

/// `stimulus,group,mean,sd,n,t,df,p` with one row per group.
std::string ttest_csv(const TTestResult& result, std::string_view stimulus, std::string_view group1,
                      std::string_view group2, bool header = true);

}  // namespace cds::analytics
