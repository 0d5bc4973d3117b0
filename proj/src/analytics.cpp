#include "cds/analytics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>

#include "cds/csv.hpp"
#include "cds/error.hpp"
#include "cds/special_functions.hpp"

namespace cds::analytics {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::kOutOfRange, "integer overflow in variance moments");
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorCode::kOutOfRange, "integer overflow in variance moments");
  return out;
}

// n * sum(x^2) - (sum x)^2, which equals n (n - 1) times the sample variance.
struct Moments {
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;

  void add(std::int64_t x) {
    sum = checked_add(sum, x);
    sum_sq = checked_add(sum_sq, checked_mul(x, x));
  }
  std::int64_t scaled_variance(std::int64_t n) const { return checked_mul(n, sum_sq) - checked_mul(sum, sum); }
};

void require_shape(std::size_t rows, std::size_t cols) {
  if (rows < 2) {
    throw Error(ErrorCode::kUndefined, fmt::format("Cronbach's alpha needs at least 2 rows, got {}", rows));
  }
  if (cols < 2) {
    throw Error(ErrorCode::kUndefined, fmt::format("Cronbach's alpha needs at least 2 items, got {}", cols));
  }
}

[[noreturn]] void zero_total_variance() {
  throw Error(ErrorCode::kUndefined, "alpha undefined: total-score variance is zero");
}

std::pair<double, double> mean_and_sample_variance(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  double comp = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
    comp += x - mean;
  }
  const double n = static_cast<double>(v.size());
  // corrected two-pass; comp is the rounding residue of the mean
  const double var = (ss - comp * comp / n) / (n - 1.0);
  return {mean, std::max(var, 0.0)};
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string number(double v) { return fmt::format("{}", v); }

}  // namespace

ItemMatrix::ItemMatrix(std::size_t cols, std::vector<std::int64_t> values) : cols_(cols), values_(std::move(values)) {
  if (cols_ == 0 && !values_.empty()) throw Error(ErrorCode::kInvalidArgument, "matrix with zero columns");
  if (cols_ != 0 && values_.size() % cols_ != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} values do not fill rows of {} columns", values_.size(), cols_));
  }
}

ResponseMatrix::ResponseMatrix(std::vector<Row> rows, std::vector<RowLabel> labels)
    : rows_(std::move(rows)), labels_(std::move(labels)) {
  if (labels_.empty()) labels_.resize(rows_.size());
  if (labels_.size() != rows_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} row labels supplied for {} rows", labels_.size(), rows_.size()));
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (std::size_t c = 0; c < rows_[r].size(); ++c) {
      const int v = rows_[r][c];
      if (v < kLikertMin || v > kLikertMax) {
        throw Error(ErrorCode::kOutOfRange,
                    fmt::format("row {} column q{}: value {} outside {}..+{}", r + 1, c + 1, v, kLikertMin, kLikertMax),
                    {fmt::format("row={}", r + 1), fmt::format("column=q{}", c + 1)});
      }
    }
  }
}

ItemMatrix ResponseMatrix::items() const {
  std::vector<std::int64_t> values;
  values.reserve(rows_.size() * kHeuristicCount);
  for (const auto& row : rows_) values.insert(values.end(), row.begin(), row.end());
  return ItemMatrix(kHeuristicCount, std::move(values));
}

std::vector<double> ResponseMatrix::totals() const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) {
    int total = 0;
    for (int v : row) total += v;
    out.push_back(total);
  }
  return out;
}

ResponseMatrix import_matrix(std::string_view csv_text) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "matrix CSV is empty: expected a header row");

  std::vector<std::string> expected = {"respondent", "group", "stimulus"};
  for (int q = 1; q <= kHeuristicCount; ++q) expected.push_back(fmt::format("q{}", q));
  const auto& header = rows.front();
  if (header.fields.size() != expected.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("line {}: header has {} columns, expected {} (respondent,group,stimulus,q1..q30)",
                            header.line, header.fields.size(), expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (trim(header.fields[i]) != expected[i]) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("line {}: header column {} is '{}', expected '{}'",
                                                           header.line, i + 1, header.fields[i], expected[i]));
    }
  }
  if (rows.size() == 1) throw Error(ErrorCode::kInvalidArgument, "matrix CSV has a header but no data rows");

  std::vector<ResponseMatrix::Row> data;
  std::vector<RowLabel> labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != expected.size()) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("line {}: {} columns, expected {}", row.line,
                                                           row.fields.size(), expected.size()));
    }
    ResponseMatrix::Row values{};
    for (int q = 0; q < kHeuristicCount; ++q) {
      const std::string cell = trim(row.fields[static_cast<std::size_t>(q) + 3]);
      int v = 0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || end != cell.data() + cell.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("line {} column q{}: '{}' is not an integer", row.line, q + 1, cell),
                    {fmt::format("line={}", row.line), fmt::format("column=q{}", q + 1)});
      }
      if (v < kLikertMin || v > kLikertMax) {
        throw Error(ErrorCode::kOutOfRange,
                    fmt::format("line {} column q{}: value {} outside {}..+{}", row.line, q + 1, v, kLikertMin,
                                kLikertMax),
                    {fmt::format("line={}", row.line), fmt::format("column=q{}", q + 1)});
      }
      values[static_cast<std::size_t>(q)] = v;
    }
    data.push_back(values);
    labels.push_back({trim(row.fields[0]), trim(row.fields[1]), trim(row.fields[2])});
  }
  return ResponseMatrix(std::move(data), std::move(labels));
}

ReliabilityResult cronbach_alpha(const ResponseMatrix& matrix) { return cronbach_alpha(matrix.items()); }

ReliabilityResult cronbach_alpha(const ItemMatrix& matrix) {
  const std::size_t n = matrix.rows();
  const std::size_t k = matrix.cols();
  require_shape(n, k);

  std::vector<Moments> items(k);
  Moments totals;
  for (std::size_t r = 0; r < n; ++r) {
    std::int64_t total = 0;
    for (std::size_t c = 0; c < k; ++c) {
      items[c].add(matrix.at(r, c));
      total = checked_add(total, matrix.at(r, c));
    }
    totals.add(total);
  }
  const auto nn = static_cast<std::int64_t>(n);
  const std::int64_t total_scaled = totals.scaled_variance(nn);
  if (total_scaled == 0) zero_total_variance();

  const double denom = static_cast<double>(nn) * static_cast<double>(nn - 1);
  ReliabilityResult result;
  result.k = static_cast<int>(k);
  result.n = n;
  std::int64_t item_scaled_sum = 0;
  for (const auto& m : items) {
    const std::int64_t s = m.scaled_variance(nn);
    item_scaled_sum = checked_add(item_scaled_sum, s);
    result.item_variances.push_back(static_cast<double>(s) / denom);
  }
  result.total_variance = static_cast<double>(total_scaled) / denom;
  const auto kk = static_cast<std::int64_t>(k);
  // Single rounding: alpha = k (T - sum I) / ((k - 1) T) on exact integers.
  result.alpha = static_cast<double>(checked_mul(kk, total_scaled - item_scaled_sum)) /
                 static_cast<double>(checked_mul(kk - 1, total_scaled));
  return result;
}

ReliabilityResult cronbach_alpha(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} values supplied for a {}x{} matrix", values.size(), rows, cols));
  }
  require_shape(rows, cols);
  ReliabilityResult result;
  result.k = static_cast<int>(cols);
  result.n = rows;
  std::vector<double> column(rows);
  double item_sum = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = values[r * cols + c];
    const double var = mean_and_sample_variance(column).second;
    result.item_variances.push_back(var);
    item_sum += var;
  }
  std::vector<double> totals(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) totals[r] += values[r * cols + c];
  }
  result.total_variance = mean_and_sample_variance(totals).second;
  if (result.total_variance == 0.0) zero_total_variance();
  const double k = static_cast<double>(cols);
  result.alpha = (k / (k - 1.0)) * (1.0 - item_sum / result.total_variance);
  return result;
}

TTestResult t_test_independent(std::span<const double> group1, std::span<const double> group2,
                               TTestVariant variant) {
  if (group1.size() < 2 || group2.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("t-test needs at least 2 values per group, got {} and {}", group1.size(), group2.size()));
  }
  const auto [m1, v1] = mean_and_sample_variance(group1);
  const auto [m2, v2] = mean_and_sample_variance(group2);
  const double n1 = static_cast<double>(group1.size());
  const double n2 = static_cast<double>(group2.size());

  TTestResult r;
  r.mean1 = m1;
  r.mean2 = m2;
  r.sd1 = std::sqrt(v1);
  r.sd2 = std::sqrt(v2);
  r.n1 = group1.size();
  r.n2 = group2.size();
  r.variant = variant;

  double se = 0.0;
  if (variant == TTestVariant::kStudent) {
    r.df = n1 + n2 - 2.0;
    const double pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / r.df;
    if (pooled == 0.0) throw Error(ErrorCode::kUndefined, "t-test undefined: pooled variance is zero");
    se = std::sqrt(pooled * (1.0 / n1 + 1.0 / n2));
  } else {
    const double a = v1 / n1;
    const double b = v2 / n2;
    if (a + b == 0.0) throw Error(ErrorCode::kUndefined, "t-test undefined: both group variances are zero");
    se = std::sqrt(a + b);
    r.df = (a + b) * (a + b) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
  }
  r.t = (m1 - m2) / se;
  r.p_two_tailed = stats::student_t_two_tailed_p(r.t, r.df);
  return r;
}

Descriptive descriptive_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "descriptive statistics of an empty list");
  Descriptive d;
  d.n = values.size();
  if (values.size() == 1) {
    d.mean = values.front();
    return d;
  }
  const auto [mean, var] = mean_and_sample_variance(values);
  d.mean = mean;
  d.sd = std::sqrt(var);
  return d;
}

void WordFrequencyTable::add(const std::string& group, const std::string& stimulus,
                             const std::vector<std::string>& circled) {
  auto& cell = cells_[{group, stimulus}];
  if (cell.counts.empty()) cell.counts.assign(words_.size(), 0);
  ++cell.sheets;
  for (const auto& w : circled) {
    auto it = std::find(words_.begin(), words_.end(), w);
    if (it == words_.end()) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("circled word '{}' is not in the lexicon", w), {w});
    }
    ++cell.counts[static_cast<std::size_t>(it - words_.begin())];
  }
}

int WordFrequencyTable::count(const std::string& group, const std::string& stimulus, std::string_view word) const {
  auto cell = cells_.find({group, stimulus});
  if (cell == cells_.end()) return 0;
  auto it = std::find(words_.begin(), words_.end(), word);
  if (it == words_.end()) return 0;
  return cell->second.counts[static_cast<std::size_t>(it - words_.begin())];
}

int WordFrequencyTable::sheets(const std::string& group, const std::string& stimulus) const {
  auto cell = cells_.find({group, stimulus});
  return cell == cells_.end() ? 0 : cell->second.sheets;
}

std::string WordFrequencyTable::to_csv() const {
  std::string out = "group,stimulus,word,count\n";
  for (const auto& [key, cell] : cells_) {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      out += csv::join({key.first, key.second, words_[i], std::to_string(cell.counts[i])});
      out += '\n';
    }
  }
  return out;
}

GroupingFn grouping_by(std::string_view tag) {
  if (tag == "appraiser") {
    return [](const CritiqueSheet& s) { return WordFrequencyTable::Key{s.appraiser, s.artefact_key}; };
  }
  if (tag == "artefact") {
    return [](const CritiqueSheet& s) { return WordFrequencyTable::Key{s.artefact_key, s.artefact_key}; };
  }
  if (tag == "catalog") {
    return [](const CritiqueSheet& s) { return WordFrequencyTable::Key{s.catalog_version, s.artefact_key}; };
  }
  if (tag == "none" || tag == "all") {
    return [](const CritiqueSheet& s) { return WordFrequencyTable::Key{"all", s.artefact_key}; };
  }
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown grouping tag '{}' (expected appraiser, artefact, catalog or none)", tag));
}

WordFrequencyTable word_frequencies(const std::vector<CritiqueSheet>& sheets, const GroupingFn& grouping,
                                    const HeuristicCatalog& catalog) {
  std::vector<std::string> words;
  for (const auto& e : catalog.lexicon()) words.push_back(e.word);
  WordFrequencyTable table(std::move(words));
  for (const auto& sheet : sheets) {
    if (!sheet.finalized()) continue;
    const auto [group, stimulus] = grouping(sheet);
    table.add(group, stimulus, sheet.overview.circled_words);
  }
  return table;
}

std::string ttest_csv(const TTestResult& result, std::string_view stimulus, std::string_view group1,
                      std::string_view group2, bool header) {
  std::string out = header ? "stimulus,group,mean,sd,n,t,df,p\n" : "";
  auto row = [&](std::string_view group, double mean, double sd, std::size_t n) {
    out += csv::join({std::string(stimulus), std::string(group), number(mean), number(sd), std::to_string(n),
                      number(result.t), number(result.df), number(result.p_two_tailed)});
    out += '\n';
  };
  row(group1, result.mean1, result.sd1, result.n1);
  row(group2, result.mean2, result.sd2, result.n2);
  return out;
}

}  // namespace cds::analytics
