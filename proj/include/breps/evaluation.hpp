#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace breps {

/// Relevance judgments: query_id -> doc_id -> grade. Absent pairs are grade 0.
class Qrels {
 public:
  void set(const std::string& query_id, const std::string& doc_id, int grade);
  int grade(const std::string& query_id, const std::string& doc_id) const;
  bool has_query(const std::string& query_id) const;
  /// Query ids in ascending order.
  std::vector<std::string> query_ids() const;
  /// Every judged grade for a query (including zeros).
  std::vector<int> grades(const std::string& query_id) const;
  std::size_t relevant_count(const std::string& query_id) const;

 private:
  std::map<std::string, std::map<std::string, int>> judgments_;
};

struct RankedDoc {
  std::string doc_id;
  double score = 0.0;
};

/// query_id -> ranked list, best first.
class Run {
 public:
  /// Appends in rank order. Throws MalformedLine on a duplicate doc_id.
  void append(const std::string& query_id, RankedDoc doc);
  const std::vector<RankedDoc>* ranking(const std::string& query_id) const;
  std::vector<std::string> query_ids() const;
  const std::map<std::string, std::vector<RankedDoc>>& rankings() const noexcept { return rankings_; }

 private:
  std::map<std::string, std::vector<RankedDoc>> rankings_;
};

Qrels parse_qrels(std::istream& in);
Qrels load_qrels(const std::filesystem::path& path);

/// Reads "qid Q0 docid rank score tag" lines; each query's list is ordered by
/// the rank column (file order breaks ties).
Run parse_run(std::istream& in);
Run load_run(const std::filesystem::path& path);

/// Writes ranks 1..n with six-decimal scores.
void write_run(std::ostream& out, const Run& run, const std::string& tag = "breps");
void save_run(const std::filesystem::path& path, const Run& run, const std::string& tag = "breps");

struct MetricResult {
  std::string name;
  std::map<std::string, double> per_query;  // over every query in the qrels
  double mean = 0.0;
  std::vector<std::string> skipped_queries;  // in the run, not in the qrels
};

MetricResult precision_at_k(const Run& run, const Qrels& qrels, std::size_t k);
MetricResult average_precision(const Run& run, const Qrels& qrels);
/// k == nullopt evaluates over the full retrieved list.
MetricResult ndcg_at_k(const Run& run, const Qrels& qrels, std::optional<std::size_t> k);

/// Parses names like "ndcg@10", "ndcg", "map", "p@1". Throws InvalidArgument.
MetricResult evaluate_metric(const std::string& name, const Run& run, const Qrels& qrels);

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  std::size_t degrees_of_freedom = 0;
  bool zero_variance = false;
};

/// Two-sided paired t-test on a - b. Throws InvalidArgument unless both
/// inputs have the same length >= 2.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta function I_x(a, b).
double regularized_incomplete_beta(double x, double a, double b);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees.
double student_t_two_sided_p(double t, double df);

}  // namespace breps
