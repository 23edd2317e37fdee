#include "breps/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "breps/error.hpp"

namespace breps {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string field; in >> field;) out.push_back(std::move(field));
  return out;
}

template <typename Fn>
MetricResult per_query_metric(std::string name, const Run& run, const Qrels& qrels, Fn&& fn) {
  MetricResult result;
  result.name = std::move(name);
  static const std::vector<RankedDoc> kEmpty;
  for (const std::string& qid : qrels.query_ids()) {
    const auto* ranking = run.ranking(qid);
    result.per_query[qid] = fn(qid, ranking ? *ranking : kEmpty);
  }
  for (const std::string& qid : run.query_ids()) {
    if (!qrels.has_query(qid)) result.skipped_queries.push_back(qid);
  }
  if (!result.per_query.empty()) {
    double total = 0.0;
    for (const auto& [qid, v] : result.per_query) total += v;
    result.mean = total / static_cast<double>(result.per_query.size());
  }
  return result;
}

double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }

double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

// ----------------------------------------------------------------- qrels ---

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
  if (grade < 0) throw Error(Errc::InvalidArgument, "relevance grades must be >= 0");
  judgments_[query_id][doc_id] = grade;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
  const auto q = judgments_.find(query_id);
  if (q == judgments_.end()) return 0;
  const auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

bool Qrels::has_query(const std::string& query_id) const { return judgments_.contains(query_id); }

std::vector<std::string> Qrels::query_ids() const {
  std::vector<std::string> out;
  for (const auto& [qid, docs] : judgments_) out.push_back(qid);
  return out;
}

std::vector<int> Qrels::grades(const std::string& query_id) const {
  std::vector<int> out;
  if (const auto q = judgments_.find(query_id); q != judgments_.end()) {
    for (const auto& [doc, grade] : q->second) out.push_back(grade);
  }
  return out;
}

std::size_t Qrels::relevant_count(const std::string& query_id) const {
  const auto g = grades(query_id);
  return static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](int x) { return x > 0; }));
}

Qrels parse_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 4) {
      throw Error(Errc::MalformedLine, "qrels line " + std::to_string(number) + ": expected 4 fields");
    }
    int grade = 0;
    try {
      std::size_t used = 0;
      grade = std::stoi(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(Errc::MalformedLine, "qrels line " + std::to_string(number) + ": bad grade '" + fields[3] + "'");
    }
    // Negative grades (some collections mark spam with -1) count as non-relevant.
    qrels.set(fields[0], fields[2], std::max(grade, 0));
  }
  return qrels;
}

Qrels load_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "qrels not found: " + path.string());
  return parse_qrels(in);
}

// ------------------------------------------------------------------- run ---

void Run::append(const std::string& query_id, RankedDoc doc) {
  auto& list = rankings_[query_id];
  for (const RankedDoc& existing : list) {
    if (existing.doc_id == doc.doc_id) {
      throw Error(Errc::MalformedLine, "doc '" + doc.doc_id + "' ranked twice for query '" + query_id + "'");
    }
  }
  list.push_back(std::move(doc));
}

const std::vector<RankedDoc>* Run::ranking(const std::string& query_id) const {
  const auto it = rankings_.find(query_id);
  return it == rankings_.end() ? nullptr : &it->second;
}

std::vector<std::string> Run::query_ids() const {
  std::vector<std::string> out;
  for (const auto& [qid, list] : rankings_) out.push_back(qid);
  return out;
}

Run parse_run(std::istream& in) {
  struct Line {
    long rank;
    std::size_t order;
    RankedDoc doc;
  };
  std::map<std::string, std::vector<Line>> grouped;
  std::string line;
  std::size_t order = 0;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 6) {
      throw Error(Errc::MalformedLine, "run line " + std::to_string(number) + ": expected 6 fields");
    }
    Line parsed{0, order++, RankedDoc{fields[2], 0.0}};
    try {
      std::size_t used = 0;
      parsed.rank = std::stol(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("rank");
      parsed.doc.score = std::stod(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument("score");
    } catch (const std::exception&) {
      throw Error(Errc::MalformedLine, "run line " + std::to_string(number) + ": bad rank or score");
    }
    grouped[fields[0]].push_back(std::move(parsed));
  }
  Run run;
  for (auto& [qid, lines] : grouped) {
    std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.rank < b.rank; });
    for (Line& l : lines) run.append(qid, std::move(l.doc));
  }
  return run;
}

Run load_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "run file not found: " + path.string());
  return parse_run(in);
}

void write_run(std::ostream& out, const Run& run, const std::string& tag) {
  char score[64];
  for (const auto& [qid, list] : run.rankings()) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::snprintf(score, sizeof score, "%.6f", list[i].score);
      out << qid << " Q0 " << list[i].doc_id << ' ' << (i + 1) << ' ' << score << ' ' << tag << '\n';
    }
  }
}

void save_run(const std::filesystem::path& path, const Run& run, const std::string& tag) {
  std::ofstream out(path, std::ios::trunc);
  write_run(out, run, tag);
  if (!out) throw Error(Errc::IoError, "cannot write run file " + path.string());
}

// --------------------------------------------------------------- metrics ---

MetricResult precision_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  if (k == 0) throw Error(Errc::InvalidArgument, "P@k needs k >= 1");
  return per_query_metric("P@" + std::to_string(k), run, qrels,
                          [&](const std::string& qid, const std::vector<RankedDoc>& ranking) {
                            std::size_t hits = 0;
                            for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
                              if (qrels.grade(qid, ranking[i].doc_id) > 0) ++hits;
                            }
                            return static_cast<double>(hits) / static_cast<double>(k);
                          });
}

MetricResult average_precision(const Run& run, const Qrels& qrels) {
  return per_query_metric("MAP", run, qrels, [&](const std::string& qid, const std::vector<RankedDoc>& ranking) {
    const std::size_t relevant = qrels.relevant_count(qid);
    if (relevant == 0) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      if (qrels.grade(qid, ranking[i].doc_id) > 0) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
      }
    }
    return sum / static_cast<double>(relevant);
  });
}

MetricResult ndcg_at_k(const Run& run, const Qrels& qrels, std::optional<std::size_t> k) {
  if (k && *k == 0) throw Error(Errc::InvalidArgument, "NDCG@k needs k >= 1");
  std::string name = k ? "NDCG@" + std::to_string(*k) : "NDCG";
  return per_query_metric(std::move(name), run, qrels, [&](const std::string& qid, const std::vector<RankedDoc>& ranking) {
    const std::size_t depth = k ? std::min(*k, ranking.size()) : ranking.size();
    double dcg = 0.0;
    for (std::size_t i = 0; i < depth; ++i) dcg += gain(qrels.grade(qid, ranking[i].doc_id)) * discount(i + 1);
    auto ideal = qrels.grades(qid);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const std::size_t ideal_depth = k ? std::min(*k, ideal.size()) : ideal.size();
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal_depth; ++i) idcg += gain(ideal[i]) * discount(i + 1);
    return idcg > 0.0 ? dcg / idcg : 0.0;
  });
}

MetricResult evaluate_metric(const std::string& name, const Run& run, const Qrels& qrels) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  const auto at = lower.find('@');
  const std::string base = lower.substr(0, at);
  std::optional<std::size_t> cutoff;
  if (at != std::string::npos) {
    try {
      std::size_t used = 0;
      const long value = std::stol(lower.substr(at + 1), &used);
      if (used != lower.size() - at - 1 || value < 1) throw std::invalid_argument("cutoff");
      cutoff = static_cast<std::size_t>(value);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidArgument, "bad metric cutoff in '" + name + "'");
    }
  }
  if (base == "ndcg") return ndcg_at_k(run, qrels, cutoff);
  if (base == "map" && !cutoff) return average_precision(run, qrels);
  if (base == "p" && cutoff) return precision_at_k(run, qrels, *cutoff);
  throw Error(Errc::InvalidArgument, "unknown metric '" + name + "' (use ndcg, ndcg@k, map, p@k)");
}

// ---------------------------------------------------------- significance ---

double regularized_incomplete_beta(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The continued fraction converges fast for x < (a + 1) / (a + b + 2).
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::InvalidArgument, "paired t-test needs equal-length inputs");
  const std::size_t n = a.size();
  if (n < 2) throw Error(Errc::InvalidArgument, "paired t-test needs at least 2 pairs");
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (const double d : diff) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult result;
  result.degrees_of_freedom = n - 1;
  const double scale = std::max(1.0, std::abs(mean));
  if (sd <= 1e-15 * scale) {
    result.zero_variance = true;
    if (mean == 0.0) {
      result.t_statistic = 0.0;
      result.p_value = 1.0;
    } else {
      result.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), mean);
      result.p_value = 0.0;
    }
    return result;
  }
  result.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p_value = student_t_two_sided_p(result.t_statistic, static_cast<double>(n - 1));
  return result;
}

}  // namespace breps
