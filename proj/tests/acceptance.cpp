// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "breps/bench.hpp"
#include "breps/cli.hpp"
#include "breps/corpus_io.hpp"
#include "breps/evaluation.hpp"
#include "breps/representation_store.hpp"
#include "breps/scoring.hpp"
#include "breps/segmentation.hpp"
#include "breps/training.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace breps;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::vector<double> descending_weights(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> w(k);
  for (double& x : w) x = dist(rng);
  std::sort(w.begin(), w.end(), std::greater<>());
  return w;
}

// ---------------------------------------------------------------- 1 ----

Outcome aggregation_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> scores(1 + rng() % 6);
    for (double& s : scores) s = dist(rng);
    const auto w = descending_weights(rng, 1 + rng() % 3);
    const double got = aggregate(scores, WeightVector::descending(w));
    worst = std::max(worst, std::abs(got - oracle::sort_and_dot(scores, w)));
  }
  o.require(worst <= 1e-9, "max deviation " + fmt(worst));
  o.detail = o.ok ? "1000 instances, max deviation " + fmt(worst) : o.detail;
  return o;
}

// ---------------------------------------------------------------- 2 ----

Outcome worked_example() {
  Outcome o;
  const double got = aggregate(std::vector<double>{100, 80, 60, 40}, WeightVector::descending_default());
  o.require(got == 86.0, "got " + fmt(got, 17));
  if (o.ok) o.detail = "[100,80,60,40] . [0.5,0.3,0.2] = " + fmt(got);
  return o;
}

// ---------------------------------------------------------------- 3 ----

Outcome segmentation_optimality() {
  Outcome o;
  std::mt19937_64 rng(103);
  static const std::vector<std::string> marks = {".", "!", "?", ";", ":", ",", "。", "，"};
  SegmentationConfig config;
  for (int trial = 0; trial < 500 && o.ok; ++trial) {
    const std::size_t n = rng() % 31;
    config.max_block_tokens = 1 + rng() % 8;
    std::vector<Token> tokens;
    std::vector<double> weights;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 3 == 0) {
        tokens.push_back(Token{marks[rng() % marks.size()], TokenKind::Punct, ""});
      } else {
        tokens.push_back(Token{"w" + std::to_string(rng() % 40), TokenKind::Word, " "});
      }
      weights.push_back(split_weight(tokens.back(), config));
    }
    const auto ends = segment_boundaries(tokens, config);
    const double dp = segmentation_score(tokens, ends, config);
    const double brute = oracle::best_segmentation_score(weights, config.max_block_tokens);
    o.require(std::abs(dp - brute) <= 1e-9, "trial " + std::to_string(trial) + ": dp " + fmt(dp) + " vs " + fmt(brute));
    std::size_t covered = 0;
    for (const Block& b : make_blocks(tokens, ends)) {
      o.require(b.token_count >= 1 && b.token_count <= config.max_block_tokens, "block over cap");
      for (std::size_t i = 0; i < b.token_count; ++i) {
        o.require(b.tokens[i].text == tokens[covered + i].text, "block does not cover input");
      }
      covered += b.token_count;
    }
    o.require(covered == n, "cover length mismatch");
  }
  if (o.ok) o.detail = "500 sequences, DP total equals brute-force maximum";
  return o;
}

// ---------------------------------------------------------------- 4 ----

Outcome scoring_invariances() {
  Outcome o;
  std::mt19937_64 rng(104);
  const auto v = testutil::random_vector(rng, 32);
  const double self = block_score(v, v);
  o.require(std::abs(self - 100.0) <= 1e-4, "self score " + fmt(self, 12));

  std::uniform_real_distribution<float> scale(0.01f, 100.0f);
  double worst_scale = 0.0, worst_perm = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto q = testutil::random_vector(rng, 16);
    auto doc = testutil::random_document(rng, "d", 1 + rng() % 20, 16);
    const double base = score_document(q, doc).score;
    auto scaled = doc;
    for (auto& b : scaled.block_vectors) {
      const float s = scale(rng);
      for (float& x : b.values) x *= s;
    }
    worst_scale = std::max(worst_scale, std::abs(score_document(q, scaled).score - base));
    auto shuffled = doc;
    std::shuffle(shuffled.block_vectors.begin(), shuffled.block_vectors.end(), rng);
    worst_perm = std::max(worst_perm, std::abs(score_document(q, shuffled).score - base));
  }
  o.require(worst_scale <= 1e-5, "scaling moved a score by " + fmt(worst_scale));
  o.require(worst_perm <= 1e-9, "permutation moved a score by " + fmt(worst_perm));

  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> scores(1 + rng() % 20);
    for (double& s : scores) s = dist(rng);
    const auto w = WeightVector::descending(descending_weights(rng, 1 + rng() % 5));
    const double before = aggregate(scores, w);
    scores[rng() % scores.size()] += std::abs(dist(rng));
    violations += aggregate(scores, w) < before;
  }
  o.require(violations == 0, std::to_string(violations) + " monotonicity violations");
  if (o.ok) {
    o.detail = "self " + fmt(self, 10) + ", scale drift " + fmt(worst_scale) + ", permutation drift " +
               fmt(worst_perm) + ", 0 monotonicity violations";
  }
  return o;
}

// ---------------------------------------------------------------- 5 ----

double rel_error(double analytic, double numeric) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= 1e-6) return 0.0;
  return diff / std::max(std::abs(analytic), std::abs(numeric));
}

Outcome loss_gradient_suite() {
  Outcome o;
  o.require(hinge_loss(25, 15, 10) == 0.0 && hinge_loss(40, 5, 10) == 0.0, "hinge not zero past the margin");
  o.require(hinge_loss(2, 5, 10) == 13.0, "hinge(2,5) = " + fmt(hinge_loss(2, 5, 10)));
  o.require(std::abs(ranknet_loss(7, 7, 1) - std::log(2.0)) <= 1e-6, "ranknet at tie");

  std::mt19937_64 rng(105);
  std::normal_distribution<double> noise(0.0, 0.5);
  const double h = 1e-4;
  int heads = 0;
  double worst = 0.0, raw_worst = 0.0;
  for (int trial = 0; heads < 120 && trial < 400; ++trial) {
    TripletInputs inputs{testutil::random_vector(rng, 8), testutil::random_document(rng, "p", 1 + rng() % 5, 8),
                         testutil::random_document(rng, "n", 1 + rng() % 5, 8)};
    ProjectionHead head = ProjectionHead::identity(8, 8);
    for (double& x : head.matrix()) x += noise(rng);
    ScoringOptions scoring;
    scoring.weights = WeightVector::learned({0.5, 0.3, 0.2});
    const LossFunction loss = trial % 2 ? LossFunction{RankNetLoss{0.05}} : LossFunction{HingeLoss{500.0}};
    const auto grad = triplet_gradient(inputs, head, scoring, loss);
    std::vector<double> errors;
    bool stable = true;
    for (std::size_t i = 0; i < head.matrix().size() && stable; ++i) {
      ProjectionHead plus = head, minus = head;
      plus.matrix()[i] += h;
      minus.matrix()[i] -= h;
      const auto fp = triplet_forward(inputs, plus, scoring, loss);
      const auto fm = triplet_forward(inputs, minus, scoring, loss);
      stable = fp.pos_top_blocks == grad.forward.pos_top_blocks && fm.pos_top_blocks == grad.forward.pos_top_blocks &&
               fp.neg_top_blocks == grad.forward.neg_top_blocks && fm.neg_top_blocks == grad.forward.neg_top_blocks;
      errors.push_back(rel_error(grad.head[i], (fp.loss - fm.loss) / (2 * h)));
    }
    if (!stable) continue;
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<double> wp = {0.5, 0.3, 0.2}, wm = wp;
      wp[j] += h;
      wm[j] -= h;
      ScoringOptions sp = scoring, sm = scoring;
      sp.weights = WeightVector::learned(wp);
      sm.weights = WeightVector::learned(wm);
      const double numeric =
          (triplet_forward(inputs, head, sp, loss).loss - triplet_forward(inputs, head, sm, loss).loss) / (2 * h);
      errors.push_back(rel_error(grad.weights[j], numeric));
    }
    for (double e : errors) worst = std::max(worst, e);
    for (std::size_t i = 0; i < grad.head.size(); ++i) {
      ProjectionHead plus = head, minus = head;
      plus.matrix()[i] += h;
      minus.matrix()[i] -= h;
      const double numeric =
          (triplet_forward(inputs, plus, scoring, loss).loss - triplet_forward(inputs, minus, scoring, loss).loss) /
          (2 * h);
      const double scale = std::max(std::abs(grad.head[i]), std::abs(numeric));
      if (scale > 1e-3) raw_worst = std::max(raw_worst, std::abs(grad.head[i] - numeric) / scale);
    }
    ++heads;
  }
  o.require(heads >= 100, "only " + std::to_string(heads) + " heads checked");
  o.require(worst <= 1e-3, "max relative gradient error " + fmt(worst));
  if (o.ok) o.detail = std::to_string(heads) + " heads (D=8), max relative error " + fmt(worst) +
                       " (unfloored " + fmt(raw_worst, 3) + " over entries with |g| > 1e-3)";
  return o;
}

// ---------------------------------------------------------------- 6 ----

// Ten topics, each with its own four-word vocabulary. A triplet's positive
// document talks about its topic in one sentence; the negative mentions a
// single topic word. Thirty distractors share only background words.
struct LearningFixture {
  std::vector<CorpusRecord> corpus;
  std::vector<TrainingTriplet> triplets;
};

LearningFixture learning_fixture() {
  std::mt19937_64 rng(106);
  auto background = [&](std::size_t words) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) out += (i ? " " : "") + ("bg" + std::to_string(rng() % 60));
    return out;
  };
  auto topic_word = [](int t, int j) { return "topic" + std::to_string(t) + "word" + std::to_string(j); };
  LearningFixture f;
  for (int t = 0; t < 10; ++t) {
    const std::string query = topic_word(t, 0) + " " + topic_word(t, 1) + " " + topic_word(t, 2) + " " + topic_word(t, 3);
    std::string pos = background(10) + ". " + topic_word(t, 0) + " " + topic_word(t, 1) + " " + background(6) + ". " +
                      background(8) + ".";
    std::string neg = background(10) + ". " + topic_word(t, 2) + " " + background(7) + ". " + background(8) + ".";
    f.corpus.push_back({"pos" + std::to_string(t), pos, std::nullopt});
    f.corpus.push_back({"neg" + std::to_string(t), neg, std::nullopt});
    f.triplets.push_back({query, "pos" + std::to_string(t), "neg" + std::to_string(t)});
  }
  for (int i = 0; i < 30; ++i) {
    f.corpus.push_back({"other" + std::to_string(i), background(12) + ". " + background(9) + ".", std::nullopt});
  }
  return f;
}

Outcome desk_scale_learning() {
  Outcome o;
  testutil::TempDir dir;
  const LearningFixture f = learning_fixture();
  HashingEmbedder embedder(64, 2024);
  IndexOptions index;
  index.created_unix_seconds = 0;
  build_index(f.corpus, embedder, dir / "store.bin", index);
  const Store store = Store::open(dir / "store.bin");
  o.require(store.doc_count() == 50, "store holds " + std::to_string(store.doc_count()) + " documents");

  std::vector<TripletInputs> data;
  for (const auto& t : f.triplets) data.push_back(resolve_triplet(t, store, embedder));

  TrainingConfig config;
  config.loss = HingeLoss{10.0};
  config.learning_rate = 1e-3;
  config.steps = 200;
  const ProjectionHead initial = ProjectionHead::near_identity(64, 64, 7);
  const double before = mean_loss(data, initial, config.scoring, config.loss);
  const TrainingResult result = train(data, initial, config);
  const double after = mean_loss(data, result.head, config.scoring, config.loss);
  o.require(after < before, "mean hinge loss " + fmt(before) + " -> " + fmt(after));

  int margin_met = 0, ordered = 0;
  for (const auto& inputs : data) {
    const auto fwd = triplet_forward(inputs, result.head, config.scoring, config.loss);
    margin_met += fwd.s_pos - fwd.s_neg >= 10.0;
    ordered += fwd.s_pos > fwd.s_neg;
  }
  o.require(ordered == 10, std::to_string(ordered) + "/10 positives above negatives");
  o.require(margin_met >= 9, "margin met on " + std::to_string(margin_met) + "/10");
  if (o.ok) {
    o.detail = "mean hinge " + fmt(before, 4) + " -> " + fmt(after, 4) + ", margin met on " +
               std::to_string(margin_met) + "/10";
  }
  return o;
}

// ---------------------------------------------------------------- 7 ----

Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Qrels qrels;
    breps::Run run;
    std::vector<int> ranked, judged;
    std::size_t relevant = 0;
    std::vector<std::string> docs;
    for (int i = 0; i < 8; ++i) docs.push_back("d" + std::to_string(i));
    std::shuffle(docs.begin(), docs.end(), rng);
    for (int i = 0; i < 8; ++i) {
      const int g = static_cast<int>(rng() % 4);
      if (rng() % 5) {
        qrels.set("q", docs[i], g);
        judged.push_back(g);
        relevant += g > 0;
      }
      run.append("q", {docs[i], 8.0 - i});
      ranked.push_back(qrels.grade("q", docs[i]));
    }
    for (std::size_t k : {1, 5, 10}) {
      worst = std::max(worst, std::abs(ndcg_at_k(run, qrels, k).mean - oracle::ndcg_by_permutation(ranked, judged, k)));
      worst = std::max(worst, std::abs(precision_at_k(run, qrels, k).mean - oracle::precision_at(ranked, k)));
    }
    worst = std::max(worst, std::abs(average_precision(run, qrels).mean - oracle::average_precision(ranked, relevant)));
  }
  o.require(worst <= 1e-9, "metric deviation " + fmt(worst));
  const std::vector<double> a = {1, 2, 3, 4, 5}, zero(5, 0.0);
  const auto t = paired_t_test(a, zero);
  o.require(std::abs(t.t_statistic - 4.2426) <= 1e-4, "t = " + fmt(t.t_statistic));
  o.require(std::abs(t.p_value - 0.0132) <= 5e-4, "p = " + fmt(t.p_value));
  if (o.ok) {
    o.detail = "500 instances, max deviation " + fmt(worst) + "; t = " + fmt(t.t_statistic, 6) +
               ", p = " + fmt(t.p_value, 4);
  }
  return o;
}

// ---------------------------------------------------------------- 8 ----

std::vector<CorpusRecord> text_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  static const char* vocab[] = {"alpha", "beta", "gamma", "delta", "river", "stone", "cloud", "paper", "light", "north"};
  static const char* marks[] = {".", ",", "!", ";", "?"};
  std::vector<CorpusRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const std::size_t words = 5 + rng() % 400;
    for (std::size_t w = 0; w < words; ++w) {
      text += vocab[rng() % 10];
      text += rng() % 9 == 0 ? std::string(marks[rng() % 5]) + " " : " ";
    }
    out.push_back({"doc" + std::to_string(i), text, std::nullopt});
  }
  return out;
}

Outcome store_round_trip() {
  Outcome o;
  testutil::TempDir dir;
  std::mt19937_64 rng(108);
  std::vector<StoredDocument> docs;
  for (int i = 0; i < 1000; ++i) docs.push_back(testutil::random_document(rng, "doc-" + std::to_string(i), rng() % 21, 48));
  write_store(dir / "a.bin", docs, 48, 1700000000);
  const Store store = Store::open(dir / "a.bin");
  o.require(store.doc_count() == 1000, "doc count");
  std::vector<StoredDocument> back;
  for (const auto& doc : docs) {
    const auto got = store.get(doc.doc_id);
    o.require(got.has_value(), "missing " + doc.doc_id);
    if (!got) break;
    o.require(got->block_vectors.size() == doc.block_vectors.size(), "block count for " + doc.doc_id);
    for (std::size_t j = 0; j < doc.block_vectors.size() && o.ok; ++j) {
      o.require(std::memcmp(got->block_vectors[j].values.data(), doc.block_vectors[j].values.data(),
                            48 * sizeof(float)) == 0,
                "vector bits differ in " + doc.doc_id);
    }
    back.push_back(*got);
  }
  write_store(dir / "b.bin", back, 48, 1700000000);
  o.require(testutil::read_file(dir / "a.bin") == testutil::read_file(dir / "b.bin"), "rewrite is not byte-identical");

  const auto corpus = text_corpus(300, 18);
  HashingEmbedder embedder(32);
  IndexOptions serial, parallel;
  serial.created_unix_seconds = parallel.created_unix_seconds = 1;
  parallel.parallelism = 8;
  build_index(corpus, embedder, dir / "p1.bin", serial);
  build_index(corpus, embedder, dir / "p8.bin", parallel);
  o.require(testutil::read_file(dir / "p1.bin") == testutil::read_file(dir / "p8.bin"),
            "parallelism 1 and 8 payloads differ");
  if (o.ok) o.detail = "1000 documents bit-identical; 300-document index identical at parallelism 1 and 8";
  return o;
}

// ---------------------------------------------------------------- 9 ----

Outcome efficiency() {
  Outcome o;
  const std::uint64_t blockwise = 20 * embedding_cost(63);
  const std::uint64_t whole = embedding_cost(1260);
  o.require(blockwise * 20 == whole, "20*63^2 / 1260^2 is not 1/20");
  o.require(static_cast<double>(blockwise) / static_cast<double>(whole) == 0.05, "ratio is not 0.05");

  testutil::TempDir dir;
  const auto corpus = text_corpus(100, 19);
  QuadraticCostEmbedder embedder(32);
  const BenchReport r = run_bench(corpus, SegmentationConfig{}, embedder, dir / "scratch.bin");
  o.require(r.blockwise_seconds < r.whole_seconds,
            "blockwise " + fmt(r.blockwise_seconds) + " s vs whole " + fmt(r.whole_seconds) + " s");
  if (o.ok) {
    o.detail = "modeled ratio 0.05; measured blockwise " + fmt(r.blockwise_seconds, 3) + " s < whole " +
               fmt(r.whole_seconds, 3) + " s";
  }
  return o;
}

// ---------------------------------------------------------------- 10 ---

int cli(std::vector<std::string> args, std::string* err = nullptr) {
  std::ostringstream out, e;
  const int code = cli::run(args, out, e);
  if (err) *err = e.str();
  return code;
}

Outcome experiment_switches() {
  Outcome o;
  testutil::TempDir dir;
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  // "late" holds the query's own words in its sixth sentence only.
  testutil::write_file(dir / "corpus.jsonl",
                       nlohmann::json{{"doc_id", "late"},
                                      {"text", "Rivers flow north. Clouds drift east. Stones sit still. Paper burns "
                                               "fast. Light bends. Quantum tunnelling explains alpha decay rates."}}
                               .dump() +
                           "\n" +
                           nlohmann::json{{"doc_id", "steady"},
                                          {"text", "Alpha decay emits particles. Quantum effects matter here."}}
                               .dump() +
                           "\n");
  testutil::write_file(dir / "queries.jsonl", "{\"query_id\":\"q\",\"text\":\"quantum tunnelling alpha decay rates\"}\n");
  testutil::write_file(dir / "cands.run", "q Q0 steady 1 2 bm25\nq Q0 late 2 1 bm25\n");
  std::string err;
  o.require(cli({"index", "--corpus", p("corpus.jsonl"), "--out-store", p("s.bin")}, &err) == 0, "index: " + err);
  const std::vector<std::string> rr = {"rerank", "--queries", p("queries.jsonl"), "--candidates", p("cands.run"),
                                       "--store", p("s.bin")};
  auto with = [&](std::vector<std::string> extra) {
    auto args = rr;
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };
  o.require(cli(with({"--out-run", p("all.run")}), &err) == 0, "rerank: " + err);
  o.require(cli(with({"--out-run", p("two.run"), "--blocks", "2"}), &err) == 0, "rerank --blocks 2: " + err);
  const auto all = load_run(p("all.run"));
  const auto two = load_run(p("two.run"));
  o.require(testutil::read_file(p("all.run")) != testutil::read_file(p("two.run")), "--blocks did not change output");
  o.require(all.ranking("q") && all.ranking("q")->front().doc_id == "late", "late document not first with all blocks");
  o.require(two.ranking("q") && two.ranking("q")->front().doc_id == "steady", "late document still first with 2 blocks");

  testutil::write_file(dir / "fixed.json",
                       "{\"segmentation\":{\"strategy\":\"fixed\",\"fixed_length\":4},"
                       "\"scoring\":{\"weights_mode\":\"average\"}}");
  o.require(cli({"index", "--corpus", p("corpus.jsonl"), "--out-store", p("f.bin"), "--config", p("fixed.json")}, &err) == 0,
            "fixed-length index: " + err);
  o.require(cli(with({"--out-run", p("fixed.run"), "--config", p("fixed.json")}), &err) == 0,
            "fixed-length rerank: " + err);
  const auto fixed = load_run(p("fixed.run"));
  o.require(fixed.ranking("q") && fixed.ranking("q")->size() == 2, "fixed-length run file incomplete");
  o.require(Store::open(p("f.bin")).get("late")->block_vectors.size() > 6, "fixed-length blocks not used");

  const Representation q{{1, 0, 0}};
  const StoredDocument doc{"d", {Representation{{1, 0, 0}}, Representation{{1, 1, 0}}, Representation{{1, 1, 1}},
                                 Representation{{0, 1, 0}}}};
  ScoringOptions descending, average;
  average.weights = WeightVector::average(3);
  const double ds = score_document(q, doc, descending).score;
  const double as = score_document(q, doc, average).score;
  o.require(ds != as, "descending and average scores coincide");
  if (o.ok) {
    o.detail = "--blocks 2 demotes the late match; fixed-length + average run valid; descending " + fmt(ds, 5) +
               " vs average " + fmt(as, 5);
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "aggregation oracle", 1.0, aggregation_oracle},
      {2, "worked aggregation example", 1.0, worked_example},
      {3, "segmentation optimality", 10.0, segmentation_optimality},
      {4, "scoring invariances", 30.0, scoring_invariances},
      {5, "loss and gradient suite", 30.0, loss_gradient_suite},
      {6, "desk-scale learning", 60.0, desk_scale_learning},
      {7, "metric oracles and t-test", 30.0, metric_oracles},
      {8, "store round trip", 60.0, store_round_trip},
      {9, "efficiency cost model", 120.0, efficiency},
      {10, "experiment switches", 30.0, experiment_switches},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.ok && seconds >= c.limit_seconds) {
      outcome.ok = false;
      outcome.detail = "took " + fmt(seconds, 3) + " s, limit " + fmt(c.limit_seconds) + " s";
    }
    failed += !outcome.ok;
    std::cout << (outcome.ok ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << ", "
              << fmt(seconds, 3) << " s): " << outcome.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
