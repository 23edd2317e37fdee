#include "breps/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <ostream>
#include <unordered_map>

#include "breps/bench.hpp"
#include "breps/config.hpp"
#include "breps/corpus_io.hpp"
#include "breps/error.hpp"
#include "breps/evaluation.hpp"
#include "breps/projection_head.hpp"
#include "breps/representation_store.hpp"
#include "breps/scoring.hpp"
#include "breps/training.hpp"

namespace breps::cli {
namespace {

using nlohmann::json;

struct Context {
  std::ostream& out;
  std::ostream& err;
};

EngineConfig load_config(const std::string& path) {
  if (!path.empty()) return EngineConfig::load(path);
  EngineConfig config = EngineConfig::defaults();
  if (const char* url = std::getenv("BREPS_EMBED_URL"); url != nullptr && *url != '\0') {
    config.apply_url_override(url);
  }
  return config;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidConfig:
      return kExitUsage;
    case Errc::ServiceUnavailable:
      return kExitEnvironment;
    default:
      return kExitData;
  }
}

// ------------------------------------------------------------------ index ---

struct IndexArgs {
  std::string corpus, store, config;
  std::size_t parallelism = 0;
};

int cmd_index(const IndexArgs& a, Context& ctx) {
  const EngineConfig config = load_config(a.config);
  const auto embedder = config.make_embedder();
  CorpusReader reader(a.corpus);
  IndexOptions options;
  options.segmentation = config.segmentation;
  options.parallelism = a.parallelism > 0 ? a.parallelism : config.parallelism;
  const IndexStats stats = build_index(reader, *embedder, a.store, options);
  ctx.out << json{{"doc_count", stats.summary.doc_count},
                  {"block_count", stats.summary.block_count},
                  {"block_tokens", stats.block_tokens},
                  {"seconds", stats.wall_seconds}}
                 .dump()
          << '\n';
  ctx.err << "indexed " << stats.summary.doc_count << " documents into " << stats.summary.block_count
          << " blocks (" << a.store << ")\n";
  return kExitOk;
}

// ----------------------------------------------------------------- rerank ---

struct RerankArgs {
  std::string queries, candidates, store, out_run, config, head;
  std::size_t blocks = 0;
  std::size_t parallelism = 0;
};

int cmd_rerank(const RerankArgs& a, Context& ctx) {
  const EngineConfig config = load_config(a.config);
  const Store store = Store::open(a.store);
  const auto embedder = config.make_embedder();
  if (embedder->dim() != store.dim()) {
    throw Error(Errc::DimensionMismatch, "config dim " + std::to_string(embedder->dim()) +
                                             " does not match store dim " + std::to_string(store.dim()));
  }
  const Run candidates = load_run(a.candidates);
  const auto queries = load_queries(a.queries);

  json report = {{"missing", json::array()},
                 {"no_blocks", json::array()},
                 {"queries_without_text", json::array()},
                 {"warnings", json::array()}};

  RerankOptions options;
  options.parallelism = a.parallelism > 0 ? a.parallelism : config.parallelism;
  options.scoring.weights = config.make_weights();
  options.scoring.temperature = config.scoring.temperature;
  options.scoring.block_limit = config.scoring.inference_blocks;
  if (a.blocks > 0) options.scoring.block_limit = a.blocks;
  if (options.scoring.block_limit) {
    const std::size_t limit = *options.scoring.block_limit;
    if (limit > store.max_blocks_per_document() || limit > config.segmentation.max_blocks) {
      const std::string warning = "--blocks " + std::to_string(limit) + " exceeds the " +
                                  std::to_string(std::min(store.max_blocks_per_document(),
                                                          config.segmentation.max_blocks)) +
                                  " blocks available per document; stored blocks are the cap";
      ctx.err << "warning: " << warning << '\n';
      report["warnings"].push_back(warning);
    }
  }
  std::optional<ProjectionHead> head;
  const std::string head_path = !a.head.empty() ? a.head : config.scoring.head_file.string();
  if (!head_path.empty()) {
    head = load_head(head_path).head;
    if (head->input_dim() != store.dim()) {
      throw Error(Errc::DimensionMismatch, "head input dim " + std::to_string(head->input_dim()) +
                                               " does not match store dim " + std::to_string(store.dim()));
    }
    options.scoring.head = &*head;
  }

  std::unordered_map<std::string, std::string> query_text;
  for (const QueryRecord& q : queries) query_text.emplace(q.query_id, q.text);

  // Embed every needed query in one batched call.
  std::vector<std::string> qids, texts;
  for (const std::string& qid : candidates.query_ids()) {
    const auto it = query_text.find(qid);
    if (it == query_text.end()) {
      report["queries_without_text"].push_back(qid);
      ctx.err << "warning: no text for query '" << qid << "'; skipped\n";
      continue;
    }
    qids.push_back(qid);
    texts.push_back(it->second);
  }
  const auto vectors = embedder->embed(texts, EmbedderKind::Query);

  Run output;
  for (std::size_t i = 0; i < qids.size(); ++i) {
    std::vector<std::string> ids;
    for (const RankedDoc& doc : *candidates.ranking(qids[i])) ids.push_back(doc.doc_id);
    const auto ranked = rerank(vectors[i], ids, store, options);
    for (const RerankEntry& entry : ranked) {
      if (entry.status == RerankStatus::Missing) {
        report["missing"].push_back({{"query_id", qids[i]}, {"doc_id", entry.scored.doc_id}});
      } else if (entry.status == RerankStatus::NoBlocks) {
        report["no_blocks"].push_back({{"query_id", qids[i]}, {"doc_id", entry.scored.doc_id}});
      }
    }
    // Unscored documents keep their position but need a finite score in the
    // file: one below the last scored document, stepping down.
    double floor_score = 0.0;
    bool have_scored = false;
    for (const RerankEntry& entry : ranked) {
      if (entry.status == RerankStatus::Scored) {
        floor_score = have_scored ? std::min(floor_score, entry.scored.score) : entry.scored.score;
        have_scored = true;
      }
    }
    for (const RerankEntry& entry : ranked) {
      double score = entry.scored.score;
      if (entry.status != RerankStatus::Scored) score = (floor_score -= 1.0);
      output.append(qids[i], RankedDoc{entry.scored.doc_id, score});
    }
  }
  save_run(a.out_run, output);
  {
    std::ofstream sidecar(a.out_run + ".report.json", std::ios::trunc);
    sidecar << report.dump(2) << '\n';
  }
  ctx.err << "reranked " << qids.size() << " queries; " << report["missing"].size()
          << " candidates missing from the store\n";
  return kExitOk;
}

// ------------------------------------------------------------------ train ---

struct TrainArgs {
  std::string triplets, queries, store, out_head, config, loss_curve;
  std::optional<std::size_t> steps;
};

int cmd_train(const TrainArgs& a, Context& ctx) {
  EngineConfig config = load_config(a.config);
  if (a.steps) config.training.steps = *a.steps;
  const Store store = Store::open(a.store);
  const auto embedder = config.make_embedder();
  if (embedder->dim() != store.dim()) {
    throw Error(Errc::DimensionMismatch, "config dim " + std::to_string(embedder->dim()) +
                                             " does not match store dim " + std::to_string(store.dim()));
  }
  std::unordered_map<std::string, std::string> query_text;
  for (const QueryRecord& q : load_queries(a.queries)) query_text.emplace(q.query_id, q.text);

  std::vector<TripletInputs> data;
  for (const TripletRecord& t : load_triplets(a.triplets)) {
    const auto it = query_text.find(t.query_id);
    if (it == query_text.end()) throw Error(Errc::MissingDocument, "no text for query '" + t.query_id + "'");
    data.push_back(resolve_triplet(TrainingTriplet{it->second, t.positive_doc_id, t.negative_doc_id}, store,
                                   *embedder));
  }
  if (data.empty()) throw Error(Errc::InvalidArgument, "triplet file is empty");

  const TrainingConfig training = config.make_training_config();
  ProjectionHead initial = ProjectionHead::near_identity(
      store.dim(), config.training.output_dim.value_or(store.dim()), config.training.seed,
      config.training.init_noise);
  const double initial_loss = mean_loss(data, initial, training.scoring, training.loss);
  TrainingResult result = train(data, std::move(initial), training);
  ScoringOptions final_scoring = training.scoring;
  final_scoring.weights = result.weights;
  const double final_loss = mean_loss(data, result.head, final_scoring, training.loss);

  std::optional<std::vector<double>> learned;
  if (config.training.learn_weights) {
    learned = std::vector<double>(result.weights.values().begin(), result.weights.values().end());
  }
  save_head(a.out_head, result.head, learned);

  const std::string curve_path = a.loss_curve.empty() ? a.out_head + ".loss.tsv" : a.loss_curve;
  std::ofstream curve(curve_path, std::ios::trunc);
  curve << "step\tloss\n";
  char buf[64];
  for (std::size_t i = 0; i < result.loss_curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", result.loss_curve[i]);
    curve << (i + 1) << '\t' << buf << '\n';
  }
  if (!curve) throw Error(Errc::IoError, "cannot write loss curve " + curve_path);

  ctx.out << json{{"triplets", data.size()},
                  {"steps", training.steps},
                  {"loss", config.training.loss},
                  {"initial_mean_loss", initial_loss},
                  {"final_mean_loss", final_loss}}
                 .dump()
          << '\n';
  ctx.err << "trained " << training.steps << " steps: mean loss " << initial_loss << " -> " << final_loss << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------- eval ---

struct EvalArgs {
  std::string run, qrels, baseline;
  std::vector<std::string> metrics;
};

int cmd_eval(const EvalArgs& a, Context& ctx) {
  const Qrels qrels = load_qrels(a.qrels);
  const Run run = load_run(a.run);
  std::optional<Run> baseline;
  if (!a.baseline.empty()) baseline = load_run(a.baseline);

  json report = {{"metrics", json::object()}};
  std::vector<std::string> skipped;
  std::ostringstream table;
  table << std::left << std::setw(10) << "metric" << std::right << std::setw(10) << "mean";
  if (baseline) table << std::setw(10) << "baseline" << std::setw(10) << "t" << std::setw(10) << "p";
  table << '\n';

  for (const std::string& name : a.metrics) {
    const MetricResult result = evaluate_metric(name, run, qrels);
    skipped = result.skipped_queries;
    report["metrics"][name] = {{"mean", result.mean}, {"per_query", result.per_query}};
    table << std::left << std::setw(10) << result.name << std::right << std::fixed << std::setprecision(4)
          << std::setw(10) << result.mean;
    if (baseline) {
      const MetricResult base = evaluate_metric(name, *baseline, qrels);
      std::vector<double> xs, ys;
      for (const auto& [qid, v] : result.per_query) {
        xs.push_back(v);
        ys.push_back(base.per_query.at(qid));
      }
      json sig = {{"baseline_mean", base.mean}};
      if (xs.size() >= 2) {
        const TTestResult t = paired_t_test(xs, ys);
        sig["t"] = std::isfinite(t.t_statistic) ? json(t.t_statistic) : json(t.t_statistic > 0 ? "inf" : "-inf");
        sig["p"] = t.p_value;
        sig["df"] = t.degrees_of_freedom;
        sig["zero_variance"] = t.zero_variance;
        sig["significant"] = t.p_value <= 0.05;
        table << std::setw(10) << base.mean << std::setw(10) << t.t_statistic << std::setw(10) << t.p_value
              << (t.zero_variance ? "  (zero variance)" : "");
      } else {
        sig["error"] = "fewer than 2 queries";
      }
      report["significance"][name] = sig;
    }
    table << '\n';
  }
  report["skipped_queries"] = skipped;
  for (const std::string& qid : skipped) ctx.err << "warning: query '" << qid << "' has no judgments; skipped\n";
  ctx.out << report.dump(2) << '\n';
  ctx.err << table.str();
  return kExitOk;
}

// ------------------------------------------------------------------ bench ---

struct BenchArgs {
  std::string corpus, config, scratch;
};

int cmd_bench(const BenchArgs& a, Context& ctx) {
  const EngineConfig config = load_config(a.config);
  const auto embedder = config.make_embedder();
  const auto corpus = load_corpus(a.corpus);
  const std::string scratch = a.scratch.empty() ? a.corpus + ".bench.store" : a.scratch;
  const BenchReport r = run_bench(corpus, config.segmentation, *embedder, scratch);
  json report = {{"documents", r.documents}};
  if (r.documents > 0) {
    report["blocks"] = r.blocks;
    report["block_tokens"] = r.block_tokens;
    report["modeled_cost"] = {{"blockwise", r.modeled_block_cost},
                              {"whole_document", r.modeled_whole_cost},
                              {"ratio", r.modeled_ratio}};
    report["wall_seconds"] = {{"blockwise", r.blockwise_seconds}, {"whole_document", r.whole_seconds}};
    report["stages"] = {{"segment", r.segment_seconds}, {"embed", r.embed_seconds}, {"write", r.write_seconds}};
  }
  ctx.out << report.dump(2) << '\n';
  return kExitOk;
}

// --------------------------------------------------------- export-vectors ---

struct ExportArgs {
  std::string store, queries, out, config;
};

void write_row(std::ostream& out, std::string_view kind, std::string_view id, std::size_t ordinal,
               std::span<const float> values) {
  char buf[32];
  out << kind << '\t' << id << '\t' << ordinal;
  for (const float v : values) {
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
    out << '\t' << buf;
  }
  out << '\n';
}

int cmd_export(const ExportArgs& a, Context& ctx) {
  const Store store = Store::open(a.store);
  std::ofstream out(a.out, std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + a.out);
  std::size_t rows = 0;
  for (const std::string& id : store.doc_ids()) {
    const auto doc = store.get(id);
    for (std::size_t j = 0; j < doc->block_vectors.size(); ++j, ++rows) {
      write_row(out, "block", id, j, doc->block_vectors[j].values);
    }
  }
  if (!a.queries.empty()) {
    const EngineConfig config = load_config(a.config);
    const auto embedder = config.make_embedder();
    if (embedder->dim() != store.dim()) {
      throw Error(Errc::DimensionMismatch, "config dim does not match store dim");
    }
    const auto queries = load_queries(a.queries);
    std::vector<std::string> texts;
    for (const QueryRecord& q : queries) texts.push_back(q.text);
    const auto vectors = embedder->embed(texts, EmbedderKind::Query);
    for (std::size_t i = 0; i < queries.size(); ++i, ++rows) {
      write_row(out, "query", queries[i].query_id, 0, vectors[i].values);
    }
  }
  if (!out) throw Error(Errc::IoError, "write failed on " + a.out);
  ctx.err << "exported " << rows << " rows to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"breps: block-representation reranking engine", "breps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "breps 0.1.0");

  IndexArgs index_args;
  auto* index = app.add_subcommand("index", "Segment, embed and store a JSONL corpus");
  index->add_option("--corpus", index_args.corpus, "JSONL corpus")->required();
  index->add_option("--out-store", index_args.store, "Output store path")->required();
  index->add_option("--config", index_args.config, "Engine config (JSON)");
  index->add_option("--parallelism", index_args.parallelism, "Worker count (overrides config)");

  RerankArgs rerank_args;
  auto* rr = app.add_subcommand("rerank", "Rerank a TREC candidate run with stored block vectors");
  rr->add_option("--queries", rerank_args.queries, "JSONL queries")->required();
  rr->add_option("--candidates", rerank_args.candidates, "TREC run with candidates")->required();
  rr->add_option("--store", rerank_args.store, "Representation store")->required();
  rr->add_option("--out-run", rerank_args.out_run, "Output TREC run")->required();
  rr->add_option("--config", rerank_args.config, "Engine config (JSON)");
  rr->add_option("--blocks", rerank_args.blocks, "Score only the first n blocks of each document")
      ->check(CLI::PositiveNumber);
  rr->add_option("--head", rerank_args.head, "Trained projection head");
  rr->add_option("--parallelism", rerank_args.parallelism, "Worker count (overrides config)");

  TrainArgs train_args;
  auto* tr = app.add_subcommand("train", "Train a projection head on (query, d+, d-) triplets");
  tr->add_option("--triplets", train_args.triplets, "TSV triplets")->required();
  tr->add_option("--queries", train_args.queries, "JSONL queries")->required();
  tr->add_option("--store", train_args.store, "Representation store")->required();
  tr->add_option("--out-head", train_args.out_head, "Output head file")->required();
  tr->add_option("--config", train_args.config, "Engine config (JSON)");
  tr->add_option("--loss-curve", train_args.loss_curve, "Loss curve TSV (default: <out-head>.loss.tsv)");
  tr->add_option("--steps", train_args.steps, "Optimizer steps (overrides config)");

  EvalArgs eval_args;
  std::string metric_list = "ndcg@10,map,p@1";
  auto* ev = app.add_subcommand("eval", "Evaluate a run against qrels");
  ev->add_option("--run", eval_args.run, "TREC run")->required();
  ev->add_option("--qrels", eval_args.qrels, "TREC qrels")->required();
  ev->add_option("--metrics", metric_list, "Comma-separated metrics, e.g. ndcg@10,ndcg,map,p@1");
  ev->add_option("--baseline-run", eval_args.baseline, "Run to compare with a paired t-test");

  BenchArgs bench_args;
  auto* be = app.add_subcommand("bench", "Compare blockwise and whole-document embedding cost");
  be->add_option("--corpus", bench_args.corpus, "JSONL corpus")->required();
  be->add_option("--config", bench_args.config, "Engine config (JSON)");
  be->add_option("--scratch", bench_args.scratch, "Scratch store path");

  ExportArgs export_args;
  auto* ex = app.add_subcommand("export-vectors", "Dump stored (and query) vectors as TSV");
  ex->add_option("--store", export_args.store, "Representation store")->required();
  ex->add_option("--queries", export_args.queries, "JSONL queries to embed and append");
  ex->add_option("--out", export_args.out, "Output TSV")->required();
  ex->add_option("--config", export_args.config, "Engine config (JSON)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*index) return cmd_index(index_args, ctx);
    if (*rr) return cmd_rerank(rerank_args, ctx);
    if (*tr) return cmd_train(train_args, ctx);
    if (*ev) {
      std::stringstream ss(metric_list);
      for (std::string m; std::getline(ss, m, ',');) {
        if (!m.empty()) eval_args.metrics.push_back(m);
      }
      return cmd_eval(eval_args, ctx);
    }
    if (*be) return cmd_bench(bench_args, ctx);
    if (*ex) return cmd_export(export_args, ctx);
  } catch (const Error& e) {
    err << json{{"error", std::string(errc_name(e.code()))}, {"message", e.what()}}.dump() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace breps::cli
