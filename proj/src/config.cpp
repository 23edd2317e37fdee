#include "breps/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "breps/error.hpp"
#include "breps/projection_head.hpp"

namespace breps {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(Errc::InvalidConfig, path + ": " + message);
}

// Typed access to one JSON object that remembers its key path; done() rejects
// keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void done() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) fail(child(key), "unknown key");
    }
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() || it->is_null() ? nullptr : &*it;
  }

  void size(const std::string& key, std::size_t& out, std::size_t min = 0) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < static_cast<std::int64_t>(min)) {
        fail(child(key), "expected an integer >= " + std::to_string(min));
      }
      out = v->get<std::size_t>();
    }
  }

  void optional_size(const std::string& key, std::optional<std::size_t>& out, std::size_t min = 0) {
    if (find(key) != nullptr) {
      std::size_t value = 0;
      size(key, value, min);
      out = value;
    }
  }

  void integer(const std::string& key, std::int64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(child(key), "expected an integer");
      out = v->get<std::int64_t>();
    }
  }

  void u64(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) {
        out = v->get<std::uint64_t>();
      } else if (v->is_string()) {
        try {
          out = std::stoull(v->get<std::string>(), nullptr, 0);
        } catch (const std::exception&) {
          fail(child(key), "expected an unsigned integer");
        }
      } else {
        fail(child(key), "expected an unsigned integer");
      }
    }
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number() || !std::isfinite(v->get<double>())) fail(child(key), "expected a finite number");
      out = v->get<double>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(child(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  bool string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(child(key), "expected a string");
      out = v->get<std::string>();
      return true;
    }
    return false;
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(child(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) fail(child(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_segmentation(const json& node, SegmentationConfig& seg) {
  Section s(node, "segmentation");
  s.size("max_block_tokens", seg.max_block_tokens, 1);
  s.size("max_blocks", seg.max_blocks, 1);
  std::string strategy = "dp";
  s.string("strategy", strategy);
  std::size_t fixed_length = seg.max_block_tokens;
  s.size("fixed_length", fixed_length, 1);
  if (strategy == "dp") {
    seg.strategy = DynamicProgrammingStrategy{};
  } else if (strategy == "fixed") {
    seg.strategy = FixedLengthStrategy{fixed_length};
  } else {
    fail("segmentation.strategy", "expected \"dp\" or \"fixed\"");
  }
  if (const json* weights = s.find("punctuation_weights")) {
    if (!weights->is_object()) fail("segmentation.punctuation_weights", "expected an object");
    seg.punctuation_weights.clear();
    for (const auto& [mark, value] : weights->items()) {
      const std::string path = "segmentation.punctuation_weights[" + mark + "]";
      if (!is_punctuation(mark)) fail(path, "not a punctuation mark");
      if (!value.is_number() || value.get<double>() < 0.0) fail(path, "expected a number >= 0");
      seg.punctuation_weights[mark] = value.get<double>();
    }
  }
  s.done();
}

void read_scoring(const json& node, ScoringSettings& sc) {
  Section s(node, "scoring");
  s.size("k", sc.k, 1);
  s.string("weights_mode", sc.weights_mode);
  s.numbers("weights", sc.weights);
  std::string path;
  if (s.string("weights_file", path)) sc.weights_file = path;
  if (s.string("head_file", path)) sc.head_file = path;
  s.number("temperature", sc.temperature);
  s.optional_size("inference_blocks", sc.inference_blocks, 1);
  s.done();
}

void read_embedder(const json& node, EmbedderSettings& em, bool& type_explicit) {
  Section s(node, "embedder");
  std::string type;
  if (s.string("type", type)) {
    type_explicit = true;
    if (type == "test") {
      em.type = EmbedderType::Test;
    } else if (type == "service") {
      em.type = EmbedderType::Service;
    } else {
      fail("embedder.type", "expected \"test\" or \"service\"");
    }
  }
  s.u64("seed", em.seed);
  s.boolean("quadratic_cost", em.quadratic_cost);
  s.string("url", em.url);
  s.size("max_batch", em.max_batch, 1);
  std::int64_t attempts = em.attempts;
  s.integer("attempts", attempts);
  if (attempts < 1 || attempts > 100) fail("embedder.attempts", "expected an integer in [1, 100]");
  em.attempts = static_cast<int>(attempts);
  s.integer("backoff_ms", em.backoff_ms);
  if (em.backoff_ms < 0) fail("embedder.backoff_ms", "expected an integer >= 0");
  s.integer("timeout_s", em.timeout_s);
  if (em.timeout_s < 1) fail("embedder.timeout_s", "expected an integer >= 1");
  s.string("passage_prefix", em.format.passage_prefix);
  s.string("query_prefix", em.format.query_prefix);
  s.string("terminator", em.format.terminator);
  s.size("max_query_tokens", em.format.max_query_tokens, 1);
  s.done();
}

void read_training(const json& node, TrainingSettings& tr) {
  Section s(node, "training");
  s.string("loss", tr.loss);
  s.number("margin", tr.margin);
  s.number("sigma", tr.sigma);
  s.number("learning_rate", tr.learning_rate);
  s.size("steps", tr.steps);
  s.size("accumulation", tr.accumulation, 1);
  s.boolean("learn_weights", tr.learn_weights);
  s.boolean("train_projection", tr.train_projection);
  s.u64("seed", tr.seed);
  s.number("init_noise", tr.init_noise);
  s.optional_size("output_dim", tr.output_dim, 1);
  s.done();
}

}  // namespace

EngineConfig EngineConfig::defaults() { return EngineConfig{}; }

EngineConfig EngineConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  EngineConfig config;
  {
    Section s(root, "");
    s.size("dim", config.dim, 1);
    s.size("parallelism", config.parallelism, 1);
    if (const json* v = s.find("segmentation")) read_segmentation(*v, config.segmentation);
    if (const json* v = s.find("scoring")) read_scoring(*v, config.scoring);
    if (const json* v = s.find("embedder")) read_embedder(*v, config.embedder, config.embedder_type_explicit);
    if (const json* v = s.find("training")) read_training(*v, config.training);
    s.done();
  }
  config.validate();
  return config;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "config not found: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  EngineConfig config = from_json_text(buffer.str());
  if (const char* url = std::getenv("BREPS_EMBED_URL"); url != nullptr && *url != '\0') {
    config.apply_url_override(url);
  }
  return config;
}

void EngineConfig::apply_url_override(const std::string& url) {
  embedder.url = url;
  if (!embedder_type_explicit) embedder.type = EmbedderType::Service;
  validate();
}

void EngineConfig::validate() const {
  segmentation.validate();
  if (dim == 0) fail("dim", "must be >= 1");
  if (!(scoring.temperature > 0.0)) fail("scoring.temperature", "must be > 0");
  const auto& mode = scoring.weights_mode;
  if (mode != "descending" && mode != "average" && mode != "custom" && mode != "learned-file") {
    fail("scoring.weights_mode", "expected descending, average, custom or learned-file");
  }
  if (mode == "custom" && scoring.weights.empty()) fail("scoring.weights", "custom mode needs weights");
  if (mode == "learned-file" && scoring.weights_file.empty()) {
    fail("scoring.weights_file", "learned-file mode needs a head file");
  }
  if (!scoring.weights.empty() && scoring.weights.size() != scoring.k &&
      (mode == "custom" || mode == "descending")) {
    fail("scoring.weights", "length must equal scoring.k");
  }
  if (mode == "descending" && scoring.weights.empty() && scoring.k != 3) {
    fail("scoring.weights", "descending mode with k != 3 needs explicit weights");
  }
  if (embedder.type == EmbedderType::Service && embedder.url.empty()) {
    fail("embedder.url", "service embedder needs a URL (or set BREPS_EMBED_URL)");
  }
  if (training.loss != "hinge" && training.loss != "ranknet") fail("training.loss", "expected hinge or ranknet");
  if (!(training.margin > 0.0)) fail("training.margin", "must be > 0");
  if (!(training.sigma > 0.0)) fail("training.sigma", "must be > 0");
  if (!(training.learning_rate >= 0.0)) fail("training.learning_rate", "must be >= 0");
  if (!(training.init_noise >= 0.0)) fail("training.init_noise", "must be >= 0");
  try {
    if (mode != "learned-file") (void)make_weights();
  } catch (const Error& e) {
    fail("scoring.weights", e.what());
  }
}

std::unique_ptr<Embedder> EngineConfig::make_embedder() const {
  std::unique_ptr<Embedder> out;
  if (embedder.type == EmbedderType::Service) {
    RemoteEmbedderOptions options;
    options.url = embedder.url;
    options.dim = dim;
    options.max_batch = embedder.max_batch;
    options.attempts = embedder.attempts;
    options.initial_backoff = std::chrono::milliseconds(embedder.backoff_ms);
    options.timeout = std::chrono::seconds(embedder.timeout_s);
    out = std::make_unique<RemoteEmbedder>(std::move(options));
  } else if (embedder.quadratic_cost) {
    out = std::make_unique<QuadraticCostEmbedder>(dim, embedder.seed);
  } else {
    out = std::make_unique<HashingEmbedder>(dim, embedder.seed);
  }
  out->set_input_format(embedder.format);
  return out;
}

WeightVector EngineConfig::make_weights() const {
  const auto& mode = scoring.weights_mode;
  if (mode == "average") return WeightVector::average(scoring.k);
  if (mode == "custom") return WeightVector::custom(scoring.weights);
  if (mode == "learned-file") {
    HeadFile file = load_head(scoring.weights_file);
    if (!file.weights) {
      throw Error(Errc::InvalidConfig, "scoring.weights_file: " + scoring.weights_file.string() +
                                           " carries no learned weights");
    }
    return WeightVector::learned(*file.weights);
  }
  if (scoring.weights.empty()) return WeightVector::descending_default();
  return WeightVector::descending(scoring.weights);
}

LossFunction EngineConfig::make_loss() const {
  if (training.loss == "ranknet") return RankNetLoss{training.sigma};
  return HingeLoss{training.margin};
}

TrainingConfig EngineConfig::make_training_config() const {
  TrainingConfig out;
  out.loss = make_loss();
  out.learning_rate = training.learning_rate;
  out.steps = training.steps;
  out.accumulation = training.accumulation;
  out.learn_weights = training.learn_weights;
  out.train_projection = training.train_projection;
  out.scoring.weights = make_weights();
  out.scoring.temperature = scoring.temperature;
  out.scoring.block_limit = scoring.inference_blocks;
  out.parallelism = parallelism;
  return out;
}

}  // namespace breps
