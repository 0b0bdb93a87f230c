// Command-line front end: train, decode, score, generate.
//
// Exit codes: 0 success, 1 usage, 2 input validation, 3 internal error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "evrel/corpus.hpp"
#include "evrel/decoder.hpp"
#include "evrel/metrics.hpp"
#include "evrel/synth.hpp"
#include "evrel/trainer.hpp"

using nlohmann::json;
using namespace evrel;

namespace {

void require_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open file: " + path);
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

void check_families(const std::set<std::string>& disabled) {
  const auto& known = known_families();
  for (const auto& f : disabled) {
    if (std::find(known.begin(), known.end(), f) == known.end()) {
      std::string names;
      for (const auto& k : known) names += (names.empty() ? "" : ",") + k;
      throw CorpusError("unknown feature family '" + f + "' (known: " + names + ")");
    }
  }
}

// Runs fn(doc_index) over all documents with `jobs` worker threads.
void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> workers;
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mutex;
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          error = e.what();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failed.load()) throw CorpusError(error);
}

// ---------------------------------------------------------------------------
// predictions format: one JSON object per line mirroring the corpus relation
// fields (coref for coreference models, after for sequencing models)

std::string prediction_line_coref(const Document& doc, const RelationGraph& g) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["coref"] = json::array();
  for (const auto& group : inferred_partition(g)) {
    std::vector<std::string> ids;
    for (int i : group) ids.push_back(doc.mention(i).id);
    j["coref"].push_back(ids);
  }
  return j.dump();
}

std::string prediction_line_sequencing(const Document& doc, const RelationGraph& g) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["after"] = json::array();
  for (const Arc& a : g.arcs) {
    if (a.label == ArcLabel::AfterForward)
      j["after"].push_back({doc.mention(a.source).id, doc.mention(a.target).id});
    else if (a.label == ArcLabel::AfterBackward)
      j["after"].push_back({doc.mention(a.target).id, doc.mention(a.source).id});
  }
  return j.dump();
}

struct Prediction {
  std::vector<std::vector<std::string>> coref;
  std::vector<IdPair> after;
  bool has_coref = false;
  bool has_after = false;
};

std::map<std::string, Prediction> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open predictions file: " + path);
  std::map<std::string, Prediction> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": parse error: " + e.what());
    }
    Prediction p;
    std::string doc_id = j.at("doc_id").get<std::string>();
    if (j.contains("coref")) {
      p.coref = j["coref"].get<std::vector<std::vector<std::string>>>();
      p.has_coref = true;
    }
    if (j.contains("after")) {
      for (const auto& jp : j["after"])
        p.after.emplace_back(jp.at(0).get<std::string>(), jp.at(1).get<std::string>());
      p.has_after = true;
    }
    out[doc_id] = std::move(p);
  }
  return out;
}

// Realize predicted after pairs as a relation graph over the document.
RelationGraph after_pairs_to_graph(const Document& doc, const std::vector<IdPair>& pairs) {
  RelationGraph g;
  g.task = Task::Sequencing;
  g.n = doc.n_mentions();
  for (const auto& [src, dst] : pairs) {
    int a = doc.mention_index(src);
    int b = doc.mention_index(dst);
    if (a == b)
      throw CorpusError("document " + doc.doc_id + ": after link from mention to itself: " + src);
    if (a < b)
      g.add(a, b, ArcLabel::AfterForward);
    else
      g.add(b, a, ArcLabel::AfterBackward);
  }
  return g;
}

// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string input, output, schema_path, log_path;
  std::string task = "coref";
  TrainConfig config;
  std::vector<std::string> disabled;
  bool no_averaging = false;
};

int cmd_train(const TrainOpts& opt) {
  require_file(opt.input);
  Task task = task_from_string(opt.task);
  FeatureConfig features;
  features.disabled_families.insert(opt.disabled.begin(), opt.disabled.end());
  check_families(features.disabled_families);
  if (!opt.schema_path.empty()) features.schema = SchemaTable::from_file(opt.schema_path);

  TrainConfig config = opt.config;
  config.averaging = !opt.no_averaging;
  std::vector<Document> corpus = read_corpus(opt.input);

  std::ofstream log_file;
  if (!opt.log_path.empty()) {
    log_file.open(opt.log_path);
    if (!log_file) throw CorpusError("cannot open log file for writing: " + opt.log_path);
  }
  auto log = [&](const std::string& line) {
    std::cout << line << "\n";
    if (log_file) log_file << line << "\n";
  };

  std::ostringstream echo;
  echo << "train: task=" << to_string(task) << " input=" << opt.input
       << " docs=" << corpus.size() << " iterations=" << config.iterations << " cap="
       << (std::isfinite(config.cap) ? std::to_string(config.cap) : std::string("none"))
       << " averaging=" << config.averaging << " seed=" << config.seed
       << " shuffle=" << config.shuffle << " disabled=["
       << join(features.disabled_families) << "]"
       << " schema=" << (opt.schema_path.empty() ? "builtin" : opt.schema_path) << "("
       << features.schema.entries().size() << ")";
  log(echo.str());

  TrainResult result = train(corpus, task, config, features);
  for (const EpochLog& e : result.log) {
    std::ostringstream line;
    line << "epoch " << e.epoch << "/" << config.iterations << " match_rate=" << e.match_rate
         << " loss=" << e.total_loss << " updates=" << e.updates
         << " anomalies=" << e.anomalies;
    log(line.str());
  }
  save_model(result.model, opt.output);
  log("model written to " + opt.output);
  return 0;
}

struct DecodeOpts {
  std::string model, input, output;
  std::string weights = "averaged";
  std::string task;  // optional cross-check against the model
  int jobs = 1;
};

int cmd_decode(const DecodeOpts& opt) {
  require_file(opt.model);
  require_file(opt.input);
  Model model = load_model(opt.model);
  if (!opt.task.empty() && task_from_string(opt.task) != model.task)
    throw CorpusError("model file is a " + to_string(model.task) + " model, but --task says " +
                      opt.task);
  const WeightVector* w = &model.weights;
  if (opt.weights == "averaged") {
    if (model.averaged.weights.empty() && !model.weights.weights.empty())
      throw CorpusError("model has no averaged weights (trained with averaging off); "
                        "use --weights final");
    w = &model.averaged;
  } else if (opt.weights != "final") {
    throw CorpusError("--weights must be 'averaged' or 'final'");
  }

  std::vector<Document> corpus = read_corpus(opt.input);
  std::vector<std::string> lines(corpus.size());
  parallel_for(corpus.size(), opt.jobs, [&](size_t i) {
    const Document& doc = corpus[i];
    Clusters singletons(doc.n_mentions());
    RelationGraph g = decode(doc, *w, model.task, singletons, model.features);
    lines[i] = model.task == Task::Coreference ? prediction_line_coref(doc, g)
                                               : prediction_line_sequencing(doc, g);
  });
  std::ofstream out(opt.output);
  if (!out) throw CorpusError("cannot open output file: " + opt.output);
  for (const auto& line : lines) out << line << "\n";
  std::cout << "decode: task=" << to_string(model.task) << " weights=" << opt.weights
            << " docs=" << corpus.size() << " output=" << opt.output << "\n";
  return 0;
}

struct ScoreOpts {
  std::string task = "coref";
  std::string gold, predictions, baseline, json_out;
  std::string aggregation = "micro";
  int jobs = 1;
};

int cmd_score(const ScoreOpts& opt) {
  require_file(opt.gold);
  Task task = task_from_string(opt.task);
  Aggregation agg = opt.aggregation == "macro" ? Aggregation::Macro : Aggregation::Micro;
  if (opt.aggregation != "micro" && opt.aggregation != "macro")
    throw CorpusError("--aggregation must be 'micro' or 'macro'");
  if (opt.predictions.empty() == opt.baseline.empty())
    throw CorpusError("exactly one of --predictions and --baseline is required");

  std::vector<Document> corpus = read_corpus(opt.gold);
  std::map<std::string, Prediction> preds;
  if (!opt.predictions.empty()) preds = read_predictions(opt.predictions);

  json report;
  report["task"] = to_string(task);
  report["aggregation"] = opt.aggregation;

  if (task == Task::Coreference) {
    if (!opt.baseline.empty() && opt.baseline != "singleton" && opt.baseline != "matching")
      throw CorpusError("coreference baselines: singleton, matching");
    std::vector<std::pair<Clustering, Clustering>> pairs(corpus.size());
    parallel_for(corpus.size(), opt.jobs, [&](size_t i) {
      const Document& doc = corpus[i];
      Clustering gold = clustering_from_gold(doc);
      Clustering system;
      if (opt.baseline == "singleton") {
        system = baseline_singleton(doc);
      } else if (opt.baseline == "matching") {
        system = baseline_matching(doc);
      } else {
        auto it = preds.find(doc.doc_id);
        if (it == preds.end() || !it->second.has_coref)
          throw CorpusError("no coref prediction for document " + doc.doc_id);
        system = Clustering::normalized(it->second.coref);
      }
      pairs[i] = {std::move(gold), std::move(system)};
    });
    CorefReport r = score_coref(pairs, agg);
    std::cout << format_coref_report(r);
    auto prf = [](const PRF& x) { return json{{"p", x.p}, {"r", x.r}, {"f", x.f}}; };
    report["metrics"] = {{"b3", prf(r.b3)},
                         {"ceaf_e", prf(r.ceaf_e)},
                         {"muc", prf(r.muc)},
                         {"blanc", prf(r.blanc)},
                         {"avg", r.avg}};
  } else {
    if (!opt.baseline.empty() && opt.baseline != "adjacency")
      throw CorpusError("sequencing baselines: adjacency");
    std::vector<std::pair<EventDag, EventDag>> pairs(corpus.size());
    parallel_for(corpus.size(), opt.jobs, [&](size_t i) {
      const Document& doc = corpus[i];
      Clusters clusters = gold_clusters(doc);
      EventDag gold = gold_event_dag(doc);
      RelationGraph g;
      if (opt.baseline == "adjacency") {
        g = adjacency_baseline(doc);
      } else {
        auto it = preds.find(doc.doc_id);
        if (it == preds.end() || !it->second.has_after)
          throw CorpusError("no after prediction for document " + doc.doc_id);
        g = after_pairs_to_graph(doc, it->second.after);
      }
      // propagation through the gold clusters; self-loops are input errors
      EventDag system;
      try {
        system = to_event_dag(g, clusters);
      } catch (const RelationError& e) {
        throw CorpusError("document " + doc.doc_id + ": " + e.what());
      }
      if (!is_acyclic(system))
        throw CorpusError("document " + doc.doc_id +
                          ": predicted after links are cyclic after propagation");
      pairs[i] = {std::move(gold), std::move(system)};
    });
    PRF r = score_sequencing(pairs, agg);
    std::cout << format_sequencing_report(r);
    report["metrics"] = {{"tempeval", json{{"p", r.p}, {"r", r.r}, {"f", r.f}}}};
  }

  if (!opt.json_out.empty()) {
    std::ofstream out(opt.json_out);
    if (!out) throw CorpusError("cannot open report file: " + opt.json_out);
    out << report.dump(2) << "\n";
  }
  return 0;
}

struct GenerateOpts {
  std::string grammar, preset, output;
  int docs = 10;
  long seed = -1;  // overrides the grammar seed when >= 0
};

int cmd_generate(const GenerateOpts& opt) {
  if (opt.grammar.empty() == opt.preset.empty())
    throw CorpusError("exactly one of --grammar and --preset is required");
  ScriptGrammar grammar;
  if (!opt.grammar.empty()) {
    require_file(opt.grammar);
    grammar = ScriptGrammar::load(opt.grammar);
  } else {
    grammar = ScriptGrammar::preset(opt.preset);
  }
  if (opt.seed >= 0) grammar.seed = static_cast<unsigned long>(opt.seed);
  std::vector<Document> docs = generate(grammar, opt.docs);
  write_corpus(docs, opt.output);
  std::cout << "generate: docs=" << docs.size() << " seed=" << grammar.seed
            << " output=" << opt.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event coreference and sequencing: train, decode, score, generate"};
  app.require_subcommand(1);
  app.set_config("--config");

  TrainOpts train_opts;
  auto* train_cmd = app.add_subcommand("train", "train a model with online PA updates");
  train_cmd->add_option("--input", train_opts.input, "training corpus (one document per line)")
      ->required();
  train_cmd->add_option("--output", train_opts.output, "model file to write")->required();
  train_cmd->add_option("--task", train_opts.task, "coref or sequencing")->required();
  train_cmd->add_option("--iterations", train_opts.config.iterations, "training epochs");
  train_cmd->add_option("--cap-c", train_opts.config.cap, "aggressiveness cap C");
  train_cmd->add_flag("--no-averaging", train_opts.no_averaging, "skip weight averaging");
  train_cmd->add_option("--seed", train_opts.config.seed, "shuffle seed");
  train_cmd->add_flag("--shuffle", train_opts.config.shuffle, "shuffle documents per epoch");
  train_cmd->add_option("--disable-family", train_opts.disabled,
                        "feature family to disable (repeatable)");
  train_cmd->add_option("--schema", train_opts.schema_path, "schema cluster table");
  train_cmd->add_option("--log", train_opts.log_path, "also write the training log here");

  DecodeOpts decode_opts;
  auto* decode_cmd = app.add_subcommand("decode", "decode a corpus with a trained model");
  decode_cmd->add_option("--model", decode_opts.model, "model file")->required();
  decode_cmd->add_option("--input", decode_opts.input, "corpus to decode")->required();
  decode_cmd->add_option("--output", decode_opts.output, "predictions file to write")
      ->required();
  decode_cmd->add_option("--weights", decode_opts.weights, "averaged or final");
  decode_cmd->add_option("--task", decode_opts.task, "cross-check the model task");
  decode_cmd->add_option("--jobs", decode_opts.jobs, "worker threads");

  ScoreOpts score_opts;
  auto* score_cmd = app.add_subcommand("score", "score predictions against gold");
  score_cmd->add_option("--task", score_opts.task, "coref or sequencing")->required();
  score_cmd->add_option("--gold", score_opts.gold, "gold corpus")->required();
  score_cmd->add_option("--predictions", score_opts.predictions, "predictions file");
  score_cmd->add_option("--baseline", score_opts.baseline,
                        "singleton|matching (coref), adjacency (sequencing)");
  score_cmd->add_option("--aggregation", score_opts.aggregation, "micro or macro");
  score_cmd->add_option("--json-out", score_opts.json_out, "machine-readable report file");
  score_cmd->add_option("--jobs", score_opts.jobs, "worker threads");

  GenerateOpts gen_opts;
  auto* gen_cmd = app.add_subcommand("generate", "generate a synthetic corpus");
  gen_cmd->add_option("--grammar", gen_opts.grammar, "grammar file");
  gen_cmd->add_option("--preset", gen_opts.preset, "default, separable or noisy");
  gen_cmd->add_option("--output", gen_opts.output, "corpus file to write")->required();
  gen_cmd->add_option("--docs", gen_opts.docs, "number of documents");
  gen_cmd->add_option("--seed", gen_opts.seed, "override the grammar seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // 1 for every usage error, 0 for --help
  }

  try {
    if (*train_cmd) return cmd_train(train_opts);
    if (*decode_cmd) return cmd_decode(decode_opts);
    if (*score_cmd) return cmd_score(score_opts);
    if (*gen_cmd) return cmd_generate(gen_opts);
  } catch (const CorpusError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RelationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const MetricError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TrainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
