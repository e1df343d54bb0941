// Command-line front end: train, eval, analyze, verify, synth.
//
// Exit codes: 0 success, 1 check or metric failure, 2 usage/config/input error.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "star/star.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace star;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json metrics_json(const EvalReport& r) {
  json j{{"mrr", r.mrr}};
  for (const auto& [k, v] : r.hits) j["hits@" + std::to_string(k)] = v;
  return j;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  fs::path config;
  std::string data;
  std::string out;
  std::size_t repeats = 1;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

int run_train(const TrainArgs& args) {
  auto kv = KeyValueConfig::parse_file(args.config);
  const fs::path base = args.config.parent_path();
  fs::path data_dir = !args.data.empty() ? fs::path(args.data) : resolve(base, kv.require_string("data.dir"));
  kv.mark_used("data.dir");
  kv.mark_used("output.dir");
  fs::path out_dir = !args.out.empty() ? fs::path(args.out) : resolve(base, kv.get_string("output.dir", "run"));
  TrainConfig cfg = train_config_from(kv);
  if (args.threads) cfg.threads = *args.threads;
  if (args.epochs) cfg.epochs = *args.epochs;
  if (args.seed) cfg.seed = *args.seed;
  cfg.validate();
  kv.reject_unused();
  if (args.repeats < 1) throw ConfigError("--repeats: must be >= 1");

  fs::create_directories(out_dir);
  json run{{"data.dir", fs::absolute(data_dir).string()},
           {"output.dir", fs::absolute(out_dir).string()},
           {"repeats", args.repeats},
           {"config_file", fs::absolute(args.config).string()},
           {"train", to_json(cfg)},
           {"config_hash", config_hash(cfg)}};
  write_json(out_dir / "run_config.json", run);

  if (!fs::exists(data_dir / "train.txt")) throw InputError("missing " + (data_dir / "train.txt").string());
  auto store = fs::exists(data_dir / "entities.tsv") ? load_store(data_dir) : load_dataset(data_dir);
  std::cerr << "loaded " << store.num_entities() << " entities, " << store.num_relations() << " relations, "
            << store.train().size() << "/" << store.valid().size() << "/" << store.test().size()
            << " train/valid/test triples\n";
  auto classes = classify_relations(store);

  std::map<std::string, std::vector<double>> samples;
  for (std::size_t k = 0; k < args.repeats; ++k) {
    TrainConfig c = cfg;
    c.seed = cfg.seed + k;
    fs::path dir = args.repeats == 1 ? out_dir : out_dir / ("run_" + std::to_string(k));
    fs::create_directories(dir);
    save_vocab(store.vocab(), dir);
    std::ofstream log(dir / "train_log.jsonl");
    TrainHooks hooks;
    hooks.on_epoch = [&](const EpochLog& e) {
      log << to_json(e).dump() << '\n';
      log.flush();
      std::cerr << "[seed " << c.seed << "] epoch " << e.epoch << " loss " << e.mean_loss;
      if (e.valid_mrr) std::cerr << " valid_mrr " << *e.valid_mrr;
      std::cerr << '\n';
    };
    auto result = train(store, c, hooks);
    CheckpointMeta meta{config_hash(c), result.best_epoch, {{"seed", c.seed}}};
    save_checkpoint(result.table, dir / "checkpoint.bin", meta);

    EvalOptions opts{c.tie_rule, c.seed, c.threads, Direction::Both};
    for (auto split : {Split::Valid, Split::Test}) {
      if (store.split(split).empty()) continue;
      auto report = evaluate(result.table, store, split, &classes, opts);
      auto j = to_json(report, &store.vocab());
      j["split"] = to_string(split);
      j["seed"] = c.seed;
      j["best_epoch"] = result.best_epoch;
      write_json(dir / (std::string("report_") + to_string(split) + ".json"), j);
      const auto metrics = metrics_json(report);
      for (const auto& [name, value] : metrics.items())
        samples[std::string(to_string(split)) + "." + name].push_back(value.get<double>());
      std::cout << "seed " << c.seed << ' ' << to_string(split) << " mrr " << report.mrr << " hits@1 "
                << report.hits.at(1) << " hits@10 " << report.hits.at(10) << '\n';
    }
  }

  json summary{{"repeats", args.repeats}, {"seeds", json::array()}, {"metrics", json::object()}};
  for (std::size_t k = 0; k < args.repeats; ++k) summary["seeds"].push_back(cfg.seed + k);
  for (const auto& [name, xs] : samples) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
    summary["metrics"][name] = {{"mean", mean}, {"std", sd}, {"values", xs}};
    if (args.repeats > 1) std::cout << name << " " << mean << " +- " << sd << '\n';
  }
  write_json(out_dir / "summary.json", summary);
  return kOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  fs::path checkpoint;
  fs::path data;
  std::string split = "test";
  std::string per_relation;
  bool per_class = false;
  std::string tie_rule = "pessimistic";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

int run_eval(const EvalArgs& args) {
  auto table = load_checkpoint(args.checkpoint);
  const fs::path ckpt_dir = args.checkpoint.parent_path();
  std::optional<Vocab> vocab;
  if (fs::exists(ckpt_dir / "entities.tsv"))
    vocab = load_vocab(ckpt_dir);
  else if (fs::exists(args.data / "entities.tsv"))
    vocab = load_vocab(args.data);
  if (!fs::exists(args.data / "train.txt")) throw InputError("missing " + (args.data / "train.txt").string());
  auto store = load_dataset(args.data, vocab);
  if (table.num_entities != store.num_entities() || table.num_relations != store.num_relations())
    throw InputError("checkpoint has " + std::to_string(table.num_entities) + " entities / " +
                     std::to_string(table.num_relations) + " relations, data has " +
                     std::to_string(store.num_entities()) + " / " + std::to_string(store.num_relations()));
  auto sidecar = load_checkpoint_sidecar(args.checkpoint);
  if (sidecar.contains("dim") && sidecar["dim"].get<std::size_t>() != table.dim)
    throw InputError("checkpoint sidecar dimension does not match the checkpoint");

  const Split split = parse_split(args.split);
  auto classes = classify_relations(store);
  EvalOptions opts{parse_tie_rule(args.tie_rule), args.seed, args.threads, Direction::Both};
  auto report = evaluate(table, store, split, args.per_class ? &classes : nullptr, opts);
  auto j = to_json(report, &store.vocab());
  j["split"] = to_string(split);
  j["tie_rule"] = to_string(opts.tie_rule);
  std::cout << "mrr " << report.mrr;
  for (const auto& [k, v] : report.hits) std::cout << " hits@" << k << ' ' << v;
  std::cout << " queries " << report.num_queries << '\n';
  if (args.per_class)
    for (const auto& [cat, m] : report.per_class)
      std::cout << to_string(cat) << " mrr " << m.mrr << " queries " << m.queries << '\n';
  if (!args.out.empty()) write_json(args.out, j);
  if (!args.per_relation.empty()) write_per_relation_csv(report, store.vocab(), args.per_relation);
  return kOk;
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  fs::path train;
  std::string out, svg, csv;
  bool exclude_degenerate = false;
  bool exclude_diagonal = false;
};

int run_analyze(const AnalyzeArgs& args) {
  auto start = std::chrono::steady_clock::now();
  auto store = load_triples(args.train);
  auto counts = count_two_paths(store, PathCountOptions{args.exclude_degenerate});
  auto report = dataset_imbalance(counts, args.exclude_diagonal ? DiagonalPolicy::Exclude : DiagonalPolicy::Both);
  auto j = to_json(report, &store.vocab());
  j["num_relations"] = store.num_relations();
  j["num_triples"] = store.train().size();
  j["duplicates_dropped"] = store.duplicates_dropped;
  std::cout << "Psi " << report.Psi << " (single " << report.triple_single << ", both " << report.triple_both
            << ", pairs " << report.pairs.size() << ") in "
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
  if (!args.out.empty()) write_json(args.out, j);
  if (!args.csv.empty()) export_arc_csv(report, args.csv, &store.vocab());
  if (!args.svg.empty()) export_arc_svg(report, store.num_relations(), args.svg, &store.vocab());
  return kOk;
}

// ---- verify -----------------------------------------------------------------

int run_verify(std::size_t n, std::uint64_t seed, std::size_t trials, const std::string& json_out) {
  if (n == 0 || n % 2 != 0) throw ConfigError("--n: must be a positive even number");
  auto report = run_pattern_suite(n, seed, trials);
  for (const auto& e : report.entries) {
    std::cout << (e.result.passed() ? "PASS " : "FAIL ") << e.name << " (residual " << e.result.residual << ")";
    if (!e.result.passed()) std::cout << ": " << e.result.detail;
    std::cout << '\n';
  }
  if (!json_out.empty()) write_json(json_out, to_json(report));
  return report.all_passed() ? kOk : kFailure;
}

// ---- synth ------------------------------------------------------------------

int run_synth(const fs::path& spec_path, const fs::path& out) {
  auto kv = KeyValueConfig::parse_file(spec_path);
  auto spec = synth_spec_from(kv);
  kv.reject_unused();
  GeneratedKG kg;
  try {
    kg = generate(spec);
  } catch (const SpecError& e) {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
  save_store(kg.store, out);
  write_json(out / "spec.json", kg.spec_echo);
  std::vector<Triple> disc;
  for (auto i : kg.order_discriminating) disc.push_back(kg.store.test()[i]);
  write_triples(out / "order_discriminating.txt", kg.store.vocab(), disc);
  std::cout << "wrote " << kg.store.train().size() << "/" << kg.store.valid().size() << "/"
            << kg.store.test().size() << " triples (" << disc.size() << " order-discriminating) to " << out.string()
            << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge graph embedding with rotation, scaling and translation"};
  app.require_subcommand(1);

  TrainArgs targs;
  auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
  train_cmd->add_option("--config", targs.config, "config file")->required();
  train_cmd->add_option("--data", targs.data, "dataset directory (overrides data.dir)");
  train_cmd->add_option("--out", targs.out, "output directory (overrides output.dir)");
  train_cmd->add_option("--repeats", targs.repeats, "number of seeds (seed, seed+1, ...)");
  train_cmd->add_option("--threads", targs.threads, "worker threads (1 = deterministic)");
  train_cmd->add_option("--epochs", targs.epochs, "override train.epochs");
  train_cmd->add_option("--seed", targs.seed, "override train.seed");

  EvalArgs eargs;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eargs.checkpoint)->required();
  eval_cmd->add_option("--data", eargs.data, "dataset directory")->required();
  eval_cmd->add_option("--split", eargs.split)->check(CLI::IsMember({"train", "valid", "test"}));
  eval_cmd->add_option("--per-relation", eargs.per_relation, "write per-relation CSV");
  eval_cmd->add_flag("--per-class", eargs.per_class, "break MRR down by relation category");
  eval_cmd->add_option("--tie-rule", eargs.tie_rule)->check(CLI::IsMember({"pessimistic", "random"}));
  eval_cmd->add_option("--seed", eargs.seed, "seed for random tie breaking");
  eval_cmd->add_option("--threads", eargs.threads);
  eval_cmd->add_option("--out", eargs.out, "write report JSON");

  AnalyzeArgs aargs;
  auto* analyze_cmd = app.add_subcommand("analyze", "two-path relation-pair imbalance");
  analyze_cmd->add_option("--train", aargs.train, "train triple file")->required();
  analyze_cmd->add_option("--out", aargs.out, "write report JSON");
  analyze_cmd->add_option("--svg", aargs.svg, "write arc diagram");
  analyze_cmd->add_option("--csv", aargs.csv, "write per-pair CSV");
  analyze_cmd->add_flag("--exclude-degenerate", aargs.exclude_degenerate, "drop chains revisiting an entity");
  analyze_cmd->add_flag("--exclude-diagonal", aargs.exclude_diagonal, "leave (r, r) chains out of Psi");

  std::size_t vn = 8, vtrials = 100;
  std::uint64_t vseed = 0;
  std::string vjson;
  auto* verify_cmd = app.add_subcommand("verify", "run the relation-pattern and gradient checks");
  verify_cmd->add_option("--n", vn, "embedding dimension (even)");
  verify_cmd->add_option("--seed", vseed);
  verify_cmd->add_option("--trials", vtrials);
  verify_cmd->add_option("--json", vjson, "write results JSON");

  fs::path sspec, sout;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic knowledge graph");
  synth_cmd->add_option("--spec", sspec, "spec file")->required();
  synth_cmd->add_option("--out", sout, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return run_train(targs);
    if (*eval_cmd) return run_eval(eargs);
    if (*analyze_cmd) return run_analyze(aargs);
    if (*verify_cmd) return run_verify(vn, vseed, vtrials, vjson);
    if (*synth_cmd) return run_synth(sspec, sout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const VocabularyError& e) {
    std::cerr << "vocabulary error: " << e.what() << '\n';
    return kUsage;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
