// Command-line front end: parse, graph, gen-dataset, train, predict, eval, dse.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hlsqor/dse.hpp"
#include "hlsqor/parse.hpp"

namespace fs = std::filesystem;
using namespace hlsqor;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json read_json(const std::string& path) { return json::parse(read_file(path)); }

OpLibrary resolve_oplib(const std::string& flag) {
  std::string path = flag;
  if (path.empty())
    if (const char* env = std::getenv("HLSQOR_OPLIB")) path = env;
  if (path.empty()) return OpLibrary::defaults();
  return oplib_from_json(read_json(path));
}

uint64_t resolve_seed(uint64_t flag_seed, bool flag_set) {
  if (flag_set) return flag_seed;
  if (const char* env = std::getenv("HLSQOR_SEED")) return std::stoull(env);
  return flag_seed;
}

std::set<long> parse_factors(const std::string& s) {
  std::set<long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    long v = std::stol(item);
    if (v < 1) throw std::runtime_error("factors must be >= 1");
    out.insert(v);
  }
  if (out.empty()) throw std::runtime_error("empty factor set");
  return out;
}

// Reproducibility record written beside every produced artifact.
void write_run_manifest(const fs::path& beside, const std::string& subcommand,
                        uint64_t seed, const json& flags,
                        const std::vector<std::string>& inputs) {
  json m;
  m["tool_version"] = kVersion;
  m["subcommand"] = subcommand;
  m["seed"] = seed;
  m["flags"] = flags;
  json hashes;
  for (auto& p : inputs) hashes[p] = fnv1a(read_file(p));
  m["input_hashes"] = hashes;
  m["timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  fs::path dir = beside;
  if (!fs::is_directory(dir)) dir = dir.parent_path();
  if (dir.empty()) dir = ".";
  std::ofstream(dir / "run_manifest.json", std::ios::binary) << m.dump(2) << '\n';
}

std::vector<std::string> kernel_files(const std::string& dir) {
  std::vector<std::string> files;
  for (auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".dsl")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .dsl kernels in " + dir);
  return files;
}

json report_to_json(const TrainReport& r) {
  auto stage = [](const StageMetrics& m) {
    json j;
    for (int t = 0; t < kTargetCount; ++t)
      j[target_name(Target(t))] = m.test_mape[size_t(t)];
    return j;
  };
  return {{"gnn_p", stage(r.p)},
          {"gnn_np", stage(r.np)},
          {"gnn_g", stage(r.g)},
          {"samples",
           {{"inner_p", r.counts[0]}, {"inner_np", r.counts[1]}, {"global", r.counts[2]}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QoR prediction toolkit for pragma-annotated loop-nest kernels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string kernel_path, config_path, bundle_dir, dataset_dir, kernels_dir;
  std::string out_path, oplib_path, factors_str = "1,2,4,8";
  std::string variant_str = "sage", split_str = "random", snl_str = "predicted";
  std::string objectives_str = "2d";
  uint64_t seed = 1;
  bool json_out = false, exact = false;
  int epochs = 250, hidden = 32, jobs = int(std::thread::hardware_concurrency());
  double lr = 0.01, abort_mape = 1e9;
  if (jobs < 1) jobs = 1;

  std::vector<CLI::Option*> seed_opts;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--oplib", oplib_path, "operator cost library JSON");
    seed_opts.push_back(c->add_option("--seed", seed, "random seed"));
    c->add_flag("--json", json_out, "machine-readable stdout");
  };

  auto* cmd_parse = app.add_subcommand("parse", "parse a kernel and echo it");
  cmd_parse->add_option("--kernel", kernel_path, "kernel DSL file")->required();
  add_common(cmd_parse);

  auto* cmd_graph = app.add_subcommand("graph", "build the pragma-transformed graph");
  cmd_graph->add_option("--kernel", kernel_path)->required();
  cmd_graph->add_option("--config", config_path, "pragma config JSON");
  cmd_graph->add_option("--out", out_path, "output JSON path (default stdout)");
  add_common(cmd_graph);

  auto* cmd_gen = app.add_subcommand("gen-dataset", "enumerate configs and label with the oracle");
  cmd_gen->add_option("--kernels", kernels_dir, "directory of .dsl kernels")->required();
  cmd_gen->add_option("--out", out_path, "output dataset directory")->required();
  cmd_gen->add_option("--factors", factors_str, "unroll factor set, e.g. 1,2,4,8");
  cmd_gen->add_option("--jobs", jobs, "worker threads");
  add_common(cmd_gen);

  auto* cmd_train = app.add_subcommand("train", "train the hierarchical model bundle");
  cmd_train->add_option("--dataset", dataset_dir)->required();
  cmd_train->add_option("--out", out_path, "output bundle directory")->required();
  cmd_train->add_option("--epochs", epochs);
  cmd_train->add_option("--hidden", hidden);
  cmd_train->add_option("--lr", lr);
  cmd_train->add_option("--variant", variant_str, "gcn|sage");
  cmd_train->add_option("--split", split_str, "random|kernel");
  cmd_train->add_option("--supernode-labels", snl_str, "predicted|oracle");
  cmd_train->add_option("--abort-mape", abort_mape, "abort when a stage exceeds this test MAPE");
  cmd_train->add_option("--jobs", jobs);
  add_common(cmd_train);

  auto* cmd_predict = app.add_subcommand("predict", "model QoR for one config");
  cmd_predict->add_option("--kernel", kernel_path)->required();
  cmd_predict->add_option("--config", config_path)->required();
  cmd_predict->add_option("--bundle", bundle_dir)->required();
  add_common(cmd_predict);

  auto* cmd_eval = app.add_subcommand("eval", "oracle QoR for one config");
  cmd_eval->add_option("--kernel", kernel_path)->required();
  cmd_eval->add_option("--config", config_path)->required();
  add_common(cmd_eval);

  auto* cmd_dse = app.add_subcommand("dse", "explore the pragma design space");
  cmd_dse->add_option("--kernel", kernel_path)->required();
  cmd_dse->add_option("--bundle", bundle_dir)->required();
  cmd_dse->add_option("--factors", factors_str);
  cmd_dse->add_option("--objectives", objectives_str, "2d|4d");
  cmd_dse->add_flag("--exact", exact, "also run the exhaustive oracle pass and ADRS");
  cmd_dse->add_option("--jobs", jobs);
  cmd_dse->add_option("--out", out_path, "report JSON path (default stdout)");
  add_common(cmd_dse);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    bool seed_given = std::any_of(seed_opts.begin(), seed_opts.end(),
                                  [](CLI::Option* o) { return o->count() > 0; });
    seed = resolve_seed(seed, seed_given);

    if (*cmd_parse) {
      auto spec = parse_kernel(read_file(kernel_path));
      if (json_out) {
        json j;
        j["name"] = spec.name;
        j["arrays"] = json::array();
        j["loops"] = json::array();
        for (auto& a : spec.arrays) j["arrays"].push_back(a.id);
        spec.for_each_loop([&](const LoopSpec& l, const LoopSpec*) { j["loops"].push_back(l.id); });
        std::cout << j.dump() << '\n';
      } else {
        std::cout << print_kernel(spec);
      }
    } else if (*cmd_graph) {
      auto spec = parse_kernel(read_file(kernel_path));
      PragmaConfig cfg;
      if (!config_path.empty()) cfg = config_from_json(read_json(config_path));
      auto errs = validate_config(spec, cfg);
      if (!errs.empty()) throw std::runtime_error("invalid config: " + errs.front());
      auto lib = resolve_oplib(oplib_path);
      Cdfg g = build_cdfg(spec, cfg);
      annotate_features(g, spec, cfg, lib);
      std::string dump = graph_to_json(g).dump(2) + "\n";
      if (out_path.empty()) {
        std::cout << dump;
      } else {
        std::ofstream(out_path, std::ios::binary) << dump;
        write_run_manifest(out_path, "graph", seed,
                           {{"kernel", kernel_path}, {"config", config_path}},
                           {kernel_path});
      }
    } else if (*cmd_gen) {
      auto lib = resolve_oplib(oplib_path);
      auto factors = parse_factors(factors_str);
      std::vector<KernelSpec> corpus;
      json kernel_hashes;
      auto files = kernel_files(kernels_dir);
      for (auto& f : files) {
        std::string src = read_file(f);
        corpus.push_back(parse_kernel(src));
        kernel_hashes[fs::path(f).filename().string()] = fnv1a(src);
      }
      auto ds = generate_dataset(corpus, factors, lib);
      json extra{{"kernels", kernel_hashes}, {"factors", factors_str}, {"seed", seed}};
      save_dataset(out_path, ds, extra);
      write_run_manifest(out_path, "gen-dataset", seed, extra, files);
      std::cerr << "wrote " << ds.inner_p.size() << " inner-p, " << ds.inner_np.size()
                << " inner-np, " << ds.global_s.size() << " global samples ("
                << ds.skipped << " skipped, " << ds.deduped << " deduped)\n";
    } else if (*cmd_train) {
      auto ds = load_dataset(dataset_dir);
      TrainConfig cfg;
      cfg.epochs = epochs;
      cfg.hidden = hidden;
      cfg.learning_rate = lr;
      cfg.seed = seed;
      cfg.variant = variant_from_name(variant_str);
      cfg.abort_mape = abort_mape;
      SplitMode mode = split_str == "kernel" ? SplitMode::ByKernel : SplitMode::Random;
      SupernodeLabels snl =
          snl_str == "oracle" ? SupernodeLabels::Oracle : SupernodeLabels::Predicted;
      auto [bundle, report] = train_hierarchical(ds, cfg, seed, mode, snl, jobs);
      save_bundle(bundle, out_path);
      write_run_manifest(out_path, "train", seed,
                         {{"dataset", dataset_dir},
                          {"epochs", epochs},
                          {"hidden", hidden},
                          {"variant", variant_str},
                          {"split", split_str},
                          {"supernode_labels", snl_str}},
                         {});
      std::cout << report_to_json(report).dump(2) << '\n';
    } else if (*cmd_predict) {
      auto spec = parse_kernel(read_file(kernel_path));
      auto cfg = config_from_json(read_json(config_path));
      auto bundle = load_bundle(bundle_dir);
      auto lib = resolve_oplib(oplib_path);
      auto q = predict_hierarchical(spec, cfg, bundle, lib);
      std::cout << qor_to_json(q).dump() << '\n';
    } else if (*cmd_eval) {
      auto spec = parse_kernel(read_file(kernel_path));
      auto cfg = config_from_json(read_json(config_path));
      auto lib = resolve_oplib(oplib_path);
      std::cout << qor_to_json(kernel_qor(spec, cfg, lib)).dump() << '\n';
    } else if (*cmd_dse) {
      auto spec = parse_kernel(read_file(kernel_path));
      auto bundle = load_bundle(bundle_dir);
      auto lib = resolve_oplib(oplib_path);
      ObjectiveMode mode =
          objectives_str == "4d" ? ObjectiveMode::FourD : ObjectiveMode::TwoD;
      auto rep = explore(spec, bundle, lib, parse_factors(factors_str), exact, jobs, mode);
      std::string dump = dse_report_to_json(rep).dump(2) + "\n";
      if (out_path.empty()) {
        std::cout << dump;
      } else {
        std::ofstream(out_path, std::ios::binary) << dump;
        write_run_manifest(out_path, "dse", seed,
                           {{"kernel", kernel_path}, {"factors", factors_str}},
                           {kernel_path});
      }
      if (rep.adrs_value >= 0)
        std::cerr << "adrs " << rep.adrs_value << " model " << rep.model_seconds
                  << "s oracle " << rep.oracle_seconds << "s\n";
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
