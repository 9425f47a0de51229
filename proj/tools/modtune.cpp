#include <chrono>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modtune/modtune.hpp"

using nlohmann::json;
using namespace modtune;

namespace {

constexpr std::uint64_t kDefaultSeed = 0x5eed;

enum Exit { kOk = 0, kFailure = 1, kParse = 2, kFlags = 3, kGeneration = 4, kOracleLimit = 5 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_edge_list(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// json stores doubles exactly; dump() prints the shortest round-trip form.
json config_json(const DetectConfig& c) {
  return {{"final_tuning", c.final_tuning},
          {"neighbor_only", c.neighbor_only},
          {"q", c.q},
          {"restarts", c.restarts},
          {"seed", c.seed}};
}

struct DetectArgs {
  std::string input;
  std::string out = "partition.csv";
  std::string summary = "summary.json";
  DetectConfig cfg;
};

int run_detect(const DetectArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  a.cfg.validate();
  const Graph g = load_graph(a.input);
  const DetectResult r = detect_best(g, a.cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream csv;
  write_partition_csv(csv, g, r.partition);
  write_text(a.out, csv.str());

  json warnings = json::array();
  if (g.duplicate_edges())
    warnings.push_back(std::to_string(g.duplicate_edges()) + " duplicate edges collapsed");
  if (r.nonconverged)
    warnings.push_back(std::to_string(r.nonconverged) +
                       " communities left whole because the eigensolver did not converge");
  json cfg = config_json(a.cfg);
  cfg["input"] = a.input;
  const json j = {{"command", "detect"},
                  {"community_count", r.partition.community_count()},
                  {"community_sizes", std::vector<int>(r.partition.sizes().begin(), r.partition.sizes().end())},
                  {"config", cfg},
                  {"duplicate_edges", g.duplicate_edges()},
                  {"edges", g.edge_count()},
                  {"modularity", r.modularity},
                  {"nodes", g.node_count()},
                  {"nonconverged_communities", r.nonconverged},
                  {"partition_csv", a.out},
                  {"round_trace", r.round_trace},
                  {"rounds", r.rounds},
                  {"seed", r.seed},
                  {"wall_time_s", wall},
                  {"warnings", warnings}};
  write_json(a.summary, j);
  std::cout << "modularity " << format_real(r.modularity) << "  communities "
            << r.partition.community_count() << "  seed " << r.seed << '\n';
  for (auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << '\n';
  return kOk;
}

struct EnsembleArgs {
  int count = 0;
  int nodes = 0;
  double avg_degree = 0;
  std::string hist_out = "histogram.csv";
  std::string qdist_out = "qdist.csv";
  std::string summary = "ensemble.json";
  DetectConfig cfg;
};

json stats_json(const EnsembleStats& st) {
  return {{"community_total", st.community_total()},
          {"histogram_mode", histogram_mode(st.size_histogram)},
          {"mean_q", st.mean_q},
          {"nonconverged_communities", st.nonconverged},
          {"rejected_disconnected", st.rejected_disconnected},
          {"sample_count", st.sample_count},
          {"stddev_defined", st.stddev_defined},
          {"stddev_q", st.stddev_defined ? json(st.stddev_q) : json(nullptr)}};
}

json ensemble_config_json(const EnsembleArgs& a) {
  json cfg = config_json(a.cfg);
  cfg.erase("restarts");
  cfg["count"] = a.count;
  cfg["nodes"] = a.nodes;
  cfg["avg_degree"] = a.avg_degree;
  return cfg;
}

void check_ensemble_args(const EnsembleArgs& a) {
  if (a.count < 1 || a.nodes < 2 || !(a.avg_degree > 0))
    throw std::invalid_argument("--count, --nodes and --avg-degree must be positive (nodes >= 2)");
  if (a.avg_degree > a.nodes - 1) throw std::invalid_argument("--avg-degree cannot exceed nodes - 1");
  a.cfg.validate();
}

int run_ensemble_cmd(const EnsembleArgs& a) {
  check_ensemble_args(a);
  const EnsembleStats st = run_ensemble(a.count, a.nodes, a.avg_degree, a.cfg, a.cfg.seed);

  std::ostringstream hist, qd;
  write_histogram_csv(hist, st.size_histogram);
  write_qdist_csv(qd, st.q_samples);
  write_text(a.hist_out, hist.str());
  write_text(a.qdist_out, qd.str());

  json j = stats_json(st);
  j["command"] = "ensemble";
  j["config"] = ensemble_config_json(a);
  j["histogram_csv"] = a.hist_out;
  j["qdist_csv"] = a.qdist_out;
  write_json(a.summary, j);
  std::cout << "mean_q " << format_real(st.mean_q) << "  stddev_q "
            << (st.stddev_defined ? format_real(st.stddev_q) : std::string("undefined")) << "  networks "
            << st.sample_count << '\n';
  return kOk;
}

// Same networks, detected with and without final-tuning.
int run_compare(const EnsembleArgs& a) {
  check_ensemble_args(a);
  DetectConfig cfgs[2] = {a.cfg, a.cfg};
  cfgs[0].final_tuning = false;
  cfgs[1].final_tuning = true;
  const auto st = run_ensembles(a.count, a.nodes, a.avg_degree, cfgs, a.cfg.seed);
  double gain = 0.0;
  int improved = 0;
  for (int i = 0; i < a.count; ++i) {
    const double d = st[1].q_samples[i] - st[0].q_samples[i];
    gain += d;
    if (d > 1e-12) ++improved;
  }
  gain /= a.count;

  json cfg = ensemble_config_json(a);
  cfg.erase("final_tuning");
  const json j = {{"command", "compare"},
                  {"config", cfg},
                  {"final_tuning", stats_json(st[1])},
                  {"mean_paired_improvement", gain},
                  {"networks_improved", improved},
                  {"no_final_tuning", stats_json(st[0])}};
  write_json(a.summary, j);
  std::cout << "mean_q without final-tuning " << format_real(st[0].mean_q) << "\n"
            << "mean_q with final-tuning    " << format_real(st[1].mean_q) << "\n"
            << "mean paired improvement     " << format_real(gain) << "  (" << improved << " of "
            << a.count << " networks improved)\n";
  return kOk;
}

struct OracleArgs {
  std::string input;
  int max_nodes = 12;
  std::string out = "oracle.csv";
  std::string summary;
};

int run_oracle(const OracleArgs& a) {
  if (a.max_nodes < 1 || a.max_nodes > 25) throw std::invalid_argument("--max-nodes must lie in [1, 25]");
  const Graph g = load_graph(a.input);
  const OracleResult r = exact_max(g, a.max_nodes);
  std::ostringstream csv;
  write_partition_csv(csv, g, r.best_partition);
  write_text(a.out, csv.str());
  if (!a.summary.empty())
    write_json(a.summary, {{"best_q", r.best_q},
                           {"command", "oracle"},
                           {"community_count", r.best_partition.community_count()},
                           {"config", {{"input", a.input}, {"max_nodes", a.max_nodes}}},
                           {"partition_csv", a.out},
                           {"partitions_examined", r.partitions_examined}});
  std::cout << "best_q " << format_real(r.best_q) << "  partitions " << r.partitions_examined << '\n';
  return kOk;
}

void add_detector_flags(CLI::App* sub, DetectConfig& cfg) {
  sub->add_option("--q", cfg.q, "Number of groups per division (q-section)")->capture_default_str();
  sub->add_flag("--final-tune,!--no-final-tune", cfg.final_tuning, "Run final-tuning after each round")
      ->capture_default_str();
  sub->add_flag("--neighbor-only,!--all-targets", cfg.neighbor_only,
                "Final-tuning moves only into neighbouring communities (or a new one)")
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", cfg.threads, "Worker threads (results do not depend on it)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modularity community detection with eigenvector q-sectioning and final-tuning"};
  app.require_subcommand(1);

  DetectArgs det;
  det.cfg.seed = kDefaultSeed;
  auto* d = app.add_subcommand("detect", "Detect communities in an edge-list file");
  d->add_option("--input", det.input, "Edge list: one 'u v' pair per line, '#' comments")->required();
  add_detector_flags(d, det.cfg);
  d->add_option("--restarts", det.cfg.restarts, "Independent runs; the best Q is kept")->capture_default_str();
  d->add_option("--out", det.out, "Partition CSV")->capture_default_str();
  d->add_option("--summary", det.summary, "Summary JSON")->capture_default_str();

  EnsembleArgs ens;
  ens.cfg.seed = kDefaultSeed;
  auto* e = app.add_subcommand("ensemble", "Community statistics over connected Erdos-Renyi networks");
  EnsembleArgs cmp;
  cmp.cfg.seed = kDefaultSeed;
  cmp.summary = "compare.json";
  auto* c = app.add_subcommand("compare", "Paired ensemble with and without final-tuning");
  for (auto [sub, args] : {std::pair{e, &ens}, std::pair{c, &cmp}}) {
    sub->add_option("--count", args->count, "Number of networks")->required();
    sub->add_option("--nodes", args->nodes, "Nodes per network")->required();
    sub->add_option("--avg-degree", args->avg_degree, "Average degree")->required();
    add_detector_flags(sub, args->cfg);
    sub->add_option("--summary", args->summary, "Summary JSON")->capture_default_str();
  }
  e->add_option("--hist-out", ens.hist_out, "Community-size histogram CSV")->capture_default_str();
  e->add_option("--qdist-out", ens.qdist_out, "Per-network modularity CSV")->capture_default_str();

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "Exact maximum modularity by exhaustive enumeration");
  o->add_option("--input", orc.input, "Edge-list file")->required();
  o->add_option("--max-nodes", orc.max_nodes, "Refuse larger graphs")->capture_default_str();
  o->add_option("--out", orc.out, "Optimal partition CSV")->capture_default_str();
  o->add_option("--summary", orc.summary, "Optional summary JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kFlags;
  }

  try {
    if (*d) return run_detect(det);
    if (*e) return run_ensemble_cmd(ens);
    if (*c) return run_compare(cmp);
    if (*o) return run_oracle(orc);
  } catch (const ParseError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kParse;
  } catch (const GraphError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kParse;
  } catch (const InputError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kParse;
  } catch (const GenerationError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kGeneration;
  } catch (const OracleLimitError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kOracleLimit;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kFlags;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
