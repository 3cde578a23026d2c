// Command-line front end: store corpora, decode probes, run benchmark scenarios.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbnn/bench.hpp"
#include "gbnn/emulation.hpp"
#include "gbnn/error.hpp"
#include "gbnn/retrieval.hpp"
#include "gbnn/simd.hpp"
#include "gbnn/storage.hpp"

namespace {

using namespace gbnn;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

bool is_weight_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  return in && std::string(magic, 8) == "GBNNWMAT";
}

WeightMatrix store_corpus(const NetworkShape& shape, const std::vector<std::string>& lines) {
  WeightMatrix w(shape);
  for (const auto& line : lines) {
    const auto msg = Message::parse(line);
    msg.validate(shape);
    store(w, msg);
  }
  return w;
}

struct ShapeOpts {
  std::uint32_t clusters = 0;
  std::uint32_t cluster_size = 0;
};

Rule rule_from(const std::string& name) {
  const auto r = parse_rule(name);
  if (!r) throw ConfigError("unknown rule '" + name + "' (sos, som, joint, emu)");
  return *r;
}

void print_reports(const std::vector<bench::RunReport>& reports) {
  std::printf("%-6s %3s %5s %10s %9s %10s %6s %12s\n", "rule", "e", "gamma", "rate", "stderr", "mean_iter", "osc",
              "wall_ms");
  for (const auto& r : reports)
    std::printf("%-6s %3u %5u %10.4f %9.4f %10.3f %6zu %12.1f\n", std::string(rule_name(r.scenario.rule)).c_str(),
                r.scenario.erased, r.scenario.gamma, r.retrieval_rate(), r.rate_std_error(), r.mean_iterations(),
                r.oscillation_count(), r.wall_ms());
}

int finish(const std::vector<bench::RunReport>& reports, const std::string& out, bool check) {
  print_reports(reports);
  if (!out.empty()) {
    if (out == "-")
      bench::emit_csv(reports, std::cout);
    else
      bench::emit_csv(reports, std::filesystem::path(out));
  }
  if (!check) return 0;
  int failures = 0;
  for (const auto& c : bench::check_bands(reports)) {
    std::printf("[%s] %s\n", c.passed ? "PASS" : "FAIL", c.description.c_str());
    failures += !c.passed;
  }
  return failures ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered binary associative memory"};
  app.require_subcommand(1);

  std::string simd = "auto";
  std::size_t threads = 0;
  app.add_option("--simd", simd, "Kernel set: auto, scalar, avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  app.add_option("--threads", threads, "Worker threads (0: GBNN_THREADS or hardware)");

  // store
  auto* store_cmd = app.add_subcommand("store", "Store a corpus of messages and write the weight matrix");
  ShapeOpts store_shape;
  std::string corpus_path, weights_out;
  std::size_t random_count = 0;
  std::uint64_t store_seed = 1;
  store_cmd->add_option("-C,--clusters", store_shape.clusters, "Number of clusters")->required();
  store_cmd->add_option("-L,--cluster-size", store_shape.cluster_size, "Neurons per cluster")->required();
  store_cmd->add_option("corpus", corpus_path, "Messages, one per line, comma separated");
  store_cmd->add_option("--random", random_count, "Store this many uniform random messages instead");
  store_cmd->add_option("--seed", store_seed, "Seed for --random");
  store_cmd->add_option("-o,--out", weights_out, "Weight matrix file")->required();

  // retrieve
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Decode probes against a stored network");
  ShapeOpts ret_shape;
  std::string ret_store, ret_probes_file, ret_rule = "som";
  std::vector<std::string> ret_probes;
  bench::Scenario ret;
  retrieve_cmd->add_option("--store", ret_store, "Weight matrix file or text corpus")->required();
  retrieve_cmd->add_option("-C,--clusters", ret_shape.clusters, "Clusters (text corpus only)");
  retrieve_cmd->add_option("-L,--cluster-size", ret_shape.cluster_size, "Cluster size (text corpus only)");
  retrieve_cmd->add_option("probe", ret_probes, "Probes such as ?,4,3,? ");
  retrieve_cmd->add_option("--probes", ret_probes_file, "File of probes, one per line");
  retrieve_cmd->add_option("--rule", ret_rule, "sos, som, joint or emu");
  retrieve_cmd->add_option("--gamma", ret.gamma, "Self-loop weight");
  retrieve_cmd->add_option("--max-iters", ret.max_iters, "Iteration cap for sos and emu");
  retrieve_cmd->add_option("--batch", ret.batch, "Columns decoded in lockstep");
  retrieve_cmd->add_option("--theta", ret.theta, "Emulation basis (default L+1)");
  std::uint32_t ret_width = 0;
  retrieve_cmd->add_option("--fixed-width", ret_width, "Emulation integer width in bits");
  bool show_states = false;
  retrieve_cmd->add_flag("--states", show_states, "Print final activation bits");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark scenario");
  std::string preset = "scenario1";
  bench_cmd->add_option("scenario", preset, "scenario1, scenario2 or custom")
      ->check(CLI::IsMember({"scenario1", "scenario2", "custom"}));

  auto* sweep_gamma_cmd = app.add_subcommand("sweep-gamma", "Sum-of-sum retrieval rate across gamma values");
  auto* sweep_erasure_cmd = app.add_subcommand("sweep-erasure", "Retrieval rate across erasure counts");

  // Options shared by the scenario commands.
  struct ScenarioOpts {
    ShapeOpts shape;
    std::size_t stored = 0, probes = 0;
    std::vector<std::string> rules;
    std::vector<std::uint32_t> erase, gammas;
    std::uint32_t max_iters = 0, repetitions = 0, fixed_width = 0;
    std::uint64_t seed = 1, theta = 0;
    std::size_t batch = 0;
    std::string counting = "unique", out;
    bool check = false;
  };
  ScenarioOpts so;
  for (auto* cmd : {bench_cmd, sweep_gamma_cmd, sweep_erasure_cmd}) {
    if (cmd != bench_cmd)
      cmd->add_option("--preset", preset, "Base scenario")->check(CLI::IsMember({"scenario1", "scenario2", "custom"}));
    cmd->add_option("-C,--clusters", so.shape.clusters, "Override cluster count");
    cmd->add_option("-L,--cluster-size", so.shape.cluster_size, "Override cluster size");
    cmd->add_option("--stored", so.stored, "Stored messages");
    cmd->add_option("--probes", so.probes, "Probes drawn from the stored corpus");
    cmd->add_option("--rule", so.rules, "Rules to run (repeatable)");
    cmd->add_option("--erase", so.erase, "Erased clusters (repeatable)");
    cmd->add_option("--gamma", so.gammas, "Gamma values (repeatable)");
    cmd->add_option("--max-iters", so.max_iters, "Iteration cap");
    cmd->add_option("--repetitions", so.repetitions, "Repetitions with derived seeds");
    cmd->add_option("--seed", so.seed, "Base seed");
    cmd->add_option("--batch", so.batch, "Columns decoded in lockstep");
    cmd->add_option("--theta", so.theta, "Emulation basis (default L+1)");
    cmd->add_option("--fixed-width", so.fixed_width, "Emulation integer width in bits");
    cmd->add_option("--counting", so.counting, "Success counting: unique or random")
        ->check(CLI::IsMember({"unique", "random"}));
    cmd->add_option("--out", so.out, "CSV output path ('-' for stdout)");
    cmd->add_flag("--check", so.check, "Exit nonzero when a retrieval-rate band is violated");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    simd::use_isa(*simd::parse_isa(simd));

    if (store_cmd->parsed()) {
      const NetworkShape shape(store_shape.clusters, store_shape.cluster_size);
      WeightMatrix w(shape);
      if (random_count) {
        for (const auto& m : bench::generate_corpus(shape, random_count, store_seed)) store(w, m);
      } else {
        if (corpus_path.empty()) throw ConfigError("give a corpus file or --random");
        w = store_corpus(shape, read_lines(corpus_path));
      }
      save_file(w, weights_out);
      std::printf("stored %llu messages, %zu edges, C=%u L=%u -> %s\n",
                  static_cast<unsigned long long>(w.stored_count()), w.edge_count(), shape.clusters(),
                  shape.cluster_size(), weights_out.c_str());
      return 0;
    }

    if (retrieve_cmd->parsed()) {
      std::optional<WeightMatrix> w;
      if (is_weight_file(ret_store)) {
        w = load_file(ret_store);
      } else {
        if (!ret_shape.clusters || !ret_shape.cluster_size)
          throw ConfigError("a text corpus needs -C and -L");
        w = store_corpus(NetworkShape(ret_shape.clusters, ret_shape.cluster_size), read_lines(ret_store));
      }
      const auto& shape = w->shape();
      if (!ret_probes_file.empty())
        for (auto& line : read_lines(ret_probes_file)) ret_probes.push_back(line);
      if (ret_probes.empty()) throw ConfigError("no probes given");
      std::vector<Probe> probes;
      for (const auto& text : ret_probes) {
        auto p = Probe::parse(text);
        p.validate(shape);
        probes.push_back(std::move(p));
      }

      ret.shape = shape;
      ret.rule = rule_from(ret_rule);
      ret.workers = threads;
      if (ret_width) ret.fixed_width = ret_width;
      const auto v0 = encode_probes(shape, probes, fill_policy(ret.rule));
      const auto config = ret.retrieval_config();
      RetrievalOutcome outcome{ActivationBatch(shape, 0), {}, 0.0};
      switch (ret.rule) {
        case Rule::SumOfSum: outcome = run_sum_of_sum(*w, v0, config); break;
        case Rule::SumOfMax: outcome = run_sum_of_max(sparsify(*w), v0, config); break;
        case Rule::Joint: outcome = run_joint(*w, sparsify(*w), v0, config); break;
        case Rule::Emulated:
          outcome = run_emulated(*w, v0, config, EmulationConfig{ret.effective_theta(), ret.fixed_width});
          break;
      }
      for (std::size_t k = 0; k < probes.size(); ++k) {
        const auto& res = outcome.results[k];
        const auto ex = extract_messages(shape, outcome.states.column(k));
        std::string found;
        switch (ex.kind) {
          case Extraction::Kind::Unique: found = ex.unique()->to_string(); break;
          case Extraction::Kind::Empty: found = "empty"; break;
          case Extraction::Kind::Ambiguous: {
            std::ostringstream s;
            s << "ambiguous";
            for (const auto& c : ex.candidates) {
              s << " {";
              for (std::size_t i = 0; i < c.size(); ++i) s << (i ? "," : "") << c[i];
              s << '}';
            }
            found = s.str();
            break;
          }
        }
        std::printf("%s -> %s  [%s, %u iterations%s]\n", probes[k].to_string().c_str(), found.c_str(),
                    res.status == Status::Converged ? "converged" : "max iterations", res.iterations,
                    res.oscillation ? ", oscillating" : "");
        if (show_states) std::printf("  %s\n", outcome.states.vector(k).to_bit_string(true).c_str());
      }
      return 0;
    }

    bench::Scenario base = preset == "scenario2" ? bench::Scenario::scenario2() : bench::Scenario::scenario1();
    if (preset == "custom") base.name = "custom";
    if (so.shape.clusters || so.shape.cluster_size)
      base.shape = NetworkShape(so.shape.clusters ? so.shape.clusters : base.shape.clusters(),
                                so.shape.cluster_size ? so.shape.cluster_size : base.shape.cluster_size());
    if (so.stored) base.stored = so.stored;
    if (so.probes) base.probes = so.probes;
    if (so.max_iters) base.max_iters = so.max_iters;
    if (so.repetitions) base.repetitions = so.repetitions;
    if (so.batch) base.batch = so.batch;
    if (so.fixed_width) base.fixed_width = so.fixed_width;
    base.seed = so.seed;
    base.theta = so.theta;
    base.workers = threads;
    base.counting = so.counting == "random" ? bench::SuccessCounting::RandomChoice : bench::SuccessCounting::UniqueOnly;

    std::vector<Rule> rules;
    for (const auto& r : so.rules) rules.push_back(rule_from(r));
    std::vector<std::uint32_t> gammas = so.gammas;
    std::vector<std::uint32_t> erasures = so.erase;

    if (sweep_gamma_cmd->parsed()) {
      if (gammas.empty()) gammas = {0, 1, 2, 4};
      if (erasures.empty()) erasures = {5};
      const Rule sos[] = {Rule::SumOfSum};
      return finish(bench::run_grid(base, sos, erasures, gammas), so.out, so.check);
    }

    if (gammas.empty()) gammas = {base.gamma};
    if (sweep_erasure_cmd->parsed()) {
      if (rules.empty()) rules = {Rule::SumOfSum, Rule::SumOfMax, Rule::Joint};
      if (erasures.empty())
        for (std::uint32_t e = 0; e <= base.shape.clusters(); ++e) erasures.push_back(e);
    } else if (preset == "scenario2") {
      if (rules.empty()) rules = {Rule::SumOfMax, Rule::Joint};
      if (erasures.empty()) erasures = {base.erased};
    } else {
      if (rules.empty()) rules = {Rule::SumOfSum, Rule::SumOfMax, Rule::Joint};
      if (erasures.empty()) erasures = preset == "scenario1" ? std::vector<std::uint32_t>{3, 4, 5, 6}
                                                              : std::vector<std::uint32_t>{base.erased};
    }
    return finish(bench::run_grid(base, rules, erasures, gammas), so.out, so.check);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
