#include "gbnn/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "gbnn/error.hpp"

namespace gbnn::bench {
namespace {

constexpr std::uint64_t kCorpusSalt = 0x636f72707573ULL;
constexpr std::uint64_t kSelectSalt = 0x73656c656374ULL;
constexpr std::uint64_t kEraseSalt = 0x6572617365ULL;
constexpr std::uint64_t kChoiceSalt = 0x63686f696365ULL;

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t salt) { return splitmix64(seed ^ salt); }

std::uint64_t repetition_seed(const Scenario& s, std::uint32_t r) { return splitmix64(s.seed + r); }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view field) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw FormatError("bad numeric CSV field '" + std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool scenario1_like(const Scenario& s) {
  return s.shape == NetworkShape(8, 128) && s.stored == 5000 && s.probes == 3000 && s.gamma == 2 &&
         s.max_iters == 20;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void Scenario::validate() const {
  if (stored < 1) throw ConfigError("scenario needs at least one stored message");
  if (probes < 1 || probes > stored) throw ConfigError("probes must lie in [1, stored]");
  if (erased > shape.clusters()) throw ConfigError("cannot erase more clusters than the network has");
  if (repetitions < 1) throw ConfigError("scenario needs at least one repetition");
  if (rule == Rule::Emulated && effective_theta() < 2) throw ConfigError("theta must be at least 2");
  retrieval_config().validate();
}

RetrievalConfig Scenario::retrieval_config() const {
  RetrievalConfig c;
  c.rule = rule;
  c.gamma = gamma;
  c.max_iters = max_iters;
  c.seed = seed;
  c.batch = batch;
  c.workers = workers;
  return c;
}

Scenario Scenario::scenario1() {
  Scenario s;
  s.name = "scenario1";
  return s;
}

Scenario Scenario::scenario2() {
  Scenario s;
  s.name = "scenario2";
  s.shape = NetworkShape(16, 512);
  s.stored = 50000;
  s.probes = 30000;
  s.erased = 7;
  s.rule = Rule::Joint;
  s.repetitions = 1;
  return s;
}

std::vector<Message> generate_corpus(const NetworkShape& shape, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Symbol> pick(1, shape.cluster_size());
  std::vector<Message> corpus;
  corpus.reserve(count);
  std::vector<Symbol> symbols(shape.clusters());
  for (std::size_t i = 0; i < count; ++i) {
    for (auto& s : symbols) s = pick(rng);
    corpus.emplace_back(symbols);
  }
  return corpus;
}

Probe erase(const Message& msg, std::uint32_t e, std::uint64_t seed) {
  const auto C = static_cast<std::uint32_t>(msg.size());
  if (e > C) throw RangeError("cannot erase " + std::to_string(e) + " of " + std::to_string(C) + " clusters");
  std::vector<std::uint32_t> order(C);
  std::iota(order.begin(), order.end(), 0U);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first e entries are a uniform e-subset.
  for (std::uint32_t i = 0; i < e; ++i) {
    std::uniform_int_distribution<std::uint32_t> pick(i, C - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<Probe::Slot> slots(msg.symbols().begin(), msg.symbols().end());
  for (std::uint32_t i = 0; i < e; ++i) slots[order[i]].reset();
  return Probe(std::move(slots));
}

std::uint64_t corpus_hash(std::span<const Message> corpus) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& m : corpus) {
    mix(static_cast<std::uint32_t>(m.size()));
    for (auto s : m.symbols()) mix(s);
  }
  return h;
}

PreparedRun prepare(const Scenario& s, std::uint32_t repetition) {
  s.validate();
  const auto seed = repetition_seed(s, repetition);
  const auto corpus = generate_corpus(s.shape, s.stored, stream_seed(seed, kCorpusSalt));
  WeightMatrix w(s.shape);
  for (const auto& m : corpus) store(w, m);

  std::vector<std::size_t> order(s.stored);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(stream_seed(seed, kSelectSalt));
  for (std::size_t i = 0; i < s.probes; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, s.stored - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<Message> tests;
  tests.reserve(s.probes);
  for (std::size_t i = 0; i < s.probes; ++i) tests.push_back(corpus[order[i]]);

  auto sparse = sparsify(w);
  PreparedRun run{seed, corpus_hash(corpus), std::move(w), std::move(sparse), std::move(tests), {}};
  reerase(run, s.erased);
  return run;
}

void reerase(PreparedRun& run, std::uint32_t erased) {
  const auto base = stream_seed(run.seed, kEraseSalt);
  run.probes.clear();
  run.probes.reserve(run.tests.size());
  for (std::size_t k = 0; k < run.tests.size(); ++k) run.probes.push_back(erase(run.tests[k], erased, splitmix64(base + k)));
}

RetrievalOutcome decode(const PreparedRun& run, const Scenario& s) {
  const auto config = s.retrieval_config();
  const auto v0 = encode_probes(s.shape, run.probes, fill_policy(s.rule));
  switch (s.rule) {
    case Rule::SumOfSum: return run_sum_of_sum(run.w, v0, config);
    case Rule::SumOfMax: return run_sum_of_max(run.sparse, v0, config);
    case Rule::Joint: return run_joint(run.w, run.sparse, v0, config);
    case Rule::Emulated: return run_emulated(run.w, v0, config, EmulationConfig{s.effective_theta(), s.fixed_width});
  }
  throw ConfigError("unknown rule");
}

RepetitionReport score(const PreparedRun& run, const Scenario& s, const RetrievalOutcome& outcome,
                       std::uint32_t repetition) {
  RepetitionReport rep;
  rep.repetition = repetition;
  rep.seed = run.seed;
  rep.corpus_hash = run.corpus_hash;
  rep.wall_ms = outcome.wall_ms;
  rep.successes.assign(run.tests.size(), 0);
  const auto choice = stream_seed(run.seed, kChoiceSalt);
  std::size_t hits = 0;
  std::uint64_t iterations = 0;
  for (std::size_t k = 0; k < run.tests.size(); ++k) {
    const auto ex = extract_messages(s.shape, outcome.states.column(k));
    bool ok = false;
    if (ex.kind == Extraction::Kind::Unique) {
      ok = *ex.unique() == run.tests[k];
    } else if (ex.kind == Extraction::Kind::Ambiguous && s.counting == SuccessCounting::RandomChoice) {
      std::mt19937_64 rng(splitmix64(choice + k));
      ok = ex.sample(rng) == run.tests[k];
    }
    rep.successes[k] = ok;
    hits += ok;
    iterations += outcome.results[k].iterations;
    rep.oscillation_count += outcome.results[k].oscillation;
  }
  const auto n = static_cast<double>(run.tests.size());
  rep.retrieval_rate = static_cast<double>(hits) / n;
  rep.mean_iterations = static_cast<double>(iterations) / n;
  return rep;
}

double RunReport::retrieval_rate() const {
  double sum = 0;
  for (const auto& r : repetitions) sum += r.retrieval_rate;
  return repetitions.empty() ? 0.0 : sum / static_cast<double>(repetitions.size());
}

double RunReport::rate_std_error() const {
  const auto n = repetitions.size();
  if (n < 2) return 0.0;
  const auto mean = retrieval_rate();
  double ss = 0;
  for (const auto& r : repetitions) ss += (r.retrieval_rate - mean) * (r.retrieval_rate - mean);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

double RunReport::mean_iterations() const {
  double sum = 0;
  for (const auto& r : repetitions) sum += r.mean_iterations;
  return repetitions.empty() ? 0.0 : sum / static_cast<double>(repetitions.size());
}

std::size_t RunReport::oscillation_count() const {
  std::size_t n = 0;
  for (const auto& r : repetitions) n += r.oscillation_count;
  return n;
}

double RunReport::wall_ms() const {
  double sum = 0;
  for (const auto& r : repetitions) sum += r.wall_ms;
  return sum;
}

RunReport run_scenario(const Scenario& s) {
  s.validate();
  RunReport report{s, {}};
  for (std::uint32_t r = 0; r < s.repetitions; ++r) {
    const auto run = prepare(s, r);
    report.repetitions.push_back(score(run, s, decode(run, s), r));
  }
  return report;
}

std::vector<RunReport> run_grid(const Scenario& base, std::span<const Rule> rules,
                                std::span<const std::uint32_t> erasures, std::span<const std::uint32_t> gammas) {
  base.validate();
  std::vector<RunReport> reports;
  for (auto rule : rules)
    for (auto e : erasures)
      for (auto g : gammas) {
        auto s = base;
        s.rule = rule;
        s.erased = e;
        s.gamma = g;
        s.validate();
        reports.push_back({s, {}});
      }
  for (std::uint32_t r = 0; r < base.repetitions; ++r) {
    auto run = prepare(base, r);
    for (auto e : erasures) {
      reerase(run, e);
      for (auto& report : reports)
        if (report.scenario.erased == e)
          report.repetitions.push_back(score(run, report.scenario, decode(run, report.scenario), r));
    }
  }
  return reports;
}

std::vector<RunReport> gamma_sweep(const Scenario& base, std::span<const std::uint32_t> gammas) {
  const Rule rules[] = {Rule::SumOfSum};
  const std::uint32_t erasures[] = {base.erased};
  return run_grid(base, rules, erasures, gammas);
}

// --- CSV ------------------------------------------------------------------

const char* const kCsvHeader =
    "rule,C,L,stored,probes,e,gamma,theta,repetition,seed,corpus_hash,retrieval_rate,mean_iters,"
    "oscillation_count,wall_ms";

std::vector<CsvRow> csv_rows(std::span<const RunReport> reports) {
  std::vector<CsvRow> rows;
  for (const auto& report : reports) {
    const auto& s = report.scenario;
    for (const auto& rep : report.repetitions)
      rows.push_back({std::string(rule_name(s.rule)), s.shape.clusters(), s.shape.cluster_size(), s.stored, s.probes,
                      s.erased, s.gamma, s.rule == Rule::Emulated ? s.effective_theta() : 0, rep.repetition, rep.seed,
                      rep.corpus_hash, rep.retrieval_rate, rep.mean_iterations, rep.oscillation_count, rep.wall_ms});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
    return std::tie(a.rule, a.erased, a.gamma, a.repetition) < std::tie(b.rule, b.erased, b.gamma, b.repetition);
  });
  return rows;
}

std::string format_row_untimed(const CsvRow& r) {
  std::ostringstream out;
  out << r.rule << ',' << r.clusters << ',' << r.cluster_size << ',' << r.stored << ',' << r.probes << ',' << r.erased
      << ',' << r.gamma << ',' << r.theta << ',' << r.repetition << ',' << r.seed << ',' << r.corpus_hash << ','
      << format_double(r.retrieval_rate) << ',' << format_double(r.mean_iters) << ',' << r.oscillation_count;
  return out.str();
}

std::string format_row(const CsvRow& r) { return format_row_untimed(r) + ',' + format_double(r.wall_ms); }

void emit_csv(std::span<const RunReport> reports, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& row : csv_rows(reports)) out << format_row(row) << '\n';
  if (!out) throw std::ios_base::failure("CSV write failed");
}

void emit_csv(std::span<const RunReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string());
  emit_csv(reports, out);
}

std::vector<CsvRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("missing or unexpected CSV header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 15) throw FormatError("CSV row has " + std::to_string(f.size()) + " fields, expected 15");
    CsvRow r;
    r.rule = std::string(f[0]);
    r.clusters = parse_number<std::uint32_t>(f[1]);
    r.cluster_size = parse_number<std::uint32_t>(f[2]);
    r.stored = parse_number<std::size_t>(f[3]);
    r.probes = parse_number<std::size_t>(f[4]);
    r.erased = parse_number<std::uint32_t>(f[5]);
    r.gamma = parse_number<std::uint32_t>(f[6]);
    r.theta = parse_number<std::uint64_t>(f[7]);
    r.repetition = parse_number<std::uint32_t>(f[8]);
    r.seed = parse_number<std::uint64_t>(f[9]);
    r.corpus_hash = parse_number<std::uint64_t>(f[10]);
    r.retrieval_rate = parse_number<double>(f[11]);
    r.mean_iters = parse_number<double>(f[12]);
    r.oscillation_count = parse_number<std::size_t>(f[13]);
    r.wall_ms = parse_number<double>(f[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- acceptance bands -----------------------------------------------------

std::vector<BandCheck> check_bands(std::span<const RunReport> reports) {
  std::map<std::pair<Rule, std::uint32_t>, double> rate;
  for (const auto& r : reports)
    if (scenario1_like(r.scenario)) rate[{r.scenario.rule, r.scenario.erased}] = r.retrieval_rate();

  std::vector<BandCheck> checks;
  auto rate_of = [&](Rule rule, std::uint32_t e) -> std::optional<double> {
    const auto it = rate.find({rule, e});
    return it == rate.end() ? std::nullopt : std::optional<double>(it->second);
  };
  auto at_least = [&](Rule rule, std::uint32_t e, double lo) {
    if (const auto x = rate_of(rule, e))
      checks.push_back({std::string(rule_name(rule)) + " e=" + std::to_string(e) + " rate " + format_double(*x) +
                            " >= " + format_double(lo),
                        *x >= lo});
  };
  for (auto rule : {Rule::SumOfSum, Rule::SumOfMax, Rule::Joint}) at_least(rule, 3, 0.95);
  if (const auto x = rate_of(Rule::SumOfSum, 5))
    checks.push_back({"sos e=5 rate " + format_double(*x) + " in [0.45, 0.65]", *x >= 0.45 && *x <= 0.65});
  for (auto rule : {Rule::SumOfMax, Rule::Joint}) {
    at_least(rule, 5, 0.87);
    at_least(rule, 6, 0.17);
    const auto a = rate_of(rule, 6);
    const auto b = rate_of(Rule::SumOfSum, 6);
    if (a && b)
      checks.push_back({std::string(rule_name(rule)) + " e=6 rate " + format_double(*a) + " > sos " + format_double(*b),
                        *a > *b});
  }
  return checks;
}

}  // namespace gbnn::bench
