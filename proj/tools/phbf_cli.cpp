// phbf: command-line front end for the supply-chain tracking library.
//
// Machine-readable results go to stdout as one JSON object per line; human
// summaries go to stderr. Exit codes: 0 success or benign verdict, 1
// counterfeit detected (or replay expectation mismatch), 2 usage error.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "phbf/eval.hpp"
#include "phbf/hashing.hpp"
#include "phbf/state_io.hpp"
#include "phbf/supply_chain.hpp"

namespace {

using nlohmann::json;
using namespace phbf;

// Errors that should surface as exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exclusive advisory lock beside the state file; concurrent invocations
// against one state are rejected rather than queued.
class StateLock {
 public:
  explicit StateLock(const std::string& state_path) {
    const std::string lock_path = state_path + ".lock";
    fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw UsageError("cannot open lock file " + lock_path);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw UsageError("state file is in use by another process: " + state_path);
    }
  }
  StateLock(const StateLock&) = delete;
  StateLock& operator=(const StateLock&) = delete;
  ~StateLock() {
    if (fd_ >= 0) ::close(fd_);
  }

 private:
  int fd_ = -1;
};

struct ChainConfig {
  std::uint64_t capacity = 0;
  double fp_target = 0.1;
  std::uint64_t total_days = 0;
  std::uint64_t granularity = 0;
  std::uint32_t block_count = 0;
  std::uint32_t block_bits = 0;
  std::uint32_t threshold = 5;
  std::vector<std::string> locations;

  HbfParams hbf_params() const {
    return HbfParams::sized_for(block_count, block_bits, capacity, fp_target, threshold);
  }
};

ChainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw UsageError("config: " + std::string(e.what()));
  }
  for (const char* key : {"n", "T", "g", "N", "block_bits", "locations"}) {
    if (!doc.contains(key)) {
      throw UsageError(std::string("config: missing required key \"") + key + "\"");
    }
  }
  ChainConfig cfg;
  try {
    cfg.capacity = doc.at("n").get<std::uint64_t>();
    cfg.total_days = doc.at("T").get<std::uint64_t>();
    cfg.granularity = doc.at("g").get<std::uint64_t>();
    cfg.block_count = doc.at("N").get<std::uint32_t>();
    cfg.block_bits = doc.at("block_bits").get<std::uint32_t>();
    cfg.locations = doc.at("locations").get<std::vector<std::string>>();
    cfg.fp_target = doc.value("fp", 0.1);
    cfg.threshold = doc.value("th", 5u);
  } catch (const json::exception& e) {
    throw UsageError("config: " + std::string(e.what()));
  }
  if (cfg.locations.empty()) throw UsageError("config: locations must not be empty");
  return cfg;
}

SupplyChain build_chain(const ChainConfig& cfg) {
  try {
    return SupplyChain(cfg.locations, TimeTree(cfg.total_days, cfg.granularity),
                       cfg.hbf_params());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

SupplyChain load_state(const std::string& path) {
  if (path.empty()) {
    throw UsageError("no state file given (use --state or set PHBF_STATE)");
  }
  try {
    return io::load_chain_file(path);
  } catch (const std::exception& e) {
    throw UsageError(std::string("state: ") + e.what());
  }
}

Signature response_from_seed(std::uint64_t seed, std::size_t bits) {
  eval::SplitMix64 rng(seed);
  return eval::random_signature(bits, rng);
}

Signature parse_response(const std::string& hex, std::optional<std::uint64_t> seed,
                         std::size_t bits) {
  if (hex.empty() == !seed.has_value()) {
    throw UsageError("give exactly one of --response-hex or --response-seed");
  }
  if (!hex.empty()) {
    try {
      return Signature::from_hex(hex, bits);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("response: ") + e.what());
    }
  }
  return response_from_seed(*seed, bits);
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("range must look like START:END");
  try {
    return {std::stoull(text.substr(0, colon)), std::stoull(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("range must look like START:END with integer days");
  }
}

TrajectoryLeg parse_leg(const std::string& text) {
  const auto first = text.find(':');
  if (first == std::string::npos) throw UsageError("leg must look like LOCATION:START:END");
  const auto [start, end] = parse_range(text.substr(first + 1));
  return {text.substr(0, first), start, end};
}

eval::NoiseModel parse_noise(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  std::getline(in, kind, ':');
  try {
    if (kind == "uniform") {
      std::string p;
      std::getline(in, p);
      return eval::UniformNoise{std::stod(p)};
    }
    if (kind == "clustered") {
      std::string bursts, len;
      std::getline(in, bursts, ':');
      std::getline(in, len);
      return eval::ClusteredNoise{static_cast<std::uint32_t>(std::stoul(bursts)),
                                  static_cast<std::uint32_t>(std::stoul(len))};
    }
  } catch (const std::exception&) {
  }
  throw UsageError("noise must be uniform:<p> or clustered:<bursts>:<burst_len>");
}

json evidence_json(const std::vector<NodeMatch>& matches) {
  json out = json::array();
  for (const auto& nm : matches) {
    out.push_back({{"node", nm.node_index}, {"matches", nm.match_count}});
  }
  return out;
}

void emit(const json& record) { std::cout << record.dump() << "\n"; }

// ---------------------------------------------------------------------- init

int cmd_init(const std::string& config_path, const std::string& state_path, bool force) {
  const ChainConfig cfg = load_config(config_path);
  if (state_path.empty()) {
    throw UsageError("no state file given (use --state or set PHBF_STATE)");
  }
  if (std::filesystem::exists(state_path) && !force) {
    throw UsageError("state file " + state_path + " already exists (use --force)");
  }
  const SupplyChain chain = build_chain(cfg);
  const StateLock lock(state_path);
  io::save_chain_file(state_path, chain);
  const auto& p = chain.params();
  emit({{"command", "init"},
        {"state", state_path},
        {"m", p.filter_bits},
        {"k", p.hash_count},
        {"levels", chain.tree().levels()},
        {"u", chain.tree().node_count()},
        {"locations", chain.locations()}});
  std::cerr << "initialized " << state_path << ": m=" << p.filter_bits
            << " k=" << p.hash_count << " levels=" << chain.tree().levels()
            << " u=" << chain.tree().node_count() << "\n";
  return 0;
}

// ------------------------------------------------------------- observe, sell

int cmd_observe(const std::string& state_path, const std::string& marking,
                const std::string& hex, std::optional<std::uint64_t> seed,
                const std::string& location, std::uint64_t day) {
  const StateLock lock(state_path);
  SupplyChain chain = load_state(state_path);
  const Chip chip{marking, parse_response(hex, seed, chain.params().signature_bits())};
  try {
    chain.observe(chip, location, day);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  io::save_chain_file(state_path, chain);
  emit({{"command", "observe"}, {"marking", marking}, {"location", location}, {"day", day}});
  return 0;
}

int cmd_sell(const std::string& state_path, const std::string& hex,
             std::optional<std::uint64_t> seed) {
  const StateLock lock(state_path);
  SupplyChain chain = load_state(state_path);
  const Signature response = parse_response(hex, seed, chain.params().signature_bits());
  chain.mark_sold(Chip{"sold", response});
  io::save_chain_file(state_path, chain);
  emit({{"command", "sell"}});
  return 0;
}

// ------------------------------------------------------------------- detect

int cmd_detect_theft(const std::string& state_path, const std::string& marking,
                     const std::string& hex, std::optional<std::uint64_t> seed,
                     const std::vector<std::string>& leg_specs, bool expand) {
  const StateLock lock(state_path);
  const SupplyChain chain = load_state(state_path);
  std::vector<TrajectoryLeg> trajectory;
  for (const auto& spec : leg_specs) trajectory.push_back(parse_leg(spec));
  if (trajectory.empty()) throw UsageError("detect theft needs at least one --leg");
  const Chip chip{marking, parse_response(hex, seed, chain.params().signature_bits())};
  TheftReport report;
  try {
    report = chain.detect_theft(chip, trajectory, expand);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json legs = json::array();
  for (const auto& leg : report.legs) {
    legs.push_back({{"location", leg.leg.location},
                    {"start", leg.leg.start},
                    {"end", leg.leg.end},
                    {"found", leg.found},
                    {"evidence", evidence_json(leg.matches)}});
  }
  const bool stolen = report.stolen();
  emit({{"command", "detect"},
        {"kind", "theft"},
        {"marking", marking},
        {"verdict", stolen ? "Stolen" : "NotStolen"},
        {"missing", report.missing_locations()},
        {"legs", legs}});
  std::cerr << (stolen ? "STOLEN: missing from expected trajectory\n"
                       : "trajectory complete, not stolen\n");
  return stolen ? 1 : 0;
}

int cmd_detect_clone(const std::string& state_path, const std::string& marking,
                     const std::string& hex, std::optional<std::uint64_t> seed) {
  const StateLock lock(state_path);
  const SupplyChain chain = load_state(state_path);
  const Chip chip{marking, parse_response(hex, seed, chain.params().signature_bits())};
  const CloneVerdict verdict = chain.detect_clone(chip);
  const auto& oem = chain.location_filter(0);
  emit({{"command", "detect"},
        {"kind", "clone"},
        {"marking", marking},
        {"verdict", std::string(to_string(verdict))},
        {"evidence",
         evidence_json(oem.match_report(chip.response, 1, chain.tree().total_days()))}});
  std::cerr << to_string(verdict) << "\n";
  return verdict == CloneVerdict::ClonedOrOverproduced ? 1 : 0;
}

int cmd_detect_remarked(const std::string& state_path, const std::string& marking,
                        const std::string& hex, std::optional<std::uint64_t> seed) {
  const StateLock lock(state_path);
  const SupplyChain chain = load_state(state_path);
  const Chip chip{marking, parse_response(hex, seed, chain.params().signature_bits())};
  const RemarkVerdict verdict = chain.detect_remarked(chip);
  emit({{"command", "detect"},
        {"kind", "remarked"},
        {"marking", marking},
        {"verdict", std::string(to_string(verdict))},
        {"binding_matches",
         chain.binding_filter().match_count(chip.response, as_bytes(chip.marking))}});
  std::cerr << to_string(verdict) << "\n";
  return verdict == RemarkVerdict::Remarked ? 1 : 0;
}

int cmd_detect_recycled(const std::string& state_path, const std::string& hex,
                        std::optional<std::uint64_t> seed) {
  const StateLock lock(state_path);
  const SupplyChain chain = load_state(state_path);
  const Signature response = parse_response(hex, seed, chain.params().signature_bits());
  const RecycleVerdict verdict = chain.detect_recycled(response);
  emit({{"command", "detect"},
        {"kind", "recycled"},
        {"verdict", std::string(to_string(verdict))},
        {"sold_matches", chain.sold_filter().match_count(response)}});
  std::cerr << to_string(verdict) << "\n";
  return verdict == RecycleVerdict::Recycled ? 1 : 0;
}

// -------------------------------------------------------------------- cover

int cmd_cover(std::uint64_t total_days, std::uint64_t granularity, const std::string& range,
              bool expand) {
  const auto [start, end] = parse_range(range);
  try {
    const TimeTree tree(total_days, granularity);
    const auto cover = tree.canonical_cover(start, end, expand);
    std::string line;
    for (std::size_t i = 0; i < cover.size(); ++i) {
      const Interval iv = tree.interval(cover[i]);
      if (i > 0) line += ", ";
      line += "I" + std::to_string(iv.index) + " [" + std::to_string(iv.start) + "," +
              std::to_string(iv.end) + "]";
    }
    std::cout << line << "\n";
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return 0;
}

// ---------------------------------------------------------------------- roc

int cmd_roc(const std::string& out_path, std::uint64_t total_days, std::uint64_t granularity,
            std::uint32_t block_count, std::uint32_t block_bits, std::uint64_t capacity,
            double fp_target, std::uint32_t threshold, std::uint64_t enrolled,
            std::uint64_t impostors, const std::string& noise_spec, std::uint64_t seed) {
  const eval::NoiseModel noise = parse_noise(noise_spec);
  eval::RocConfig cfg;
  std::vector<eval::RocPoint> points;
  try {
    cfg = eval::RocConfig{
        total_days, granularity,
        HbfParams::sized_for(block_count, block_bits, capacity, fp_target, threshold)};
    const auto population =
        eval::generate_population(enrolled, cfg.hbf.signature_bits(), seed);
    points = eval::roc_sweep(population, noise, impostors, cfg, seed + 1);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::ofstream out(out_path);
  if (!out) throw UsageError("cannot open " + out_path + " for writing");
  out << "th,tpr,fpr\n";
  char row[64];
  for (const auto& pt : points) {
    std::snprintf(row, sizeof row, "%u,%.6f,%.6f\n", pt.threshold, pt.tpr, pt.fpr);
    out << row;
  }

  const auto& chosen = points.at(threshold);
  emit({{"command", "roc"},
        {"threshold", chosen.threshold},
        {"tpr", chosen.tpr},
        {"fpr", chosen.fpr},
        {"table", out_path},
        {"parameters",
         {{"T", total_days},
          {"g", granularity},
          {"N", block_count},
          {"block_bits", block_bits},
          {"n", capacity},
          {"fp", fp_target},
          {"m", cfg.hbf.filter_bits},
          {"k", cfg.hbf.hash_count},
          {"enrolled", enrolled},
          {"impostors", impostors},
          {"noise", noise_spec},
          {"seed", seed}}}});
  std::cerr << "roc table written to " << out_path << "; at th=" << threshold
            << " tpr=" << chosen.tpr << " fpr=" << chosen.fpr << "\n";
  return 0;
}

// ------------------------------------------------------------------- replay

// Scenario scripts drive a whole chain end to end:
//   chip <id> [seed=<u64>]                     declare (default seed: FNV-1a of id)
//   observe <id> <location> <day>
//   sell <id>
//   probe theft <id> legs=LOC:S:E[,...] [corrupt=<blocks>:<seed>] expect=<verdict>
//   probe clone marking=<id> (response-of=<id>|response-seed=<u64>) [corrupt=...] expect=<v>
//   probe remarked marking=<text> response-of=<id> [corrupt=...] expect=<v>
//   probe recycled (response-of=<id>|response-seed=<u64>) [corrupt=...] expect=<v>
class ScenarioRunner {
 public:
  ScenarioRunner(SupplyChain& chain) : chain_(chain) {}

  // Returns the number of expectation mismatches.
  int run(std::istream& in) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto words = tokenize(line);
      if (words.empty()) continue;
      try {
        execute(words);
      } catch (const UsageError&) {
        throw;
      } catch (const std::exception& e) {
        throw UsageError("scenario line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    emit({{"command", "replay"}, {"probes", probes_}, {"mismatches", mismatches_}});
    std::cerr << probes_ << " probes, " << mismatches_ << " mismatches\n";
    return mismatches_;
  }

 private:
  static std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> words;
    std::istringstream in(line);
    std::string w;
    while (in >> w) {
      if (w[0] == '#') break;
      words.push_back(w);
    }
    return words;
  }

  static std::optional<std::string> keyword(const std::vector<std::string>& words,
                                            const std::string& key) {
    const std::string prefix = key + "=";
    for (const auto& w : words) {
      if (w.rfind(prefix, 0) == 0) return w.substr(prefix.size());
    }
    return std::nullopt;
  }

  const Signature& chip_response(const std::string& id) {
    auto it = chips_.find(id);
    if (it == chips_.end()) {
      it = chips_
               .emplace(id, response_from_seed(fnv1a64(as_bytes(id)),
                                               chain_.params().signature_bits()))
               .first;
    }
    return it->second;
  }

  Signature maybe_corrupt(Signature s, const std::vector<std::string>& words) {
    const auto spec = keyword(words, "corrupt");
    if (!spec) return s;
    const auto colon = spec->find(':');
    if (colon == std::string::npos) throw UsageError("corrupt must be <blocks>:<seed>");
    const auto blocks = static_cast<std::uint32_t>(std::stoul(spec->substr(0, colon)));
    eval::SplitMix64 rng(std::stoull(spec->substr(colon + 1)));
    const auto& p = chain_.params();
    if (blocks > p.block_count) throw UsageError("corrupt: more blocks than the signature has");
    std::vector<std::uint32_t> order(p.block_count);
    for (std::uint32_t j = 0; j < p.block_count; ++j) order[j] = j;
    for (std::uint32_t j = 0; j < blocks; ++j) {
      std::swap(order[j], order[j + rng.below(p.block_count - j)]);
      for (std::uint32_t bit = 0; bit < p.block_bits; ++bit) {
        s.flip(order[j] * p.block_bits + bit);
      }
    }
    return s;
  }

  Signature probe_response(const std::vector<std::string>& words) {
    const auto of = keyword(words, "response-of");
    const auto seed = keyword(words, "response-seed");
    if (of.has_value() == seed.has_value()) {
      throw UsageError("give exactly one of response-of= or response-seed=");
    }
    if (of) return chip_response(*of);
    return response_from_seed(std::stoull(*seed), chain_.params().signature_bits());
  }

  void record_probe(const std::string& kind, const std::string& actual,
                    const std::string& expected, json extra = json::object()) {
    ++probes_;
    const bool match = actual == expected;
    if (!match) ++mismatches_;
    json record = {{"command", "probe"},
                   {"kind", kind},
                   {"verdict", actual},
                   {"expected", expected},
                   {"match", match}};
    record.update(extra);
    emit(record);
  }

  void execute(const std::vector<std::string>& words) {
    const std::string& op = words[0];
    if (op == "chip") {
      if (words.size() < 2) throw UsageError("chip needs an id");
      const auto seed = keyword(words, "seed");
      const std::uint64_t s = seed ? std::stoull(*seed) : fnv1a64(as_bytes(words[1]));
      chips_[words[1]] = response_from_seed(s, chain_.params().signature_bits());
      return;
    }
    if (op == "observe") {
      if (words.size() != 4) throw UsageError("observe needs: <id> <location> <day>");
      chain_.observe(Chip{words[1], chip_response(words[1])}, words[2],
                     std::stoull(words[3]));
      return;
    }
    if (op == "sell") {
      if (words.size() != 2) throw UsageError("sell needs: <id>");
      chain_.mark_sold(Chip{words[1], chip_response(words[1])});
      return;
    }
    if (op == "probe") {
      if (words.size() < 3) throw UsageError("probe needs a kind and arguments");
      const auto expected = keyword(words, "expect");
      if (!expected) throw UsageError("probe needs expect=<verdict>");
      const std::string& kind = words[1];
      if (kind == "theft") {
        const auto legs_spec = keyword(words, "legs");
        if (!legs_spec) throw UsageError("probe theft needs legs=LOC:S:E[,...]");
        std::vector<TrajectoryLeg> trajectory;
        std::istringstream legs(*legs_spec);
        std::string leg;
        while (std::getline(legs, leg, ',')) trajectory.push_back(parse_leg(leg));
        const Chip chip{words[2], maybe_corrupt(chip_response(words[2]), words)};
        const auto report = chain_.detect_theft(chip, trajectory);
        record_probe("theft", report.stolen() ? "Stolen" : "NotStolen", *expected,
                     {{"marking", words[2]}, {"missing", report.missing_locations()}});
        return;
      }
      if (kind == "clone" || kind == "remarked") {
        const auto marking = keyword(words, "marking");
        if (!marking) throw UsageError("probe " + kind + " needs marking=");
        const Chip chip{*marking, maybe_corrupt(probe_response(words), words)};
        const std::string verdict =
            kind == "clone" ? std::string(to_string(chain_.detect_clone(chip)))
                            : std::string(to_string(chain_.detect_remarked(chip)));
        record_probe(kind, verdict, *expected, {{"marking", *marking}});
        return;
      }
      if (kind == "recycled") {
        const Signature response = maybe_corrupt(probe_response(words), words);
        record_probe("recycled", std::string(to_string(chain_.detect_recycled(response))),
                     *expected);
        return;
      }
      throw UsageError("unknown probe kind " + kind);
    }
    throw UsageError("unknown scenario op " + op);
  }

  SupplyChain& chain_;
  std::map<std::string, Signature> chips_;
  int probes_ = 0;
  int mismatches_ = 0;
};

int cmd_replay(const std::string& config_path, const std::string& script_path,
               const std::string& state_path) {
  SupplyChain chain = build_chain(load_config(config_path));
  std::ifstream script(script_path);
  if (!script) throw UsageError("cannot open scenario " + script_path);
  ScenarioRunner runner(chain);
  const int mismatches = runner.run(script);
  if (!state_path.empty()) {
    const StateLock lock(state_path);
    io::save_chain_file(state_path, chain);
  }
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-tolerant temporal tracking of ICs by PUF signature"};
  app.require_subcommand(1);

  std::string state_path;
  const char* env_state = std::getenv("PHBF_STATE");
  if (env_state != nullptr) state_path = env_state;

  std::string config_path, marking, response_hex, location, range, noise_spec, out_path;
  std::string script_path;
  std::optional<std::uint64_t> response_seed;
  std::vector<std::string> legs;
  std::uint64_t day = 1, total_days = 128, granularity = 16, capacity = 1000;
  std::uint64_t enrolled = 1000, impostors = 1000, seed = 42;
  std::uint32_t block_count = 16, block_bits = 16, threshold = 5;
  double fp_target = 0.1;
  bool force = false, expand = false;
  int result = 0;

  const auto add_state = [&](CLI::App* cmd) {
    cmd->add_option("--state", state_path, "state file path (env PHBF_STATE)");
  };
  const auto add_response = [&](CLI::App* cmd) {
    cmd->add_option("--response-hex", response_hex, "chip response as hex");
    cmd->add_option("--response-seed", response_seed, "derive the response from a seed");
  };

  auto* init = app.add_subcommand("init", "create an empty chain state from a config");
  init->add_option("--config", config_path, "JSON config")->required();
  init->add_flag("--force", force, "overwrite an existing state file");
  add_state(init);
  init->callback([&] { result = cmd_init(config_path, state_path, force); });

  auto* observe = app.add_subcommand("observe", "record a chip sighting");
  observe->add_option("--marking", marking, "chip marking")->required();
  observe->add_option("--location", location, "registered location")->required();
  observe->add_option("--day", day, "day in [1, T]")->required();
  add_response(observe);
  add_state(observe);
  observe->callback([&] {
    result = cmd_observe(state_path, marking, response_hex, response_seed, location, day);
  });

  auto* sell = app.add_subcommand("sell", "record a sale to an end user");
  add_response(sell);
  add_state(sell);
  sell->callback([&] { result = cmd_sell(state_path, response_hex, response_seed); });

  auto* detect = app.add_subcommand("detect", "run a counterfeit query");
  detect->require_subcommand(1);

  auto* theft = detect->add_subcommand("theft", "check an expected trajectory");
  theft->add_option("--marking", marking, "chip marking")->required();
  theft->add_option("--leg", legs, "trajectory leg LOCATION:START:END (repeatable)");
  theft->add_flag("--expand", expand, "widen unaligned leg ranges");
  add_response(theft);
  add_state(theft);
  theft->callback([&] {
    result = cmd_detect_theft(state_path, marking, response_hex, response_seed, legs, expand);
  });

  auto* clone = detect->add_subcommand("clone", "check marking/response at the OEM");
  clone->add_option("--marking", marking, "chip marking")->required();
  add_response(clone);
  add_state(clone);
  clone->callback([&] {
    result = cmd_detect_clone(state_path, marking, response_hex, response_seed);
  });

  auto* remarked = detect->add_subcommand("remarked", "check marking consistency");
  remarked->add_option("--marking", marking, "chip marking")->required();
  add_response(remarked);
  add_state(remarked);
  remarked->callback([&] {
    result = cmd_detect_remarked(state_path, marking, response_hex, response_seed);
  });

  auto* recycled = detect->add_subcommand("recycled", "check the sold-chip registry");
  add_response(recycled);
  add_state(recycled);
  recycled->callback(
      [&] { result = cmd_detect_recycled(state_path, response_hex, response_seed); });

  auto* cover = app.add_subcommand("cover", "print the canonical cover of a day range");
  cover->add_option("--T,--days", total_days, "total days")->required();
  cover->add_option("--g,--granularity", granularity, "leaf granularity")->required();
  cover->add_option("--range", range, "day range START:END")->required();
  cover->add_flag("--expand", expand, "widen an unaligned range");
  cover->callback([&] { result = cmd_cover(total_days, granularity, range, expand); });

  auto* roc = app.add_subcommand("roc", "run a threshold sweep on synthetic data");
  roc->add_option("--out", out_path, "CSV output path")->required();
  roc->add_option("--T,--days", total_days, "total days");
  roc->add_option("--g,--granularity", granularity, "leaf granularity");
  roc->add_option("--N,--blocks", block_count, "signature blocks");
  roc->add_option("--block-bits", block_bits, "bits per block");
  roc->add_option("--capacity", capacity, "expected population for sizing");
  roc->add_option("--fp", fp_target, "per-filter false positive target");
  roc->add_option("--th", threshold, "threshold for the summary record");
  roc->add_option("--enrolled", enrolled, "enrolled population size");
  roc->add_option("--impostors", impostors, "impostor probe count");
  roc->add_option("--noise", noise_spec, "uniform:<p> or clustered:<bursts>:<len>")
      ->default_val("clustered:2:16");
  roc->add_option("--seed", seed, "generator seed");
  roc->callback([&] {
    result = cmd_roc(out_path, total_days, granularity, block_count, block_bits, capacity,
                     fp_target, threshold, enrolled, impostors, noise_spec, seed);
  });

  auto* replay = app.add_subcommand("replay", "replay a scenario script against a fresh chain");
  replay->add_option("--config", config_path, "JSON config")->required();
  replay->add_option("script", script_path, "scenario script")->required();
  add_state(replay);
  replay->callback([&] { result = cmd_replay(config_path, script_path, state_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return result;
}
