#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prefdens/density.hpp"
#include "prefdens/policy.hpp"

namespace prefdens::expctl {

enum class ParamType { kInt, kReal, kBool, kString, kRealList };

struct ParamDef {
  std::string key;
  ParamType type;
  std::string default_value;
  std::string help;
};

using Schema = std::vector<ParamDef>;

// Flat typed key/value configuration. Values are validated against the
// schema on every assignment and stored in canonical text form.
class Config {
 public:
  explicit Config(Schema schema);

  // "key = value" lines; '#' starts a comment. Unknown keys are errors.
  void load_text(const std::string& text, const std::string& origin);
  void set(const std::string& key, const std::string& value);
  // "key=value"
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<double> get_reals(const std::string& key) const;

  const Schema& schema() const { return schema_; }
  // Every key in schema order, one "key = value" line each.
  std::string canonical_text() const;
  nlohmann::ordered_json to_json() const;

 private:
  const ParamDef& def(const std::string& key) const;

  Schema schema_;
  std::map<std::string, std::string> values_;
};

struct ExperimentManifest {
  std::string name;
  std::uint64_t seed = 7;
  std::optional<std::filesystem::path> config_file;
  std::vector<std::string> overrides;  // "key=value", applied after the file
  std::filesystem::path out_dir = "out";
};

struct Check {
  std::string name;
  double value = 0.0;
  std::string op;  // "<=", ">=", "==", "<"
  double threshold = 0.0;
  bool pass = false;
};

Check make_check(std::string name, double value, std::string op, double threshold);

// Deterministic results of one experiment: metrics and checks only.
struct Summary {
  std::string experiment;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::vector<Check> checks;

  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

struct RunRecord {
  ExperimentManifest manifest;
  std::string config_hash;
  double wall_time_s = 0.0;
  std::vector<std::pair<std::string, double>> timings;  // named sections, seconds
  std::vector<std::string> files;                       // relative to out_dir
  Summary summary;

  bool passed() const { return summary.passed(); }
  nlohmann::ordered_json to_json() const;
};

// Collects emitted files for one run; writes atomically under out_dir.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);
  void write(const std::string& rel, const std::string& content);
  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

// Handed to each experiment body.
struct RunContext {
  const Config& config;
  std::uint64_t seed;
  OutputDir& out;
  Summary& summary;
  std::vector<std::pair<std::string, double>>& timings;
};

struct ExperimentDef {
  std::string name;
  std::string artifact;  // what the emitted data reproduces
  std::function<Schema()> schema;
  std::function<void(RunContext&)> body;
};

const std::vector<ExperimentDef>& registry();
const ExperimentDef& find_experiment(const std::string& name);

// Builds the config for a manifest: defaults, then file, then overrides.
Config resolve_config(const ExperimentManifest& manifest);

RunRecord run(const ExperimentManifest& manifest);

// One run per value (the key is overridden with each value), seeds offset
// by the value's index. Runs execute concurrently. Writes an aggregate CSV
// to out_dir/sweep_<param>.csv unless values is empty.
std::vector<RunRecord> sweep(const ExperimentManifest& manifest, const std::string& param,
                             const std::vector<std::string>& values);

struct VerifyResult {
  std::vector<RunRecord> records;
  std::string summary_json;  // deterministic
  bool passed = false;
};

// Runs every registered experiment with default configs into out_dir/<name>.
VerifyResult verify(std::uint64_t seed, const std::filesystem::path& out_dir);
std::string format_verify_table(const VerifyResult& v);

// Shared helpers for experiment bodies.
std::string heatmap_csv(const GridDomain& domain, const std::vector<double>& p_true,
                        const std::vector<double>& p_model);

// Energy-network prior regressed onto a truncated normal's log-density on
// the domain grid. Memoized per (domain, mu, sigma, seed, steps).
struct Prior {
  EnergyNetwork net;
  LogDensity density;
};
const Prior& pretrained_prior(const GridDomain& domain, double mu, double sigma, std::uint64_t seed,
                              std::size_t steps);

}  // namespace prefdens::expctl
