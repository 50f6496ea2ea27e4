#include <algorithm>
#include <future>
#include <set>
#include <sstream>

#include "common.hpp"
#include "experiments.hpp"
#include "prefdens/error.hpp"
#include "prefdens/io.hpp"

namespace prefdens::expctl {

const std::vector<ExperimentDef>& registry() {
  using namespace detail;
  static const std::vector<ExperimentDef> defs = {
      {"reward-recovery", "learned reward versus implicit density, sampled and exact", reward_schema, reward_body},
      {"dpo-well-specified", "shared process for annotator and learner, four variants", dpo_well_schema,
       dpo_well_body},
      {"dpo-product-of-experts", "shifted learner beta sweep against prior times p* power", poe_schema, poe_body},
      {"geometric-average", "geometric learner alpha sweep against weighted geometric mean", geometric_schema,
       geometric_body},
      {"misspec-toy", "preference heatmaps for merged-density and two-annotator processes", misspec_schema,
       misspec_body},
      {"misspec-toy-mixturefix", "two-head mixture learner on the two-annotator process", mixturefix_schema,
       mixturefix_body},
      {"loss-zoo", "gradient checks plus IPO and SLiC regularization sweeps", loss_zoo_schema, loss_zoo_body},
      {"seq-length-bias", "outcome tables by length bin for band-trained annotators", seq_schema, seq_bias_body},
      {"seq-misspec", "length histograms after preference adaptation", seq_schema, seq_misspec_body},
  };
  return defs;
}

const ExperimentDef& find_experiment(const std::string& name) {
  for (const auto& d : registry())
    if (d.name == name) return d;
  std::string known;
  for (const auto& d : registry()) known += (known.empty() ? "" : ", ") + d.name;
  throw ConfigError("unknown experiment '" + name + "' (known: " + known + ")");
}

Config resolve_config(const ExperimentManifest& manifest) {
  Config cfg(find_experiment(manifest.name).schema());
  if (manifest.config_file) cfg.load_text(read_file(*manifest.config_file), manifest.config_file->string());
  for (const auto& a : manifest.overrides) cfg.set_assignment(a);
  return cfg;
}

RunRecord run(const ExperimentManifest& manifest) {
  detail::Stopwatch sw;
  const ExperimentDef& def = find_experiment(manifest.name);
  const Config cfg = resolve_config(manifest);
  RunRecord rec;
  rec.manifest = manifest;
  rec.config_hash = git_blob_hash(cfg.canonical_text());
  rec.summary.experiment = def.name;
  rec.summary.seed = manifest.seed;
  rec.summary.config = cfg.to_json();
  rec.summary.metrics["artifact"] = def.artifact;
  OutputDir out(manifest.out_dir);
  out.write("config.txt", cfg.canonical_text());
  RunContext ctx{cfg, manifest.seed, out, rec.summary, rec.timings};
  def.body(ctx);
  out.write("summary.json", rec.summary.to_json().dump(2) + "\n");
  rec.files = out.files();
  rec.files.push_back("run_record.json");
  rec.wall_time_s = sw.seconds();
  out.write("run_record.json", rec.to_json().dump(2) + "\n");
  return rec;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

std::vector<RunRecord> sweep(const ExperimentManifest& manifest, const std::string& param,
                             const std::vector<std::string>& values) {
  const Schema schema = find_experiment(manifest.name).schema();
  if (std::none_of(schema.begin(), schema.end(), [&](const ParamDef& d) { return d.key == param; }))
    throw ConfigError("experiment '" + manifest.name + "' has no parameter '" + param + "'");
  if (values.empty()) return {};
  std::vector<ExperimentManifest> points;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentManifest m = manifest;
    m.seed = manifest.seed + i;
    m.overrides.push_back(param + "=" + values[i]);
    m.out_dir = manifest.out_dir / (param + "_" + std::to_string(i));
    resolve_config(m);  // reject bad values before any work starts
    points.push_back(std::move(m));
  }
  std::vector<std::future<RunRecord>> jobs;
  for (const auto& m : points) jobs.push_back(std::async(std::launch::async, [m] { return run(m); }));
  std::vector<RunRecord> records;
  for (auto& j : jobs) records.push_back(j.get());

  // Numeric metrics present in every run become columns.
  std::vector<std::string> cols;
  for (const auto& [k, v] : records.front().summary.metrics.items())
    if (v.is_number() && std::all_of(records.begin(), records.end(), [&](const RunRecord& r) {
          return r.summary.metrics.contains(k) && r.summary.metrics[k].is_number();
        }))
      cols.push_back(k);
  std::ostringstream csv;
  csv << "value,seed,passed";
  for (const auto& c : cols) csv << ',' << csv_field(c);
  csv << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& s = records[i].summary;
    csv << csv_field(values[i]) << ',' << s.seed << ',' << (s.passed() ? 1 : 0);
    for (const auto& c : cols) csv << ',' << fmt_double(s.metrics[c].get<double>());
    csv << '\n';
  }
  std::filesystem::create_directories(manifest.out_dir);
  write_file_atomic(manifest.out_dir / ("sweep_" + param + ".csv"), csv.str());
  return records;
}

}  // namespace prefdens::expctl
