#include "prefdens/error.hpp"
#include "prefdens/expctl.hpp"
#include "prefdens/io.hpp"

namespace prefdens::expctl {

Check make_check(std::string name, double value, std::string op, double threshold) {
  Check c{std::move(name), value, std::move(op), threshold, false};
  if (c.op == "<=")
    c.pass = value <= threshold;
  else if (c.op == ">=")
    c.pass = value >= threshold;
  else if (c.op == "<")
    c.pass = value < threshold;
  else if (c.op == ">")
    c.pass = value > threshold;
  else if (c.op == "==")
    c.pass = value == threshold;
  else
    throw Error("unknown check operator " + c.op);
  // NaN never passes.
  if (value != value) c.pass = false;
  return c;
}

bool Summary::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

nlohmann::ordered_json Summary::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "prefdens.summary/1";
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["config"] = config;
  j["metrics"] = metrics;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name}, {"value", c.value}, {"op", c.op}, {"threshold", c.threshold}, {"pass", c.pass}});
  j["checks"] = cs;
  j["passed"] = passed();
  return j;
}

nlohmann::ordered_json RunRecord::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "prefdens.run_record/1";
  nlohmann::ordered_json m;
  m["name"] = manifest.name;
  m["seed"] = manifest.seed;
  m["config_file"] = manifest.config_file ? nlohmann::ordered_json(manifest.config_file->string()) : nullptr;
  m["overrides"] = manifest.overrides;
  m["out_dir"] = manifest.out_dir.string();
  j["manifest"] = m;
  j["config_hash"] = config_hash;
  j["wall_time_s"] = wall_time_s;
  nlohmann::ordered_json t = nlohmann::ordered_json::object();
  for (const auto& [k, v] : timings) t[k] = v;
  j["timings_s"] = t;
  j["files"] = files;
  j["passed"] = passed();
  return j;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

void OutputDir::write(const std::string& rel, const std::string& content) {
  const auto path = root_ / rel;
  std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, content);
  files_.push_back(rel);
}

std::string heatmap_csv(const GridDomain& domain, const std::vector<double>& p_true,
                        const std::vector<double>& p_model) {
  if (p_true.size() != domain.n * domain.n || p_model.size() != p_true.size())
    throw Error("heatmap: expected n*n probabilities");
  CsvWriter w({"x_a", "x_b", "p_true", "p_model"});
  for (std::size_t a = 0; a < domain.n; ++a)
    for (std::size_t b = 0; b < domain.n; ++b)
      w.row({fmt_double(domain.x(a)), fmt_double(domain.x(b)), fmt_double(p_true[a * domain.n + b]),
             fmt_double(p_model[a * domain.n + b])});
  return w.str();
}

}  // namespace prefdens::expctl
