#include <cstdio>

#include "prefdens/expctl.hpp"
#include "prefdens/io.hpp"

namespace prefdens::expctl {

VerifyResult verify(std::uint64_t seed, const std::filesystem::path& out_dir) {
  VerifyResult v;
  v.passed = true;
  nlohmann::ordered_json all;
  all["schema"] = "prefdens.verify/1";
  all["seed"] = seed;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& def : registry()) {
    ExperimentManifest m;
    m.name = def.name;
    m.seed = seed;
    m.out_dir = out_dir / def.name;
    RunRecord r = run(m);
    v.passed = v.passed && r.passed();
    runs.push_back(r.summary.to_json());
    v.records.push_back(std::move(r));
  }
  all["runs"] = runs;
  all["passed"] = v.passed;
  v.summary_json = all.dump(2) + "\n";
  write_file_atomic(out_dir / "verify_summary.json", v.summary_json);
  return v;
}

std::string format_verify_table(const VerifyResult& v) {
  std::string out;
  char line[512];
  for (const auto& r : v.records) {
    for (const auto& c : r.summary.checks) {
      std::snprintf(line, sizeof line, "%-4s %-24s %-62s %12.6g %s %g\n", c.pass ? "PASS" : "FAIL",
                    r.summary.experiment.c_str(), c.name.c_str(), c.value, c.op.c_str(), c.threshold);
      out += line;
    }
    std::snprintf(line, sizeof line, "     %-24s wall time %.1f s\n", r.summary.experiment.c_str(), r.wall_time_s);
    out += line;
  }
  out += v.passed ? "ALL CHECKS PASSED\n" : "SOME CHECKS FAILED\n";
  return out;
}

}  // namespace prefdens::expctl
