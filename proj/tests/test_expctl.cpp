#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "oracle.hpp"
#include "prefdens/error.hpp"
#include "prefdens/expctl.hpp"
#include "prefdens/io.hpp"

using namespace prefdens;
using namespace prefdens::expctl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "prefdens_expctl_test" / name;
  fs::remove_all(p);
  return p;
}

Schema demo_schema() {
  return {{"n", ParamType::kInt, "4", "count"},
          {"rate", ParamType::kReal, "0.5", "rate"},
          {"on", ParamType::kBool, "false", "flag"},
          {"label", ParamType::kString, "x", "label"},
          {"betas", ParamType::kRealList, "1,4,16", "list"}};
}

std::vector<double> column(const CsvTable& t, const std::string& name) {
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(std::stod(r[t.column(name)]));
  return v;
}

std::vector<double> density_file(const fs::path& p) {
  std::vector<double> v = column(parse_csv(read_file(p)), "log_p");
  for (double& x : v) x = std::exp(x);
  return v;
}

}  // namespace

TEST_CASE("config: defaults, file, overrides") {
  Config c(demo_schema());
  CHECK(c.get_int("n") == 4);
  CHECK(c.get_reals("betas") == std::vector<double>{1, 4, 16});
  c.load_text("# comment\n n = 9\nrate=0.25 # trailing\n\non = true\n", "demo.cfg");
  CHECK(c.get_int("n") == 9);
  CHECK(c.get_real("rate") == 0.25);
  CHECK(c.get_bool("on"));
  c.set_assignment("betas=2, 3");
  CHECK(c.get_reals("betas") == std::vector<double>{2, 3});
  CHECK(c.canonical_text() == "n = 9\nrate = 0.25\non = true\nlabel = x\nbetas = 2,3\n");
  CHECK(c.to_json()["betas"].size() == 2);
}

TEST_CASE("config: errors carry the origin and line") {
  Config c(demo_schema());
  CHECK_THROWS_AS(c.set("nope", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("n", "1.5"), ConfigError);
  CHECK_THROWS_AS(c.set("rate", "abc"), ConfigError);
  CHECK_THROWS_AS(c.set("on", "yes"), ConfigError);
  CHECK_THROWS_AS(c.set_assignment("n"), ConfigError);
  CHECK_THROWS_AS(c.get_real("n"), ConfigError);
  try {
    c.load_text("n = 1\nbogus = 2\n", "f.cfg");
    FAIL("expected error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("f.cfg:2") != std::string::npos);
  }
}

TEST_CASE("config hash is the git blob hash of the canonical text") {
  Config a(demo_schema()), b(demo_schema());
  b.set("rate", "0.50");
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(git_blob_hash(a.canonical_text()) == git_blob_hash(b.canonical_text()));
}

TEST_CASE("registry covers every experiment with a valid schema") {
  const std::set<std::string> expected = {"reward-recovery",        "dpo-well-specified", "dpo-product-of-experts",
                                          "geometric-average",      "misspec-toy",        "misspec-toy-mixturefix",
                                          "loss-zoo",               "seq-length-bias",    "seq-misspec"};
  std::set<std::string> names;
  for (const auto& d : registry()) {
    names.insert(d.name);
    CHECK_FALSE(d.artifact.empty());
    Config c(d.schema());  // defaults must parse
    CHECK_FALSE(c.canonical_text().empty());
  }
  CHECK(names == expected);
  CHECK_THROWS_AS(find_experiment("nope"), ConfigError);
}

TEST_CASE("resolve_config precedence: defaults < file < overrides") {
  const fs::path dir = scratch("resolve");
  fs::create_directories(dir);
  write_file_atomic(dir / "c.cfg", "exact_steps = 100\nexact_lr = 1.0\n");
  ExperimentManifest m;
  m.name = "misspec-toy";
  m.config_file = dir / "c.cfg";
  m.overrides = {"exact_lr=0.5"};
  const Config c = resolve_config(m);
  CHECK(c.get_int("exact_steps") == 100);
  CHECK(c.get_real("exact_lr") == 0.5);
  CHECK(c.get_int("exact_grid_n") == 64);
}

TEST_CASE("checks") {
  CHECK(make_check("a", 0.5, "<=", 0.5).pass);
  CHECK_FALSE(make_check("a", 0.5, "<", 0.5).pass);
  CHECK(make_check("a", 2.0, ">=", 1.0).pass);
  CHECK(make_check("a", 1.0, "==", 1.0).pass);
  CHECK_FALSE(make_check("a", NAN, "<=", 1.0).pass);
  CHECK_THROWS(make_check("a", 1.0, "~", 1.0));
}

TEST_CASE("heatmap csv layout") {
  const GridDomain d(-1, 1, 3);
  const std::vector<double> t(9, 0.5), m(9, 0.25);
  const CsvTable c = parse_csv(heatmap_csv(d, t, m));
  CHECK(c.header == std::vector<std::string>{"x_a", "x_b", "p_true", "p_model"});
  CHECK(c.rows.size() == 9);
  CHECK(std::stod(c.rows[1][1]) == 0.0);
  CHECK_THROWS(heatmap_csv(d, t, std::vector<double>(8)));
}

TEST_CASE("misspec-toy: metrics recompute from the emitted files") {
  ExperimentManifest m;
  m.name = "misspec-toy";
  m.out_dir = scratch("misspec");
  m.overrides = {"exact_steps=1024"};
  const RunRecord r = run(m);
  for (const auto& f : r.files) CHECK(fs::exists(m.out_dir / f));
  CHECK(std::count(r.files.begin(), r.files.end(), "summary.json") == 1);
  const auto x = oracle::grid(-10, 10, 64);
  const double dx = x[1] - x[0];
  const auto p = density_file(m.out_dir / "p_star.csv");
  const auto ref = oracle::toy_target(x);
  for (std::size_t i = 0; i < 64; ++i) CHECK(p[i] == doctest::Approx(ref[i]).epsilon(1e-10));
  const auto q = density_file(m.out_dir / "single_head_annotator_mixture.csv");
  CHECK(r.summary.metrics["tv_single_head_annotator_mixture"].get<double>() ==
        doctest::Approx(oracle::tv(q, p, dx)).epsilon(1e-12));
  const CsvTable h = parse_csv(read_file(m.out_dir / "heatmap_annotator_mixture.csv"));
  const auto pt = column(h, "p_true"), pm = column(h, "p_model");
  double mse = 0.0;
  for (std::size_t i = 0; i < pt.size(); ++i) mse += (pt[i] - pm[i]) * (pt[i] - pm[i]);
  CHECK(r.summary.metrics["mse_single_head_annotator_mixture"].get<double>() ==
        doctest::Approx(mse / double(pt.size())).epsilon(1e-12));
  // Some true pairs sit near one half for the two-annotator process.
  std::size_t near_half = 0;
  for (double v : pt) near_half += std::abs(v - 0.5) < 0.1;
  CHECK(near_half > 100);
  const auto rec = nlohmann::json::parse(read_file(m.out_dir / "run_record.json"));
  CHECK(rec["schema"] == "prefdens.run_record/1");
  CHECK(rec["config_hash"] == git_blob_hash(read_file(m.out_dir / "config.txt")));
  CHECK(rec["files"].size() == r.files.size());
}

TEST_CASE("seq-length-bias: outcome tables recompute from the csv and runs are deterministic") {
  ExperimentManifest m;
  m.name = "seq-length-bias";
  m.out_dir = scratch("seqbias");
  const RunRecord r = run(m);
  const CsvTable t = parse_csv(read_file(m.out_dir / "outcomes_long.csv"));
  for (const auto& row : t.rows) {
    const std::string key = row[0] + "_vs_" + row[1];
    CHECK(r.summary.metrics["outcomes_long"][key]["unit"].get<double>() == std::stod(row[2]));
    CHECK(r.summary.metrics["outcomes_long"][key]["lennorm"].get<double>() == std::stod(row[3]));
  }
  const std::string first = read_file(m.out_dir / "summary.json");
  m.out_dir = scratch("seqbias2");
  run(m);
  CHECK(read_file(m.out_dir / "summary.json") == first);
}

TEST_CASE("sweep: per-value runs, offset seeds, aggregate csv") {
  ExperimentManifest m;
  m.name = "dpo-product-of-experts";
  m.out_dir = scratch("sweep");
  m.seed = 3;
  m.overrides = {"prior_steps=64", "exact_steps=256"};
  CHECK(sweep(m, "beta", {}).empty());
  CHECK_THROWS_AS(sweep(m, "nope", {"1"}), ConfigError);
  CHECK_THROWS_AS(sweep(m, "exact_steps", {"x"}), ConfigError);
  const auto recs = sweep(m, "beta", {"1", "4"});
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].summary.seed == 3);
  CHECK(recs[1].summary.seed == 4);
  const CsvTable agg = parse_csv(read_file(m.out_dir / "sweep_beta.csv"));
  CHECK(agg.rows.size() == 2);
  CHECK(agg.header[0] == "value");
  CHECK(agg.rows[1][agg.column("seed")] == "4");
}

TEST_CASE("run rejects unknown experiments") {
  ExperimentManifest m;
  m.name = "nope";
  m.out_dir = scratch("nope");
  CHECK_THROWS_AS(run(m), ConfigError);
}
