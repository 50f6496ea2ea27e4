#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "prefdens/expctl.hpp"
#include "prefdens/losses.hpp"
#include "prefdens/optim.hpp"
#include "prefdens/optimum.hpp"

namespace prefdens::expctl::detail {

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_;
};

// Keys shared by the toy-density experiments.
Schema toy_schema();

GridDomain exact_domain(const Config& cfg);

// Two-component truncated-normal target and its parts.
struct ToyTarget {
  LogDensity merged;
  LogDensity left;
  LogDensity right;
  double w_left = 0.4;
  double w_right = 0.6;
};
ToyTarget toy_target(const GridDomain& domain);

const Prior& prior_for(const Config& cfg, const GridDomain& domain, std::uint64_t seed);

struct ExactRun {
  std::vector<HistoryRow> history;
  double seconds = 0.0;
};

// Full-batch training on the exact pair objective with uniform proposal mass.
ExactRun train_exact(Policy& policy, const LossSpec& loss, const Annotator& annotator, const GridDomain& domain,
                     bool with_length, const Config& cfg, const std::optional<LogDensity>& reference);

// P(a beats b) on every ordered grid pair, row-major.
std::vector<double> annotator_heatmap(const Annotator& annotator, const GridDomain& domain);
std::vector<double> model_heatmap(const Policy& policy, const GridDomain& domain);
double mean_squared_error(const std::vector<double>& a, const std::vector<double>& b);

// Standard deviation over the grid of omega_target - omega_model.
double residual_std(const PbdeSpec& spec, const LogDensity& target, const LogDensity& model);

void write_density(OutputDir& out, const std::string& rel, const LogDensity& d);
void write_history(OutputDir& out, const std::string& rel, const std::vector<HistoryRow>& h);

std::string fmt_key(double v);

}  // namespace prefdens::expctl::detail
