#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prefdens/density.hpp"
#include "prefdens/pbde.hpp"

namespace prefdens {

struct PolicyCache {
  virtual ~PolicyCache() = default;
};

struct ForwardPass {
  std::vector<double> scores;  // one per item
  std::unique_ptr<PolicyCache> cache;
};

// A trainable model exposing a flat parameter vector. Scores are
// normalized log-densities, except for an energy network used as a raw
// reward, whose score is the unnormalized network output.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t num_params() const = 0;
  virtual std::vector<double> params() const = 0;
  virtual void set_params(std::span<const double> p) = 0;

  virtual ForwardPass forward(std::span<const Item> items) const = 0;
  // grad += sum_i dscore[i] * d score_i / d params.
  virtual void backward(std::span<const Item> items, const ForwardPass& fp,
                        std::span<const double> dscore, std::span<double> grad) const = 0;

  virtual std::unique_ptr<Policy> clone() const = 0;

  // Policies over a grid can report their full density.
  virtual bool has_grid() const { return false; }
  virtual LogDensity grid_density() const;

  double log_density(const Item& x) const;
  std::vector<double> scores(std::span<const Item> items) const { return forward(items).scores; }
};

// params -= scale * grad
void apply_grad(Policy& policy, std::span<const double> grad, double scale);

LogDensityFn as_log_density_fn(const Policy& policy);

class TabularPolicy final : public Policy {
 public:
  // One logit per grid point, normalized with trapezoid weights.
  TabularPolicy(const GridDomain& domain, std::vector<double> logits);
  // Finite item set: plain softmax.
  explicit TabularPolicy(std::vector<double> logits);

  static TabularPolicy from_density(const LogDensity& p);

  std::string kind() const override { return "tabular"; }
  std::size_t num_params() const override { return logits_.size(); }
  std::vector<double> params() const override { return logits_; }
  void set_params(std::span<const double> p) override;
  ForwardPass forward(std::span<const Item> items) const override;
  void backward(std::span<const Item> items, const ForwardPass& fp, std::span<const double> dscore,
                std::span<double> grad) const override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<TabularPolicy>(*this); }
  bool has_grid() const override { return grid_; }
  LogDensity grid_density() const override;

  const std::vector<double>& logits() const { return logits_; }
  // Normalized log-probabilities for every item in the universe.
  std::vector<double> log_probs() const;

 private:
  bool grid_ = false;
  GridDomain domain_;
  std::vector<double> logits_;
  std::vector<double> log_weights_;
};

// Fully connected 1 -> 64 -> 64 -> 64 -> 64 -> 1 with tanh hidden units.
class EnergyNetwork {
 public:
  static constexpr std::size_t kWidth = 64;
  static constexpr std::size_t kHidden = 4;
  static constexpr std::size_t kParamCount =
      (kWidth + kWidth) + (kHidden - 1) * (kWidth * kWidth + kWidth) + (kWidth + 1);

  explicit EnergyNetwork(std::uint64_t seed);
  EnergyNetwork(std::vector<double> params);

  std::size_t num_params() const { return params_.size(); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  struct Activations {
    std::size_t m = 0;
    std::vector<double> input;                // m
    std::vector<std::vector<double>> hidden;  // kHidden blocks of m x kWidth
  };

  // Batched network output for inputs x.
  std::vector<double> forward(std::span<const double> x, Activations* acts) const;
  // grad += d(sum_i dout[i] * out_i) / d params.
  void backward(const Activations& acts, std::span<const double> dout, std::span<double> grad) const;

 private:
  std::vector<double> params_;
};

class EnergyPolicy final : public Policy {
 public:
  enum class Mode { kRawReward, kGridNormalized };

  EnergyPolicy(EnergyNetwork net, Mode mode, const GridDomain& domain);

  std::string kind() const override { return mode_ == Mode::kRawReward ? "energy-reward" : "energy"; }
  std::size_t num_params() const override { return net_.num_params(); }
  std::vector<double> params() const override { return net_.params(); }
  void set_params(std::span<const double> p) override;
  ForwardPass forward(std::span<const Item> items) const override;
  void backward(std::span<const Item> items, const ForwardPass& fp, std::span<const double> dscore,
                std::span<double> grad) const override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<EnergyPolicy>(*this); }
  bool has_grid() const override { return true; }
  // exp(score) normalized on the grid, in either mode.
  LogDensity grid_density() const override;

  Mode mode() const { return mode_; }
  const EnergyNetwork& network() const { return net_; }
  const GridDomain& domain() const { return domain_; }

 private:
  EnergyNetwork net_;
  Mode mode_;
  GridDomain domain_;
};

// Weighted mixture of normalized heads; weights are softmax(weight_logits).
// Parameters are laid out as [head 0, head 1, ..., weight_logits].
class MixturePolicy final : public Policy {
 public:
  MixturePolicy(std::vector<std::unique_ptr<Policy>> heads, std::vector<double> weight_logits);
  MixturePolicy(const MixturePolicy& other);

  std::string kind() const override { return "mixture"; }
  std::size_t num_params() const override;
  std::vector<double> params() const override;
  void set_params(std::span<const double> p) override;
  ForwardPass forward(std::span<const Item> items) const override;
  void backward(std::span<const Item> items, const ForwardPass& fp, std::span<const double> dscore,
                std::span<double> grad) const override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<MixturePolicy>(*this); }
  bool has_grid() const override;
  LogDensity grid_density() const override;

  std::size_t num_heads() const { return heads_.size(); }
  const Policy& head(std::size_t k) const { return *heads_[k]; }
  std::size_t head_offset(std::size_t k) const;
  std::size_t weight_offset() const;
  std::vector<double> weights() const;
  const std::vector<double>& weight_logits() const { return weight_logits_; }

 private:
  std::vector<std::unique_ptr<Policy>> heads_;
  std::vector<double> weight_logits_;
};

std::string policy_to_json(const Policy& policy);
// Restores parameters into a policy of matching kind and size.
void policy_params_from_json(const std::string& text, Policy& policy);

}  // namespace prefdens
