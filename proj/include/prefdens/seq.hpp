#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "prefdens/optim.hpp"
#include "prefdens/pbde.hpp"
#include "prefdens/policy.hpp"

namespace prefdens::seq {

using Sequence = std::vector<int>;

// Tokens are 0..vocab_size-1; end_token() == vocab_size.
struct TokenSpace {
  int vocab_size = 32;
  int max_len = 12;

  void validate() const;
  int end_token() const { return vocab_size; }
};

// Token law of the synthetic corpus. Token i of a sequence belongs to
// position class min(i, positions - 1); within its class the variant is drawn
// from a bump whose center drifts with the sequence length, mixed with a
// uniform floor. Content therefore carries length information, which is
// what makes band-trained models disagree.
struct TokenLaw {
  int positions = 4;
  int variants = 8;
  double drift_width = 2.0;
  double floor = 0.05;

  int vocab_size() const { return positions * variants; }
  std::vector<double> variant_probs(int length, int max_len) const;
};

struct LengthBand {
  std::string label;
  int min_len = 1;
  int max_len = 12;

  static LengthBand short_band() { return {"short", 1, 4}; }
  static LengthBand whole_band() { return {"whole", 1, 12}; }
  static LengthBand long_band() { return {"long", 8, 12}; }
  bool contains(std::size_t len) const { return int(len) >= min_len && int(len) <= max_len; }
};

// Length law over 1..max_len; index 0 is length 1.
std::vector<double> uniform_length_law(int max_len);
std::vector<double> point_length_law(int max_len, int length);
// P(l) proportional to l * exp(-l / scale): right-skewed like sentence lengths.
std::vector<double> skewed_length_law(int max_len, double scale);

// Index drawn with the given probabilities (assumed to sum to 1).
std::size_t categorical(const std::vector<double>& probs, Rng& rng);

std::vector<Sequence> synth_corpus(const TokenSpace& space, const TokenLaw& law, const std::vector<double>& length_law,
                                   std::size_t n, std::uint64_t seed);

// Bigram model with start distribution, transitions to the next token or
// the end token, and forced termination at max_len (no end factor there).
class ArTable {
 public:
  ArTable(TokenSpace space, std::vector<double> log_start, std::vector<double> log_trans);

  const TokenSpace& space() const { return space_; }
  int vocab() const { return space_.vocab_size; }
  int row_width() const { return space_.vocab_size + 1; }
  double log_start(int tok) const { return log_start_[tok]; }
  double log_trans(int from, int to) const { return log_trans_[std::size_t(from) * row_width() + to]; }
  const std::vector<double>& log_start_vec() const { return log_start_; }
  const std::vector<double>& log_trans_vec() const { return log_trans_; }

  double log_prob(const Sequence& s) const;
  Sequence sample(Rng& rng) const;
  // Exact P(length = l) for l = 1..max_len, by forward recursion.
  std::vector<double> length_distribution() const;
  // Exact entropy of the sequence distribution, by forward recursion.
  double entropy() const;
  // Largest |sum - 1| over all conditionals.
  double max_normalization_error() const;

 private:
  TokenSpace space_;
  std::vector<double> log_start_;
  std::vector<double> log_trans_;
};

Sequence sample_seq(const ArTable& model, std::uint64_t seed);
double seq_log_prob(const ArTable& model, const Sequence& s);

// Add-smoothed counts on the sequences inside the band. Smoothing 0 is
// allowed; unseen events then get the log floor and empty rows are uniform.
ArTable fit_ar_table(const std::vector<Sequence>& corpus, const TokenSpace& space, const LengthBand& band,
                     double smoothing);

struct LengthHistogram {
  std::vector<std::size_t> counts;  // index 0 is length 1

  std::size_t total() const;
  std::vector<double> fractions() const;
  std::string to_csv() const;
  static LengthHistogram from_csv(const std::string& text);
};

LengthHistogram length_histogram(const std::vector<Sequence>& seqs, int max_len);

enum class LengthBin { S = 0, M = 1, L = 2 };
// S <= 4, M = 5..7, L >= 8.
LengthBin length_bin(std::size_t len);
const char* bin_name(int bin);

// Mass of the S, M, L bands from a histogram's fractions.
std::array<double, 3> band_masses(const std::vector<double>& fractions);
// Two peaks with an interior valley deeper than tol below both.
bool is_bimodal(const std::vector<double>& fractions, double tol = 0.005);

struct OutcomeTable {
  // prob[r][c][0] = Unit, prob[r][c][1] = LengthNormalized: mean probability
  // that a sequence from bin r beats one from bin c.
  double prob[3][3][2] = {};
  std::size_t pairs[3][3] = {};

  double unit(LengthBin r, LengthBin c) const { return prob[int(r)][int(c)][0]; }
  double lennorm(LengthBin r, LengthBin c) const { return prob[int(r)][int(c)][1]; }
  std::string to_csv() const;
};

OutcomeTable outcome_table(const ArTable& annotator, const std::vector<Sequence>& eval);

// Policy over a fixed pool of sequences (Item.id indexes the pool),
// parameterized by unconstrained logits per conditional.
class ArPolicy final : public Policy {
 public:
  ArPolicy(const ArTable& init, std::shared_ptr<const std::vector<Sequence>> pool);

  std::string kind() const override { return "ar-table"; }
  std::size_t num_params() const override { return logits_.size(); }
  std::vector<double> params() const override { return logits_; }
  void set_params(std::span<const double> p) override;
  ForwardPass forward(std::span<const Item> items) const override;
  void backward(std::span<const Item> items, const ForwardPass& fp, std::span<const double> dscore,
                std::span<double> grad) const override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<ArPolicy>(*this); }

  ArTable table() const;

 private:
  std::vector<double> log_softmax_rows() const;
  // Parameter indices touched by sequence s, one per factor.
  void features(const Sequence& s, std::vector<std::size_t>& out) const;

  TokenSpace space_;
  std::shared_ptr<const std::vector<Sequence>> pool_;
  std::vector<double> logits_;  // [start (V), transitions (V x (V+1))]
};

Item pool_item(const std::vector<Sequence>& pool, std::size_t id);

enum class MixtureKind { kAnnotatorMixture, kDensityMixture };
const char* mixture_kind_name(MixtureKind k);

struct SeqPreferenceData {
  std::shared_ptr<std::vector<Sequence>> pool;
  PreferenceDataset dataset;
};

// Pairs are sampled from the whole model; labels use the length-normalized
// rule under either a 50/50 mixture of annotators or a single annotator on
// the 50/50 density mixture.
SeqPreferenceData build_pref_dataset(MixtureKind kind, const ArTable& short_model, const ArTable& long_model,
                                     const ArTable& whole, std::size_t n, std::uint64_t seed);

// Annotator used by build_pref_dataset, over items of the given pool.
Annotator seq_annotator(MixtureKind kind, const ArTable& short_model, const ArTable& long_model,
                        std::shared_ptr<const std::vector<Sequence>> pool);

struct AdaptConfig {
  std::size_t steps = 20000;
  std::size_t batch_size = 512;
  AdamConfig adam{0.03};
};

struct AdaptResult {
  ArTable model;
  std::vector<HistoryRow> history;
};

AdaptResult adapt_on_preferences(const ArTable& whole, const SeqPreferenceData& data, const AdaptConfig& config,
                                 std::uint64_t seed);

}  // namespace prefdens::seq
