#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/io.hpp"
#include "prefdens/seq.hpp"

namespace prefdens::seq {

namespace {

std::vector<double> exp_all(const double* lp, std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = std::exp(lp[i]);
  return p;
}

}  // namespace

ArTable::ArTable(TokenSpace space, std::vector<double> log_start, std::vector<double> log_trans)
    : space_(space), log_start_(std::move(log_start)), log_trans_(std::move(log_trans)) {
  space_.validate();
  const std::size_t v = std::size_t(space_.vocab_size);
  if (log_start_.size() != v || log_trans_.size() != v * (v + 1)) throw Error("ar table: wrong table sizes");
  if (max_normalization_error() > 1e-9) throw Error("ar table: conditionals are not normalized");
}

double ArTable::max_normalization_error() const {
  auto row_err = [](const double* lp, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(lp[i]);
    return std::abs(s - 1.0);
  };
  double worst = row_err(log_start_.data(), log_start_.size());
  for (int a = 0; a < vocab(); ++a)
    worst = std::max(worst, row_err(log_trans_.data() + std::size_t(a) * row_width(), row_width()));
  return worst;
}

double ArTable::log_prob(const Sequence& s) const {
  if (s.empty() || int(s.size()) > space_.max_len) throw Error("sequence length outside 1..max_len");
  for (int t : s)
    if (t < 0 || t >= vocab()) throw Error("unknown token " + std::to_string(t));
  double lp = log_start_[s[0]];
  for (std::size_t i = 1; i < s.size(); ++i) lp += log_trans(s[i - 1], s[i]);
  if (int(s.size()) < space_.max_len) lp += log_trans(s.back(), space_.end_token());
  return lp;
}

Sequence ArTable::sample(Rng& rng) const {
  Sequence s;
  s.push_back(int(categorical(exp_all(log_start_.data(), log_start_.size()), rng)));
  while (int(s.size()) < space_.max_len) {
    const auto row = exp_all(log_trans_.data() + std::size_t(s.back()) * row_width(), row_width());
    const int next = int(categorical(row, rng));
    if (next == space_.end_token()) break;
    s.push_back(next);
  }
  return s;
}

std::vector<double> ArTable::length_distribution() const {
  const int v = vocab();
  std::vector<double> mass = exp_all(log_start_.data(), log_start_.size());
  std::vector<double> out(space_.max_len, 0.0);
  for (int len = 1; len < space_.max_len; ++len) {
    std::vector<double> next(v, 0.0);
    for (int a = 0; a < v; ++a) {
      out[len - 1] += mass[a] * std::exp(log_trans(a, v));
      for (int b = 0; b < v; ++b) next[b] += mass[a] * std::exp(log_trans(a, b));
    }
    mass.swap(next);
  }
  for (double m : mass) out[space_.max_len - 1] += m;
  return out;
}

double ArTable::entropy() const {
  const int v = vocab();
  auto plogp = [](double lp) { return lp <= kLogFloor ? 0.0 : -std::exp(lp) * lp; };
  std::vector<double> row_h(v, 0.0);
  for (int a = 0; a < v; ++a)
    for (int b = 0; b <= v; ++b) row_h[a] += plogp(log_trans(a, b));
  std::vector<double> mass = exp_all(log_start_.data(), log_start_.size());
  double h = 0.0;
  for (double lp : log_start_) h += plogp(lp);
  for (int len = 1; len < space_.max_len; ++len) {
    std::vector<double> next(v, 0.0);
    for (int a = 0; a < v; ++a) {
      h += mass[a] * row_h[a];
      for (int b = 0; b < v; ++b) next[b] += mass[a] * std::exp(log_trans(a, b));
    }
    mass.swap(next);
  }
  return h;
}

Sequence sample_seq(const ArTable& model, std::uint64_t seed) {
  Rng rng(seed);
  return model.sample(rng);
}

double seq_log_prob(const ArTable& model, const Sequence& s) { return model.log_prob(s); }

ArTable fit_ar_table(const std::vector<Sequence>& corpus, const TokenSpace& space, const LengthBand& band,
                     double smoothing) {
  space.validate();
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) throw ConfigError("smoothing must be finite and >= 0");
  const int v = space.vocab_size, w = v + 1;
  std::vector<double> start(v, smoothing), trans(std::size_t(v) * w, smoothing);
  std::size_t used = 0;
  for (const auto& s : corpus) {
    if (!band.contains(s.size())) continue;
    if (int(s.size()) > space.max_len) throw Error("corpus sequence longer than max_len");
    for (int t : s)
      if (t < 0 || t >= v) throw Error("unknown token " + std::to_string(t));
    ++used;
    start[s[0]] += 1.0;
    for (std::size_t i = 1; i < s.size(); ++i) trans[std::size_t(s[i - 1]) * w + s[i]] += 1.0;
    if (int(s.size()) < space.max_len) trans[std::size_t(s.back()) * w + v] += 1.0;
  }
  if (used == 0) throw ConfigError("no corpus sequences in band " + band.label);

  auto to_log = [](double* row, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += row[i];
    for (std::size_t i = 0; i < n; ++i) {
      if (total <= 0.0)
        row[i] = -std::log(double(n));
      else
        row[i] = row[i] > 0.0 ? std::max(std::log(row[i] / total), kLogFloor) : kLogFloor;
    }
  };
  to_log(start.data(), start.size());
  for (int a = 0; a < v; ++a) to_log(trans.data() + std::size_t(a) * w, w);
  return ArTable(space, std::move(start), std::move(trans));
}

std::string OutcomeTable::to_csv() const {
  CsvWriter w({"row_bin", "col_bin", "prob_unit", "prob_lennorm"});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) w.row({bin_name(r), bin_name(c), fmt_double(prob[r][c][0]), fmt_double(prob[r][c][1])});
  return w.str();
}

OutcomeTable outcome_table(const ArTable& annotator, const std::vector<Sequence>& eval) {
  const PbdeSpec unit = PbdeSpec::unit();
  const PbdeSpec lennorm = PbdeSpec::length_normalized();
  std::vector<double> om_u(eval.size()), om_n(eval.size());
  std::vector<int> bin(eval.size());
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const double lp = annotator.log_prob(eval[i]);
    const Item it{i, 0.0, int(eval[i].size())};
    om_u[i] = omega_from(unit, lp, it);
    om_n[i] = omega_from(lennorm, lp, it);
    bin[i] = int(length_bin(eval[i].size()));
  }
  double sum[3][3][2] = {};
  OutcomeTable t;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    for (std::size_t j = 0; j < eval.size(); ++j) {
      if (i == j) continue;
      const int r = bin[i], c = bin[j];
      sum[r][c][0] += sigmoid(om_u[i] - om_u[j]);
      sum[r][c][1] += sigmoid(om_n[i] - om_n[j]);
      ++t.pairs[r][c];
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (t.pairs[r][c] == 0) throw Error(std::string("outcome table: empty bin pair ") + bin_name(r) + bin_name(c));
      for (int k = 0; k < 2; ++k) t.prob[r][c][k] = sum[r][c][k] / double(t.pairs[r][c]);
    }
  }
  return t;
}

}  // namespace prefdens::seq
