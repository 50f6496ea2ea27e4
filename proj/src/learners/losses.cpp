#include <cmath>
#include <unordered_map>

#include "prefdens/error.hpp"
#include "prefdens/io.hpp"
#include "prefdens/losses.hpp"

namespace prefdens {

std::string LossSpec::name() const {
  struct V {
    std::string operator()(const loss::Bce& b) const { return "bce[" + b.pbde.name() + "]"; }
    std::string operator()(const loss::SlicDirect& s) const {
      return "slic(delta=" + fmt_double(s.delta) + ", lambda=" + fmt_double(s.lambda) + ")";
    }
    std::string operator()(const loss::RsoHinge& r) const { return "rso(delta=" + fmt_double(r.delta) + ")"; }
    std::string operator()(const loss::Ipo& i) const { return "ipo(tau=" + fmt_double(i.tau) + ")"; }
    std::string operator()(const loss::RrhfRank& r) const {
      return std::string("rrhf(") + (r.length_normalized ? "length-normalized, " : "") +
             "nll=" + fmt_double(r.nll_coeff) + ")";
    }
    std::string operator()(const loss::MixtureBce&) const { return "mixture-bce"; }
  };
  return std::visit(V{}, kind);
}

namespace {

double total_pair_weight(const TrainingBatch& batch) {
  if (batch.pairs.empty()) throw ConfigError("loss needs a nonempty batch of pairs");
  double w = 0.0;
  for (const auto& p : batch.pairs) w += p.weight;
  if (!(w > 0.0)) throw ConfigError("pair weights must have positive total");
  return w;
}

// Soft-label hinge: y * (delta - h)+ + (1 - y) * (delta + h)+.
double hinge(double h, double y, double delta, double* dh) {
  double l = 0.0, d = 0.0;
  if (delta - h > 0.0) {
    l += y * (delta - h);
    d -= y;
  }
  if (delta + h > 0.0) {
    l += (1.0 - y) * (delta + h);
    d += 1.0 - y;
  }
  *dh = d;
  return l;
}

std::vector<double> reference_values(const LogDensityFn& ref, const std::vector<Item>& points) {
  if (!ref) throw ConfigError("loss needs a reference density");
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = ref(points[i]);
    if (!std::isfinite(out[i])) throw Error("reference log-density is not finite");
  }
  return out;
}

struct Scored {
  ForwardPass fp;
  std::vector<double> dscore;
};

Scored score(const Policy& policy, const TrainingBatch& batch) {
  Scored s{policy.forward(batch.points), {}};
  s.dscore.assign(batch.points.size(), 0.0);
  return s;
}

LossResult finish(const Policy& policy, const TrainingBatch& batch, Scored& s, double loss) {
  LossResult r;
  r.loss = loss;
  r.grad.assign(policy.num_params(), 0.0);
  policy.backward(batch.points, s.fp, s.dscore, r.grad);
  return r;
}

LossResult eval_bce(const loss::Bce& spec, const Policy& policy, const TrainingBatch& batch) {
  const double wsum = total_pair_weight(batch);
  Scored s = score(policy, batch);
  std::vector<Coeffs> c(batch.points.size());
  std::vector<double> om(batch.points.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = coefficients(spec.pbde, batch.points[i]);
    om[i] = c[i].f * s.fp.scores[i] + c[i].g;
  }
  double total = 0.0;
  for (const auto& p : batch.pairs) {
    const double m = om[p.a] - om[p.b];
    const double w = p.weight / wsum;
    total += w * (-p.label * log_sigmoid(m) - (1.0 - p.label) * log_sigmoid(-m));
    const double dm = w * (sigmoid(m) - p.label);
    s.dscore[p.a] += dm * c[p.a].f;
    s.dscore[p.b] -= dm * c[p.b].f;
  }
  return finish(policy, batch, s, total);
}

LossResult eval_slic(const loss::SlicDirect& spec, const Policy& policy, const TrainingBatch& batch) {
  if (spec.delta < 0.0 || spec.lambda < 0.0) throw ConfigError("SLiC needs delta >= 0 and lambda >= 0");
  if (spec.lambda > 0.0 && batch.reg.empty()) throw ConfigError("SLiC with lambda > 0 needs regularization samples");
  const double wsum = total_pair_weight(batch);
  Scored s = score(policy, batch);
  const auto& sc = s.fp.scores;
  double total = 0.0;
  for (const auto& p : batch.pairs) {
    const double w = p.weight / wsum;
    double dh;
    total += w * hinge(sc[p.a] - sc[p.b], p.label, spec.delta, &dh);
    s.dscore[p.a] += w * dh;
    s.dscore[p.b] -= w * dh;
  }
  if (spec.lambda > 0.0) {
    for (const auto& r : batch.reg) {
      total -= spec.lambda * r.weight * sc[r.index];
      s.dscore[r.index] -= spec.lambda * r.weight;
    }
  }
  return finish(policy, batch, s, total);
}

LossResult eval_rso(const loss::RsoHinge& spec, const Policy& policy, const TrainingBatch& batch) {
  if (spec.delta < 0.0) throw ConfigError("RSO needs delta >= 0");
  const double wsum = total_pair_weight(batch);
  const auto ref = reference_values(spec.reference, batch.points);
  Scored s = score(policy, batch);
  const auto& sc = s.fp.scores;
  double total = 0.0;
  for (const auto& p : batch.pairs) {
    const double w = p.weight / wsum;
    const double h = (sc[p.a] - ref[p.a]) - (sc[p.b] - ref[p.b]);
    double dh;
    total += w * hinge(h, p.label, spec.delta, &dh);
    s.dscore[p.a] += w * dh;
    s.dscore[p.b] -= w * dh;
  }
  return finish(policy, batch, s, total);
}

LossResult eval_ipo(const loss::Ipo& spec, const Policy& policy, const TrainingBatch& batch) {
  if (!(spec.tau > 0.0)) throw ConfigError("IPO needs tau > 0");
  const double target = 1.0 / (2.0 * spec.tau);
  const double wsum = total_pair_weight(batch);
  const auto ref = reference_values(spec.reference, batch.points);
  Scored s = score(policy, batch);
  const auto& sc = s.fp.scores;
  double total = 0.0;
  for (const auto& p : batch.pairs) {
    const double w = p.weight / wsum;
    const double h = (sc[p.a] - ref[p.a]) - (sc[p.b] - ref[p.b]);
    const double up = h - target, down = -h - target;
    total += w * (p.label * up * up + (1.0 - p.label) * down * down);
    const double dh = w * (2.0 * p.label * up - 2.0 * (1.0 - p.label) * down);
    s.dscore[p.a] += dh;
    s.dscore[p.b] -= dh;
  }
  return finish(policy, batch, s, total);
}

LossResult eval_rrhf(const loss::RrhfRank& spec, const Policy& policy, const TrainingBatch& batch) {
  if (batch.lists.empty()) throw ConfigError("RRHF needs at least one ranked list");
  if (spec.nll_coeff < 0.0) throw ConfigError("RRHF needs nll_coeff >= 0");
  Scored s = score(policy, batch);
  const auto& sc = s.fp.scores;
  const double inv_lists = 1.0 / static_cast<double>(batch.lists.size());
  auto scale = [&](std::size_t idx) {
    if (!spec.length_normalized) return 1.0;
    const int len = batch.points[idx].length;
    if (len < 1) throw ConfigError("length-normalized RRHF needs items with a length");
    return 1.0 / len;
  };
  double total = 0.0;
  for (const auto& list : batch.lists) {
    const auto& o = list.order;
    if (o.size() < 2) throw ConfigError("RRHF lists need at least 2 items");
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double pi = sc[o[i]] * scale(o[i]);
      for (std::size_t j = i + 1; j < o.size(); ++j) {
        const double pj = sc[o[j]] * scale(o[j]);
        if (pj > pi) {
          total += inv_lists * (pj - pi);
          s.dscore[o[j]] += inv_lists * scale(o[j]);
          s.dscore[o[i]] -= inv_lists * scale(o[i]);
        }
      }
    }
    total -= inv_lists * spec.nll_coeff * sc[o[0]];
    s.dscore[o[0]] -= inv_lists * spec.nll_coeff;
  }
  return finish(policy, batch, s, total);
}

}  // namespace

LossResult mixture_bce_loss(const MixturePolicy& policy, const TrainingBatch& batch) {
  const double wsum = total_pair_weight(batch);
  const std::size_t kc = policy.num_heads();
  const std::vector<double> wts = policy.weights();
  std::vector<double> log_w(kc);
  for (std::size_t k = 0; k < kc; ++k) log_w[k] = std::log(wts[k]);

  std::vector<ForwardPass> fps;
  for (std::size_t k = 0; k < kc; ++k) fps.push_back(policy.head(k).forward(batch.points));
  std::vector<std::vector<double>> dscore(kc, std::vector<double>(batch.points.size(), 0.0));
  std::vector<double> dlogit(kc, 0.0);

  std::vector<double> m(kc), up(kc), down(kc);
  double total = 0.0;
  for (const auto& p : batch.pairs) {
    const double w = p.weight / wsum;
    for (std::size_t k = 0; k < kc; ++k) {
      m[k] = fps[k].scores[p.a] - fps[k].scores[p.b];
      up[k] = log_w[k] + log_sigmoid(m[k]);
      down[k] = log_w[k] + log_sigmoid(-m[k]);
    }
    const double log_p = log_sum_exp(up);
    const double log_q = log_sum_exp(down);
    total += w * (-p.label * log_p - (1.0 - p.label) * log_q);
    for (std::size_t k = 0; k < kc; ++k) {
      const double r = std::exp(up[k] - log_p);    // posterior of head k given "a wins"
      const double rq = std::exp(down[k] - log_q);  // ... given "b wins"
      const double dm = w * (-p.label * r * sigmoid(-m[k]) + (1.0 - p.label) * rq * sigmoid(m[k]));
      dscore[k][p.a] += dm;
      dscore[k][p.b] -= dm;
      dlogit[k] += w * (-p.label * (r - wts[k]) - (1.0 - p.label) * (rq - wts[k]));
    }
  }
  LossResult res;
  res.loss = total;
  res.grad.assign(policy.num_params(), 0.0);
  for (std::size_t k = 0; k < kc; ++k) {
    std::span<double> g(res.grad.data() + policy.head_offset(k), policy.head(k).num_params());
    policy.head(k).backward(batch.points, fps[k], dscore[k], g);
    res.grad[policy.weight_offset() + k] += dlogit[k];
  }
  return res;
}

LossResult evaluate(const LossSpec& spec, const Policy& policy, const TrainingBatch& batch) {
  struct V {
    const Policy& policy;
    const TrainingBatch& batch;
    LossResult operator()(const loss::Bce& s) const { return eval_bce(s, policy, batch); }
    LossResult operator()(const loss::SlicDirect& s) const { return eval_slic(s, policy, batch); }
    LossResult operator()(const loss::RsoHinge& s) const { return eval_rso(s, policy, batch); }
    LossResult operator()(const loss::Ipo& s) const { return eval_ipo(s, policy, batch); }
    LossResult operator()(const loss::RrhfRank& s) const { return eval_rrhf(s, policy, batch); }
    LossResult operator()(const loss::MixtureBce&) const {
      const auto* mix = dynamic_cast<const MixturePolicy*>(&policy);
      if (!mix) throw ConfigError("mixture BCE needs a mixture policy");
      return mixture_bce_loss(*mix, batch);
    }
  };
  return std::visit(V{policy, batch}, spec.kind);
}

LossResult bce_pref_loss(const Policy& policy, const PbdeSpec& pbde, const TrainingBatch& batch) {
  return evaluate(LossSpec{loss::Bce{pbde}}, policy, batch);
}

LossResult slic_direct_loss(const Policy& policy, const TrainingBatch& batch, double delta, double lambda) {
  return evaluate(LossSpec{loss::SlicDirect{delta, lambda}}, policy, batch);
}

LossResult rso_normalized_loss(const Policy& policy, const LogDensityFn& reference, const TrainingBatch& batch,
                               double delta) {
  return evaluate(LossSpec{loss::RsoHinge{delta, reference}}, policy, batch);
}

LossResult ipo_loss(const Policy& policy, const LogDensityFn& reference, const TrainingBatch& batch, double tau) {
  return evaluate(LossSpec{loss::Ipo{tau, reference}}, policy, batch);
}

LossResult rrhf_loss(const Policy& policy, const TrainingBatch& batch, bool length_normalized, double nll_coeff) {
  return evaluate(LossSpec{loss::RrhfRank{length_normalized, nll_coeff}}, policy, batch);
}

TrainingBatch batch_from_triplets(std::span<const PreferenceTriplet> triplets) {
  TrainingBatch b;
  std::unordered_map<std::size_t, std::size_t> index;
  auto point = [&](const Item& x) {
    auto [it, inserted] = index.try_emplace(x.id, b.points.size());
    if (inserted) b.points.push_back(x);
    return it->second;
  };
  b.pairs.reserve(triplets.size());
  for (const auto& t : triplets) {
    const std::size_t ia = point(t.a);
    const std::size_t ib = point(t.b);
    b.pairs.push_back({ia, ib, static_cast<double>(t.y), 1.0});
  }
  return b;
}

TrainingBatch exact_pair_batch(const std::vector<Item>& items, const std::vector<double>& proposal_mass,
                               const Annotator& annotator) {
  if (items.size() != proposal_mass.size()) throw ConfigError("exact batch: one proposal mass per item");
  TrainingBatch b;
  b.points = items;
  for (std::size_t a = 0; a < items.size(); ++a) {
    for (std::size_t c = 0; c < items.size(); ++c) {
      if (a == c) continue;
      const double w = proposal_mass[a] * proposal_mass[c];
      if (w <= 0.0) throw ConfigError("exact objective needs positive proposal mass on every pair");
      b.pairs.push_back({a, c, annotator_pref_prob(annotator, items[a], items[c]), w});
    }
  }
  return b;
}

double expected_label_entropy(const TrainingBatch& batch) {
  const double wsum = total_pair_weight(batch);
  double h = 0.0;
  for (const auto& p : batch.pairs) {
    const double y = p.label;
    double e = 0.0;
    if (y > 0.0) e -= y * std::log(y);
    if (y < 1.0) e -= (1.0 - y) * std::log1p(-y);
    h += p.weight / wsum * e;
  }
  return h;
}

LossResult exact_pref_loss(const Policy& policy, const PbdeSpec& pbde, const TrainingBatch& exact_batch) {
  return bce_pref_loss(policy, pbde, exact_batch);
}

}  // namespace prefdens
