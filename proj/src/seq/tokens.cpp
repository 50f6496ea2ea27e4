#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/io.hpp"
#include "prefdens/seq.hpp"

namespace prefdens::seq {

void TokenSpace::validate() const {
  if (vocab_size < 2) throw ConfigError("token space needs vocab_size >= 2");
  if (max_len < 1) throw ConfigError("token space needs max_len >= 1");
}

std::vector<double> TokenLaw::variant_probs(int length, int max_len) const {
  if (variants < 1 || positions < 1) throw ConfigError("token law needs positive positions and variants");
  if (!(drift_width > 0.0) || !(floor >= 0.0 && floor <= 1.0)) throw ConfigError("token law: bad drift width or floor");
  const double center =
      max_len > 1 ? double(length - 1) / double(max_len - 1) * double(variants - 1) : 0.0;
  std::vector<double> w(variants);
  double total = 0.0;
  for (int v = 0; v < variants; ++v) {
    const double z = (v - center) / drift_width;
    w[v] = std::exp(-0.5 * z * z);
    total += w[v];
  }
  for (double& x : w) x = (1.0 - floor) * x / total + floor / variants;
  return w;
}

std::vector<double> uniform_length_law(int max_len) { return std::vector<double>(max_len, 1.0 / max_len); }

std::vector<double> point_length_law(int max_len, int length) {
  if (length < 1 || length > max_len) throw ConfigError("point length law outside 1..max_len");
  std::vector<double> law(max_len, 0.0);
  law[length - 1] = 1.0;
  return law;
}

std::vector<double> skewed_length_law(int max_len, double scale) {
  if (max_len < 1 || !(scale > 0.0)) throw ConfigError("skewed length law needs max_len >= 1 and scale > 0");
  std::vector<double> law(max_len);
  double z = 0.0;
  for (int l = 1; l <= max_len; ++l) z += law[l - 1] = l * std::exp(-l / scale);
  for (double& p : law) p /= z;
  return law;
}

std::size_t categorical(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left a sliver past the last bucket; give it to the last nonzero one.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  throw Error("categorical: no positive probability");
}

std::vector<Sequence> synth_corpus(const TokenSpace& space, const TokenLaw& law, const std::vector<double>& length_law,
                                   std::size_t n, std::uint64_t seed) {
  space.validate();
  if (law.vocab_size() != space.vocab_size)
    throw ConfigError("token law covers " + std::to_string(law.vocab_size()) + " tokens, space has " +
                      std::to_string(space.vocab_size));
  if (int(length_law.size()) != space.max_len) throw ConfigError("length law must cover 1..max_len");
  double mass = 0.0;
  for (double p : length_law) {
    if (!(p >= 0.0)) throw ConfigError("length law has a negative entry");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw ConfigError("length law must sum to 1");

  std::vector<std::vector<double>> by_len(space.max_len);
  for (int l = 1; l <= space.max_len; ++l) by_len[l - 1] = law.variant_probs(l, space.max_len);

  Rng rng = Rng::stream(seed, "corpus");
  std::vector<Sequence> out(n);
  for (auto& s : out) {
    const int len = int(categorical(length_law, rng)) + 1;
    s.resize(len);
    for (int i = 0; i < len; ++i) {
      const int cls = std::min(i, law.positions - 1);
      s[i] = cls * law.variants + int(categorical(by_len[len - 1], rng));
    }
  }
  return out;
}

std::size_t LengthHistogram::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::vector<double> LengthHistogram::fractions() const {
  const double t = double(total());
  std::vector<double> f(counts.size(), 0.0);
  if (t > 0)
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = double(counts[i]) / t;
  return f;
}

std::string LengthHistogram::to_csv() const {
  CsvWriter w({"length", "count", "fraction"});
  const auto f = fractions();
  for (std::size_t i = 0; i < counts.size(); ++i)
    w.row({std::to_string(i + 1), std::to_string(counts[i]), fmt_double(f[i])});
  return w.str();
}

LengthHistogram LengthHistogram::from_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  const std::size_t cl = t.column("length"), cc = t.column("count");
  LengthHistogram h;
  h.counts.assign(t.rows.size(), 0);
  for (const auto& r : t.rows) {
    const std::size_t len = std::stoul(r[cl]);
    if (len < 1 || len > h.counts.size()) throw Error("length histogram: bad length " + r[cl]);
    h.counts[len - 1] = std::stoul(r[cc]);
  }
  return h;
}

LengthHistogram length_histogram(const std::vector<Sequence>& seqs, int max_len) {
  LengthHistogram h;
  h.counts.assign(max_len, 0);
  for (const auto& s : seqs) {
    if (s.empty() || int(s.size()) > max_len) throw Error("length histogram: sequence length out of range");
    ++h.counts[s.size() - 1];
  }
  return h;
}

LengthBin length_bin(std::size_t len) {
  if (len <= 4) return LengthBin::S;
  if (len <= 7) return LengthBin::M;
  return LengthBin::L;
}

const char* bin_name(int bin) {
  static const char* names[] = {"S", "M", "L"};
  return names[bin];
}

std::array<double, 3> band_masses(const std::vector<double>& fractions) {
  std::array<double, 3> m{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < fractions.size(); ++i) m[int(length_bin(i + 1))] += fractions[i];
  return m;
}

bool is_bimodal(const std::vector<double>& f, double tol) {
  // Look for a < b < c with f[b] + tol below both f[a] and f[c].
  const std::size_t n = f.size();
  for (std::size_t b = 1; b + 1 < n; ++b) {
    double left = 0.0, right = 0.0;
    for (std::size_t a = 0; a < b; ++a) left = std::max(left, f[a]);
    for (std::size_t c = b + 1; c < n; ++c) right = std::max(right, f[c]);
    if (f[b] + tol < left && f[b] + tol < right) return true;
  }
  return false;
}

}  // namespace prefdens::seq
