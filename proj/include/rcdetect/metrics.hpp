#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rcdetect/errors.hpp"
#include "rcdetect/traffic.hpp"

namespace rcdetect {

// Exact rational in lowest terms, denominator > 0. Confusion-matrix rates
// are kept rational end to end so identities like acc + fdr = 1 hold
// bit-exactly; conversion to decimal happens only at display time.
struct Ratio {
  int64_t num = 0;
  int64_t den = 1;

  static Ratio of(int64_t n, int64_t d) {
    if (d == 0) throw ShapeError("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    return Ratio{n, d};
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  bool operator==(const Ratio&) const = default;

  friend bool operator<(const Ratio& a, const Ratio& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Ratio& a, const Ratio& b) { return !(b < a); }
  friend bool operator>(const Ratio& a, const Ratio& b) { return b < a; }
  friend bool operator>=(const Ratio& a, const Ratio& b) { return !(a < b); }

  friend Ratio operator+(const Ratio& a, const Ratio& b) {
    __int128 n = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
    __int128 d = static_cast<__int128>(a.den) * b.den;
    // Reduce in 128-bit space, then narrow with a range check.
    __int128 gg = d;
    __int128 aa = n < 0 ? -n : n;
    while (aa != 0) {
      __int128 tmp = gg % aa;
      gg = aa;
      aa = tmp;
    }
    if (gg > 1) {
      n /= gg;
      d /= gg;
    }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw ShapeError("rational overflow");
    return Ratio{static_cast<int64_t>(n), static_cast<int64_t>(d)};
  }

  friend Ratio operator-(const Ratio& a, const Ratio& b) {
    return a + Ratio{-b.num, b.den};
  }
};

inline Ratio ratio_one() { return Ratio{1, 1}; }

// nullopt encodes an UNDEFINED metric (zero denominator). Degenerate test
// sets must surface as UNDEFINED, never as a silent 0.
inline std::optional<Ratio> frac(uint64_t n, uint64_t d) {
  if (d == 0) return std::nullopt;
  return Ratio::of(static_cast<int64_t>(n), static_cast<int64_t>(d));
}

// Fixed 4-decimal rendering with round-half-even, applied to the exact
// rational (not to a double), so displayed tables are reproducible.
inline std::string format_ratio_4dp(const std::optional<Ratio>& r) {
  if (!r) return "UNDEFINED";
  __int128 num = r->num;
  bool neg = num < 0;
  if (neg) num = -num;
  __int128 den = r->den;
  __int128 scaled = num * 10000;
  __int128 q = scaled / den;
  __int128 rem = scaled % den;
  __int128 twice = rem * 2;
  if (twice > den || (twice == den && (q & 1))) ++q;
  auto whole = static_cast<unsigned long long>(q / 10000);
  auto fracp = static_cast<unsigned long long>(q % 10000);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%llu.%04llu", neg ? "-" : "", whole, fracp);
  return buf;
}

// Attack = positive class throughout.
struct ConfusionMatrix {
  uint64_t tp = 0;
  uint64_t tn = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;

  uint64_t n() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(const std::vector<Label>& predictions,
                                 const std::vector<Label>& truths) {
  if (predictions.size() != truths.size())
    throw ShapeError("prediction/truth length mismatch: " + std::to_string(predictions.size()) +
                     " vs " + std::to_string(truths.size()));
  if (predictions.empty()) throw EmptyInputError("cannot tally an empty prediction set");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    bool pred_a = predictions[i] == Label::ATTACKED;
    bool true_a = truths[i] == Label::ATTACKED;
    if (pred_a && true_a)
      ++m.tp;
    else if (pred_a)
      ++m.fp;
    else if (true_a)
      ++m.fn;
    else
      ++m.tn;
  }
  return m;
}

struct CoreMetrics {
  std::optional<Ratio> acc, fpr, tpr, fdr;
};

// acc = (tp+tn)/n, fpr = fp/(fp+tn), tpr = tp/(tp+fn),
// fdr = (fp+fn)/n — the wrong-decision rate, so acc + fdr = 1 exactly.
inline CoreMetrics core_metrics(const ConfusionMatrix& m) {
  CoreMetrics r;
  r.acc = frac(m.tp + m.tn, m.n());
  r.fpr = frac(m.fp, m.fp + m.tn);
  r.tpr = frac(m.tp, m.tp + m.fn);
  r.fdr = frac(m.fp + m.fn, m.n());
  return r;
}

struct ProbabilityMetrics {
  std::optional<Ratio> p_d, p_fa, p_md, acc;
};

// Detection / false-alarm / misdetection probabilities. The standard
// denominators guarantee p_d + p_md = 1, p_d = tpr, p_fa = fpr.
inline ProbabilityMetrics probability_metrics(const ConfusionMatrix& m) {
  ProbabilityMetrics r;
  r.p_d = frac(m.tp, m.tp + m.fn);
  r.p_fa = frac(m.fp, m.fp + m.tn);
  r.p_md = frac(m.fn, m.tp + m.fn);
  r.acc = frac(m.tp + m.tn, m.n());
  return r;
}

// Alternate "literal" reading of the published false-alarm/misdetection
// formulas (denominators tn+fn and tn+fp respectively). These break the
// p_d + p_md = 1 identity; they exist for side-by-side reporting only.
inline ProbabilityMetrics probability_metrics_literal(const ConfusionMatrix& m) {
  ProbabilityMetrics r;
  r.p_d = frac(m.tp, m.tp + m.fn);
  r.p_fa = frac(m.fp, m.tn + m.fn);
  r.p_md = frac(m.fn, m.tn + m.fp);
  r.acc = frac(m.tp + m.tn, m.n());
  return r;
}

struct Prf1 {
  std::optional<Ratio> precision, recall, f1;
};

inline Prf1 prf1(const ConfusionMatrix& m) {
  Prf1 r;
  r.precision = frac(m.tp, m.tp + m.fp);
  r.recall = frac(m.tp, m.tp + m.fn);
  r.f1 = frac(2 * m.tp, 2 * m.tp + m.fp + m.fn);
  return r;
}

inline double fp_rate_per_second(const ConfusionMatrix& m, double duration_s) {
  if (!(duration_s > 0)) throw ParamError("sweep duration must be positive seconds");
  return static_cast<double>(m.fp) / duration_s;
}

struct SweepPoint {
  double threshold = 0;
  std::optional<Ratio> fpr;
  std::optional<Ratio> detection_rate;
};

// For each threshold t (ascending), classify ATTACKED iff score > t and
// report (fpr, detection rate). Both series are monotone non-increasing in t
// by construction.
inline std::vector<SweepPoint> threshold_sweep(const std::vector<double>& scores,
                                               const std::vector<Label>& truths,
                                               const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw ParamError("threshold sweep needs at least one threshold");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] < thresholds[i - 1])
      throw ParamError("sweep thresholds must be sorted ascending");
  if (scores.size() != truths.size())
    throw ShapeError("score/truth length mismatch");
  if (scores.empty()) throw EmptyInputError("cannot sweep an empty score set");
  for (double s : scores)
    if (!std::isfinite(s)) throw ParamError("sweep scores must be finite");

  std::vector<SweepPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      bool pred_a = scores[i] > t;
      bool true_a = truths[i] == Label::ATTACKED;
      if (pred_a && true_a)
        ++tp;
      else if (pred_a)
        ++fp;
      else if (true_a)
        ++fn;
      else
        ++tn;
    }
    SweepPoint p;
    p.threshold = t;
    p.fpr = frac(fp, fp + tn);
    p.detection_rate = frac(tp, tp + fn);
    out.push_back(p);
  }
  return out;
}

// Everything a report row carries, computed from one matrix.
struct EvalMetrics {
  std::optional<Ratio> acc, tpr, fpr, fdr, precision, recall, f1, p_d, p_fa, p_md;
};

inline EvalMetrics compute_all(const ConfusionMatrix& m, bool literal = false) {
  EvalMetrics e;
  CoreMetrics c = core_metrics(m);
  e.acc = c.acc;
  e.tpr = c.tpr;
  e.fpr = c.fpr;
  e.fdr = c.fdr;
  Prf1 p = prf1(m);
  e.precision = p.precision;
  e.recall = p.recall;
  e.f1 = p.f1;
  ProbabilityMetrics b = literal ? probability_metrics_literal(m) : probability_metrics(m);
  e.p_d = b.p_d;
  e.p_fa = b.p_fa;
  e.p_md = b.p_md;
  return e;
}

}  // namespace rcdetect
