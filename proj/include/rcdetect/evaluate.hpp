#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcdetect/classifiers.hpp"
#include "rcdetect/csv.hpp"
#include "rcdetect/errors.hpp"
#include "rcdetect/features.hpp"
#include "rcdetect/metrics.hpp"
#include "rcdetect/rng.hpp"
#include "rcdetect/synthgen.hpp"

namespace rcdetect {

// ---------------------------------------------------------------------------
// Dataset assembly from windowed captures
// ---------------------------------------------------------------------------

// The combined-protocol representation: the nine traffic statistics plus a
// one-hot protocol tag (tcp, udp), letting one model see both streams without
// conflating their scales.
inline FeatureRow combined_row(const FeatureVector& f, Protocol p) {
  FeatureRow row = f.to_row();
  row.push_back(p == Protocol::TCP ? 1.0 : 0.0);
  row.push_back(p == Protocol::UDP ? 1.0 : 0.0);
  return row;
}

struct AssembledData {
  LabeledDataset data;
  std::vector<std::size_t> sample_index;  // row i came from samples[sample_index[i]]
};

// Turns window descriptors plus an attack schedule into a training table.
// TCP/UDP slots keep only their own protocol's windows; the GENERAL slot
// keeps everything and appends the one-hot protocol tag. Labels are always
// per protocol: a window is ATTACKED only when a flood of the window's own
// protocol covers it, because the other protocol's traffic inside that
// window is statistically normal and would poison training.
inline AssembledData assemble_dataset(const std::vector<WindowSample>& samples,
                                      const std::vector<AttackSpan>& schedule,
                                      uint64_t epoch_us, ModelProtocol slot) {
  AssembledData out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const WindowSample& s = samples[i];
    if (slot == ModelProtocol::TCP && s.protocol != Protocol::TCP) continue;
    if (slot == ModelProtocol::UDP && s.protocol != Protocol::UDP) continue;
    uint32_t device = (ip_to_numeric(s.window.device_id) & 0xFF) - 1;
    Label lbl = training_label(schedule, device,
                               (s.window.start_us - epoch_us) / s.window.duration_us,
                               s.window.duration_us, s.protocol);
    out.data.x.push_back(slot == ModelProtocol::GENERAL ? combined_row(s.features, s.protocol)
                                                        : s.features.to_row());
    out.data.y.push_back(lbl);
    out.sample_index.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic holdout split
// ---------------------------------------------------------------------------

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded-permutation split: shuffle 0..n-1, cut at floor(n * train_fraction).
inline HoldoutSplit holdout_split(std::size_t n, double train_fraction, uint64_t seed) {
  if (n < 2) throw ParamError("holdout split needs at least 2 samples");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw ParamError("train fraction must lie strictly between 0 and 1");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(Rng::derive(seed, 0x5eed));
  rng.shuffle(idx);
  std::size_t cut = static_cast<std::size_t>(static_cast<double>(n) * train_fraction);
  if (cut == 0 || cut == n)
    throw ParamError("train fraction leaves one side of the split empty");
  HoldoutSplit split;
  split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
  split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  return split;
}

inline LabeledDataset subset(const LabeledDataset& data, const std::vector<std::size_t>& rows) {
  LabeledDataset out;
  out.x.reserve(rows.size());
  out.y.reserve(rows.size());
  for (std::size_t i : rows) {
    out.x.push_back(data.x[i]);
    out.y.push_back(data.y[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct CrossvalReport {
  std::vector<Ratio> fold_accuracy;  // one exact accuracy per fold, fold order
  double mean_accuracy = 0.0;
  uint32_t folds = 0;
  uint64_t seed = 0;
};

// K rounds of train-on-the-rest, score-on-the-fold. Folds come from the
// seeded permutation split; each round trains with its own derived seed, so
// the whole report is a pure function of (data, spec, k, seed).
inline CrossvalReport crossval_report(const LabeledDataset& data, const ModelSpec& spec,
                                      ModelProtocol protocol, uint32_t k, uint64_t seed) {
  data.validate();
  auto folds = kfold_split(data.size(), k, seed);
  CrossvalReport report;
  report.folds = k;
  report.seed = seed;
  double sum = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> held(data.size(), false);
    for (std::size_t i : folds[f]) held[i] = true;
    std::vector<std::size_t> train_rows;
    train_rows.reserve(data.size() - folds[f].size());
    for (std::size_t i = 0; i < data.size(); ++i)
      if (!held[i]) train_rows.push_back(i);

    LabeledDataset train = subset(data, train_rows);
    LabeledDataset test = subset(data, folds[f]);
    TrainedModel model = train_model(train, spec, protocol, Rng::derive(seed, 0xc5, f));
    ConfusionMatrix cm = confusion(model.predict_all(test.x), test.y);
    Ratio acc = *core_metrics(cm).acc;  // fold is non-empty, so always defined
    report.fold_accuracy.push_back(acc);
    sum += acc.value();
  }
  report.mean_accuracy = sum / static_cast<double>(folds.size());
  return report;
}

// ---------------------------------------------------------------------------
// Forest-size selection
// ---------------------------------------------------------------------------

struct TreeCountSweep {
  uint32_t chosen = 0;
  // (candidate, mean CV accuracy), in input order.
  std::vector<std::pair<uint32_t, double>> candidates;
};

// Cross-validates a forest per candidate size over the same folds and picks
// the size with the best mean accuracy; ties go to the smaller (cheaper)
// forest.
inline TreeCountSweep sweep_tree_count(const LabeledDataset& data, uint32_t k,
                                       const std::vector<uint32_t>& candidate_sizes,
                                       uint64_t seed, ModelSpec base = {},
                                       ModelProtocol protocol = ModelProtocol::GENERAL) {
  if (candidate_sizes.empty()) throw ParamError("tree-count sweep needs at least one candidate");
  TreeCountSweep sweep;
  bool have = false;
  double best_mean = 0.0;
  for (uint32_t c : candidate_sizes) {
    if (c == 0) throw ParamError("a forest needs at least one tree");
    ModelSpec spec = base;
    spec.kind = ModelKind::RF;
    spec.n_trees = c;
    CrossvalReport r = crossval_report(data, spec, protocol, k, seed);
    sweep.candidates.emplace_back(c, r.mean_accuracy);
    if (!have || r.mean_accuracy > best_mean ||
        (r.mean_accuracy == best_mean && c < sweep.chosen)) {
      have = true;
      best_mean = r.mean_accuracy;
      sweep.chosen = c;
    }
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

// One emitted evaluation row: a model applied to one protocol slot (and
// optionally one fold of a cross-validation).
struct ReportRow {
  std::string model;
  std::string protocol;
  std::optional<uint32_t> fold;
  ConfusionMatrix cm;
  EvalMetrics metrics;
  std::optional<double> fp_per_second;
};

inline ReportRow make_report_row(std::string model, std::string protocol,
                                 const ConfusionMatrix& cm, bool literal = false,
                                 std::optional<double> duration_s = std::nullopt,
                                 std::optional<uint32_t> fold = std::nullopt) {
  ReportRow row;
  row.model = std::move(model);
  row.protocol = std::move(protocol);
  row.fold = fold;
  row.cm = cm;
  row.metrics = compute_all(cm, literal);
  if (duration_s) row.fp_per_second = fp_rate_per_second(cm, *duration_s);
  return row;
}

// Rates use the same fixed 4-decimal rendering as the ratio metrics.
inline std::string format_rate_4dp(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::vector<std::string> report_csv_header() {
  return {"model",  "protocol",  "fold",   "tp",  "tn",   "fp",  "fn",
          "acc",    "tpr",       "fpr",    "fdr", "precision", "recall", "f1",
          "p_d",    "p_fa",      "p_md",   "fp_per_second"};
}

inline std::vector<std::string> report_csv_row(const ReportRow& r) {
  std::vector<std::string> out;
  out.push_back(r.model);
  out.push_back(r.protocol);
  out.push_back(r.fold ? std::to_string(*r.fold) : "");
  out.push_back(std::to_string(r.cm.tp));
  out.push_back(std::to_string(r.cm.tn));
  out.push_back(std::to_string(r.cm.fp));
  out.push_back(std::to_string(r.cm.fn));
  const EvalMetrics& m = r.metrics;
  for (const auto& v : {m.acc, m.tpr, m.fpr, m.fdr, m.precision, m.recall, m.f1, m.p_d,
                        m.p_fa, m.p_md})
    out.push_back(format_ratio_4dp(v));
  out.push_back(r.fp_per_second ? format_rate_4dp(*r.fp_per_second) : "");
  return out;
}

// The human-readable document: one block per row, fixed 4-decimal rendering,
// UNDEFINED spelled out.
inline std::string render_report_text(const std::vector<ReportRow>& rows,
                                      const std::vector<std::string>& header_lines = {}) {
  std::string doc;
  for (const auto& line : header_lines) doc += "# " + line + "\n";
  doc += "# detection evaluation: attack = positive class\n";
  for (const auto& r : rows) {
    doc += "\n[" + r.model + " / " + r.protocol;
    if (r.fold) doc += " / fold " + std::to_string(*r.fold);
    doc += "]\n";
    doc += "counts tp=" + std::to_string(r.cm.tp) + " tn=" + std::to_string(r.cm.tn) +
           " fp=" + std::to_string(r.cm.fp) + " fn=" + std::to_string(r.cm.fn) + "\n";
    const EvalMetrics& m = r.metrics;
    doc += "acc " + format_ratio_4dp(m.acc) + "\n";
    doc += "tpr " + format_ratio_4dp(m.tpr) + "\n";
    doc += "fpr " + format_ratio_4dp(m.fpr) + "\n";
    doc += "fdr " + format_ratio_4dp(m.fdr) + "\n";
    doc += "precision " + format_ratio_4dp(m.precision) + "\n";
    doc += "recall " + format_ratio_4dp(m.recall) + "\n";
    doc += "f1 " + format_ratio_4dp(m.f1) + "\n";
    doc += "p_d " + format_ratio_4dp(m.p_d) + "\n";
    doc += "p_fa " + format_ratio_4dp(m.p_fa) + "\n";
    doc += "p_md " + format_ratio_4dp(m.p_md) + "\n";
    if (r.fp_per_second)
      doc += "fp_per_second " + format_rate_4dp(*r.fp_per_second) + "\n";
  }
  return doc;
}

}  // namespace rcdetect
