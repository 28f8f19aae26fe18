// End-to-end acceptance gate. Each numbered criterion prints exactly one
// [PASS]/[FAIL] line with its elapsed time; the process exits nonzero if any
// criterion fails or overruns its time budget. Criterion 10 drives the
// command-line binary (path given as argv[1]) through the whole pipeline
// twice and byte-compares every output file.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "rcdetect/classifiers.hpp"
#include "rcdetect/csv.hpp"
#include "rcdetect/evaluate.hpp"
#include "rcdetect/ingest.hpp"
#include "rcdetect/metrics.hpp"
#include "rcdetect/rng.hpp"
#include "rcdetect/synthgen.hpp"
#include "rcdetect/telemetry.hpp"
#include "rcdetect/traffic.hpp"

namespace rc = rcdetect;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  bool pass = true;
  std::string detail;  // first failure reason, or a success summary

  void fail(const std::string& why) {
    if (pass) {
      pass = false;
      detail = why;
    }
  }
  void note(const std::string& summary) {
    if (pass) detail = summary;
  }
};

// Shared state built by criterion 5 and reused by 6-8 (they all run on the
// same default corpus; rebuilding it per criterion would triple the runtime
// without testing anything new).
struct CorpusContext {
  rc::SyntheticCorpus corpus;
  std::vector<rc::WindowSample> samples;
  rc::AssembledData slot_data[2];  // [0]=TCP, [1]=UDP
  rc::LabeledDataset train_side[2], test_side[2];
  rc::TrainedModel rf[2], svm[2];
  bool ready = false;
};

CorpusContext g_ctx;

// ---------------------------------------------------------------------------
// 1. Exact confusion-matrix identities on random matrices
// ---------------------------------------------------------------------------
void criterion1(Criterion& c) {
  rc::Rng rng(20260819);
  for (int i = 0; i < 1000; ++i) {
    rc::ConfusionMatrix m;
    m.tp = 1 + rng.next_below(1000);
    m.tn = 1 + rng.next_below(1000);
    m.fp = 1 + rng.next_below(1000);
    m.fn = 1 + rng.next_below(1000);
    rc::EvalMetrics e = rc::compute_all(m);
    if (!e.acc || !e.fdr || !e.p_d || !e.p_md || !e.tpr || !e.recall || !e.fpr || !e.p_fa)
      return c.fail("a metric came back UNDEFINED on an all-positive matrix");
    if (!(*e.acc + *e.fdr == rc::ratio_one()))
      return c.fail("acc + fdr != 1 at matrix " + std::to_string(i));
    if (!(*e.p_d + *e.p_md == rc::ratio_one()))
      return c.fail("p_d + p_md != 1 at matrix " + std::to_string(i));
    if (!(*e.tpr == *e.recall) || !(*e.tpr == *e.p_d))
      return c.fail("tpr, recall, p_d disagree at matrix " + std::to_string(i));
    if (!(*e.fpr == *e.p_fa)) return c.fail("fpr != p_fa at matrix " + std::to_string(i));
  }
  c.note("1000 random matrices, identities exact");
}

// ---------------------------------------------------------------------------
// 2. The headline accuracy/false-discovery pair is an exact complement
// ---------------------------------------------------------------------------
void criterion2(Criterion& c) {
  rc::ConfusionMatrix m;  // 10000 windows: 99.50% accurate, 0.50% discoveries false
  m.tp = 450;
  m.tn = 9500;
  m.fp = 25;
  m.fn = 25;
  rc::EvalMetrics e = rc::compute_all(m);
  if (!e.acc || !e.fdr) return c.fail("acc or fdr UNDEFINED");
  if (!(*e.acc == rc::Ratio::of(9950, 10000))) return c.fail("acc != 9950/10000");
  if (!(*e.fdr == rc::Ratio::of(50, 10000))) return c.fail("fdr != 50/10000");
  if (rc::format_ratio_4dp(e.acc) != "0.9950") return c.fail("acc does not render as 0.9950");
  if (rc::format_ratio_4dp(e.fdr) != "0.0050") return c.fail("fdr does not render as 0.0050");
  if (!(*e.acc + *e.fdr == rc::ratio_one())) return c.fail("acc + fdr != 1");
  if (!(rc::ratio_one() - *e.acc == *e.fdr)) return c.fail("fdr != 1 - acc");
  c.note("acc=0.9950, fdr=0.0050, exact complements");
}

// ---------------------------------------------------------------------------
// 3. Forest = brute-force majority of its trees; tree = manual root-to-leaf walk
// ---------------------------------------------------------------------------
rc::Label walk_tree(const rc::DecisionTree& t, const rc::FeatureRow& x) {
  const rc::TreeNode* n = &t.nodes.at(0);
  while (n->feature >= 0) {
    std::size_t next = x[static_cast<std::size_t>(n->feature)] <= n->split ? n->left : n->right;
    n = &t.nodes.at(next);
  }
  return n->label;
}

void criterion3(Criterion& c) {
  rc::Rng rng(777);
  for (int ds = 0; ds < 50; ++ds) {
    std::size_t n = 2 + rng.next_below(63);  // 2..64 rows
    std::size_t d = 1 + rng.next_below(4);   // 1..4 features
    rc::LabeledDataset data;
    for (std::size_t i = 0; i < n; ++i) {
      rc::FeatureRow row(d);
      for (std::size_t j = 0; j < d; ++j) row[j] = rng.next_double() * 10.0;
      data.x.push_back(std::move(row));
      data.y.push_back(rng.next_below(2) ? rc::Label::ATTACKED : rc::Label::NORMAL);
    }
    data.y[0] = rc::Label::NORMAL;  // guarantee both classes appear
    data.y[1] = rc::Label::ATTACKED;

    rc::ForestParams fp;
    fp.n_trees = static_cast<uint32_t>(1 + rng.next_below(15));
    fp.max_depth = static_cast<uint32_t>(1 + rng.next_below(6));
    rc::RandomForest forest = rc::train_random_forest(data, fp, 1000 + ds);

    rc::TreeParams tp;
    tp.max_depth = fp.max_depth;
    rc::Rng tree_rng(2000 + static_cast<uint64_t>(ds));
    rc::DecisionTree tree = rc::train_decision_tree(data, tp, tree_rng);

    std::vector<rc::FeatureRow> probes = data.x;
    for (int p = 0; p < 16; ++p) {
      rc::FeatureRow row(d);
      for (std::size_t j = 0; j < d; ++j) row[j] = rng.next_double() * 10.0;
      probes.push_back(std::move(row));
    }
    for (const auto& x : probes) {
      std::size_t votes = 0;
      for (const auto& t : forest.trees)
        if (t.predict(x) == rc::Label::ATTACKED) ++votes;
      rc::Label majority =
          2 * votes >= forest.trees.size() ? rc::Label::ATTACKED : rc::Label::NORMAL;
      if (forest.predict(x) != majority)
        return c.fail("forest disagrees with per-tree majority on dataset " + std::to_string(ds));
      if (tree.predict(x) != walk_tree(tree, x))
        return c.fail("tree disagrees with manual walk on dataset " + std::to_string(ds));
    }
  }
  c.note("50 datasets, forest and tree match reference evaluation");
}

// ---------------------------------------------------------------------------
// 4. Margin trainer separates two blobs and its objective never increases
// ---------------------------------------------------------------------------
void criterion4(Criterion& c) {
  rc::Rng rng(20240817);
  rc::LabeledDataset data;
  for (int i = 0; i < 100; ++i) {
    data.x.push_back({rng.normal(-2.0, 1.0), rng.normal(-2.0, 1.0)});
    data.y.push_back(rc::Label::NORMAL);
  }
  for (int i = 0; i < 100; ++i) {
    data.x.push_back({rng.normal(2.0, 1.0), rng.normal(2.0, 1.0)});
    data.y.push_back(rc::Label::ATTACKED);
  }
  rc::ModelSpec spec;
  spec.kind = rc::ModelKind::SVM;
  spec.C = 1.0;
  spec.epochs = 50;
  rc::TrainedModel model = rc::train_model(data, spec, rc::ModelProtocol::GENERAL, 42);

  rc::ConfusionMatrix cm = rc::confusion(model.predict_all(data.x), data.y);
  auto acc = rc::compute_all(cm).acc;
  if (!acc || !(*acc >= rc::Ratio::of(95, 100)))
    return c.fail("training accuracy below 0.95 (" + rc::format_ratio_4dp(acc) + ")");

  const auto& obj = std::get<rc::LinearSVM>(model.model).epoch_objectives;
  if (obj.size() != 51)
    return c.fail("expected 51 objective entries, got " + std::to_string(obj.size()));
  double slack = 1e-6 * obj[0];
  for (std::size_t i = 1; i < obj.size(); ++i)
    if (obj[i] > obj[i - 1] + slack)
      return c.fail("objective increased at epoch " + std::to_string(i));
  c.note("accuracy " + rc::format_ratio_4dp(acc) + ", objective monotone within 1e-6 of start");
}

// ---------------------------------------------------------------------------
// 5. On the default corpus the forest beats the margin model on both protocols
// ---------------------------------------------------------------------------
void criterion5(Criterion& c) {
  rc::ScenarioConfig cfg;  // defaults: 5 devices, 600 s, seed 42, 2 s windows
  g_ctx.corpus = rc::build_corpus(cfg);
  g_ctx.samples =
      rc::corpus_window_samples(g_ctx.corpus.packets, g_ctx.corpus.window_us, g_ctx.corpus.epoch_us);

  const rc::ModelProtocol slots[2] = {rc::ModelProtocol::TCP, rc::ModelProtocol::UDP};
  const char* names[2] = {"tcp", "udp"};
  for (int s = 0; s < 2; ++s) {
    g_ctx.slot_data[s] =
        rc::assemble_dataset(g_ctx.samples, g_ctx.corpus.schedule, g_ctx.corpus.epoch_us, slots[s]);
    const rc::LabeledDataset& all = g_ctx.slot_data[s].data;
    if (all.size() != 1500)
      return c.fail(std::string(names[s]) + " slot has " + std::to_string(all.size()) +
                    " windows, expected 1500");
    rc::HoldoutSplit split = rc::holdout_split(all.size(), 0.7, 42);
    g_ctx.train_side[s] = rc::subset(all, split.train);
    g_ctx.test_side[s] = rc::subset(all, split.test);

    rc::ModelSpec rf_spec;  // defaults: 25 trees
    rc::ModelSpec svm_spec;
    svm_spec.kind = rc::ModelKind::SVM;  // defaults: C=1, 50 epochs
    g_ctx.rf[s] = rc::train_model(g_ctx.train_side[s], rf_spec, slots[s], 42);
    g_ctx.svm[s] = rc::train_model(g_ctx.train_side[s], svm_spec, slots[s], 42);

    rc::ConfusionMatrix cm_rf =
        rc::confusion(g_ctx.rf[s].predict_all(g_ctx.test_side[s].x), g_ctx.test_side[s].y);
    rc::ConfusionMatrix cm_svm =
        rc::confusion(g_ctx.svm[s].predict_all(g_ctx.test_side[s].x), g_ctx.test_side[s].y);
    rc::EvalMetrics em_rf = rc::compute_all(cm_rf);
    rc::EvalMetrics em_svm = rc::compute_all(cm_svm);
    if (!em_rf.acc || !em_svm.acc || !em_rf.fpr || !em_svm.fpr)
      return c.fail(std::string(names[s]) + ": holdout metrics UNDEFINED");
    if (!(*em_rf.acc >= *em_svm.acc))
      return c.fail(std::string(names[s]) + ": forest accuracy below margin-model accuracy");
    if (!(*em_rf.acc >= rc::Ratio::of(99, 100)))
      return c.fail(std::string(names[s]) + ": forest accuracy " +
                    rc::format_ratio_4dp(em_rf.acc) + " below 0.99");
    if (!(*em_svm.acc >= rc::Ratio::of(94, 100)))
      return c.fail(std::string(names[s]) + ": margin-model accuracy " +
                    rc::format_ratio_4dp(em_svm.acc) + " below 0.94");
    if (!(*em_rf.fpr <= *em_svm.fpr))
      return c.fail(std::string(names[s]) + ": forest false-positive rate above margin model's");
  }
  g_ctx.ready = true;
  c.note("70/30 holdout on both protocols: forest >= margin model, bounds met");
}

// ---------------------------------------------------------------------------
// 6. 5-fold cross-validation of the forest is tight and high
// ---------------------------------------------------------------------------
void criterion6(Criterion& c) {
  if (!g_ctx.ready) return c.fail("corpus unavailable (criterion 5 failed)");
  rc::AssembledData all = rc::assemble_dataset(g_ctx.samples, g_ctx.corpus.schedule,
                                               g_ctx.corpus.epoch_us, rc::ModelProtocol::GENERAL);
  rc::ModelSpec spec;  // forest defaults
  rc::CrossvalReport rep = rc::crossval_report(all.data, spec, rc::ModelProtocol::GENERAL, 5, 42);
  if (rep.fold_accuracy.size() != 5) return c.fail("expected 5 folds");
  rc::Ratio mn = rep.fold_accuracy[0], mx = rep.fold_accuracy[0];
  rc::Ratio sum = rc::Ratio::of(0, 1);
  for (const rc::Ratio& r : rep.fold_accuracy) {
    if (r < mn) mn = r;
    if (mx < r) mx = r;
    sum = sum + r;
  }
  if (!(mx - mn <= rc::Ratio::of(2, 100)))
    return c.fail("fold accuracy spread exceeds two percentage points");
  if (!(sum >= rc::Ratio::of(5 * 98, 100))) return c.fail("mean fold accuracy below 0.98");
  std::ostringstream msg;
  msg << "5 folds, spread <= 0.02, mean " << rep.mean_accuracy;
  c.note(msg.str());
}

// ---------------------------------------------------------------------------
// 7. Threshold sweep over margin-model scores is monotone and sane
// ---------------------------------------------------------------------------
void criterion7(Criterion& c) {
  if (!g_ctx.ready) return c.fail("corpus unavailable (criterion 5 failed)");
  const char* names[2] = {"tcp", "udp"};
  for (int s = 0; s < 2; ++s) {
    std::vector<double> scores;
    scores.reserve(g_ctx.test_side[s].x.size());
    for (const auto& row : g_ctx.test_side[s].x) scores.push_back(g_ctx.svm[s].score(row));
    double lo = *std::min_element(scores.begin(), scores.end());
    double hi = *std::max_element(scores.begin(), scores.end());
    std::vector<double> thresholds;
    for (int i = 0; i < 20; ++i)
      thresholds.push_back(lo + (hi - lo) * static_cast<double>(i) / 19.0);
    auto points = rc::threshold_sweep(scores, g_ctx.test_side[s].y, thresholds);
    if (points.size() != 20) return c.fail("expected 20 sweep points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].fpr || !points[i].detection_rate)
        return c.fail(std::string(names[s]) + ": sweep point UNDEFINED");
      if (!(*points[i].fpr <= *points[i].detection_rate))
        return c.fail(std::string(names[s]) + ": false-positive rate above detection rate at " +
                      std::to_string(points[i].threshold));
      if (i > 0) {
        if (!(*points[i].detection_rate <= *points[i - 1].detection_rate))
          return c.fail(std::string(names[s]) + ": detection rate increased with the threshold");
        if (!(*points[i].fpr <= *points[i - 1].fpr))
          return c.fail(std::string(names[s]) + ": false-positive rate increased with threshold");
      }
    }
  }
  c.note("20-point sweeps on both protocols monotone, detection rate >= fpr throughout");
}

// ---------------------------------------------------------------------------
// 8. Stage-2 attribution recovers the resource each attack drains
// ---------------------------------------------------------------------------
void criterion8(Criterion& c) {
  if (!g_ctx.ready) return c.fail("corpus unavailable (criterion 5 failed)");
  const auto& corpus = g_ctx.corpus;
  std::map<std::string, rc::BaselineProfile> baselines;
  uint64_t attacked = 0, exact = 0, normal_breaches = 0, missing = 0;
  for (const rc::WindowTruth& t : corpus.truth) {
    auto it = baselines.find(t.device_id);
    if (it == baselines.end())
      it = baselines.emplace(t.device_id, rc::build_baseline(corpus.telemetry, t.device_id)).first;
    rc::TimeWindow w{corpus.epoch_us + t.window_index * corpus.window_us, corpus.window_us,
                     t.device_id};
    rc::AttributionResult r = rc::attribute(w, it->second, corpus.telemetry, 3.0, 3.0);
    if (t.label == rc::Label::ATTACKED) {
      if (r.missing_telemetry) {
        ++missing;  // exempt from the class check, but must stay rare
        continue;
      }
      ++attacked;
      if (!t.intended) return c.fail("attacked truth window without an intended verdict");
      if (*t.intended == rc::Verdict::ENERGY_ATTACK) {
        if (r.verdict != rc::Verdict::ENERGY_ATTACK && r.verdict != rc::Verdict::BOTH)
          return c.fail(std::string("flood window attributed to ") + rc::to_string(r.verdict));
      } else {
        if (r.verdict != rc::Verdict::MEMORY_ATTACK && r.verdict != rc::Verdict::BOTH)
          return c.fail(std::string("memory-exhaustion window attributed to ") +
                        rc::to_string(r.verdict));
      }
      if (r.verdict == *t.intended) ++exact;
    } else {
      if (r.verdict != rc::Verdict::OTHER || r.missing_telemetry) ++normal_breaches;
    }
  }
  if (attacked == 0) return c.fail("no attacked windows found in the corpus truth");
  if (missing > 0) return c.fail(std::to_string(missing) + " attacked windows lacked telemetry");
  if (20 * exact < 19 * attacked)  // exact/attacked >= 0.95
    return c.fail("only " + std::to_string(exact) + "/" + std::to_string(attacked) +
                  " windows attributed exactly as intended");
  if (normal_breaches != 0)
    return c.fail(std::to_string(normal_breaches) + " normal windows breached a deviation gate");
  c.note(std::to_string(exact) + "/" + std::to_string(attacked) +
         " exact verdicts, zero normal-window breaches");
}

// ---------------------------------------------------------------------------
// 9. Capture writer/parser round-trips; cleaning is idempotent
// ---------------------------------------------------------------------------
void criterion9(Criterion& c) {
  if (!g_ctx.ready) return c.fail("corpus unavailable (criterion 5 failed)");
  std::vector<uint8_t> bytes = rc::write_pcap(g_ctx.corpus.packets);
  rc::RawDataset back = rc::parse_pcap(bytes);
  if (back.total_dropped() != 0) return c.fail("round-trip parse dropped packets");
  if (!(back.rows == g_ctx.corpus.packets)) return c.fail("round-trip packets differ field-wise");

  rc::Rng rng(4242);
  for (int i = 0; i < 1000; ++i) {
    rc::RawDataset raw;
    raw.source = "fuzz";
    raw.format = "csv";
    uint64_t n = rng.next_below(60);
    for (uint64_t j = 0; j < n; ++j) {
      if (!raw.rows.empty() && rng.next_below(4) == 0) {
        raw.rows.push_back(raw.rows[rng.next_below(raw.rows.size())]);  // duplicate
        continue;
      }
      rc::PacketRecord r;
      r.timestamp_us = rng.next_below(50);  // 0 = timing sentinel
      r.src_ip = static_cast<uint32_t>(rng.next_u64());
      r.dst_ip = static_cast<uint32_t>(rng.next_u64());
      r.src_port = static_cast<uint16_t>(rng.next_below(5));  // 0 = port sentinel
      r.dst_port = static_cast<uint16_t>(rng.next_below(5));
      uint64_t proto = rng.next_below(3);
      r.protocol = proto == 0   ? rc::Protocol::TCP
                   : proto == 1 ? rc::Protocol::UDP
                                : rc::Protocol::OTHER;
      r.length = static_cast<uint32_t>(rng.next_below(100));  // 0 = length sentinel
      r.ip_id = static_cast<uint16_t>(rng.next_u64());
      if (r.protocol == rc::Protocol::TCP) r.tcp_seq = static_cast<uint32_t>(rng.next_u64());
      raw.rows.push_back(r);
    }
    rc::RawDataset once = rc::clean_dataset(raw);
    rc::RawDataset twice = rc::clean_dataset(once);
    if (!(once.rows == twice.rows))
      return c.fail("cleaning changed rows on a second pass (dataset " + std::to_string(i) + ")");
    if (!(once.dropped == twice.dropped))
      return c.fail("cleaning changed drop counts on a second pass (dataset " + std::to_string(i) +
                    ")");
  }
  c.note("capture round-trip exact; cleaning idempotent on 1000 fuzzed datasets");
}

// ---------------------------------------------------------------------------
// 10. Every pipeline command is byte-reproducible under a fixed config + seed
// ---------------------------------------------------------------------------
const char* kPipelineConfig = R"json({
  "seed": 7,
  "devices": 2,
  "duration_secs": 240,
  "window_secs": 2,
  "protocol": "general",
  "classifier": "rf",
  "folds": 5,
  "sweep_points": 10,
  "schedule": [
    {"kind": "ddos", "start_secs": 40, "end_secs": 60, "device": 0},
    {"kind": "ec_ddos", "start_secs": 100, "end_secs": 120, "device": 0},
    {"kind": "memory_exhaust", "start_secs": 160, "end_secs": 180, "device": 0},
    {"kind": "ddos", "start_secs": 40, "end_secs": 60, "device": 1},
    {"kind": "ec_ddos", "start_secs": 100, "end_secs": 120, "device": 1},
    {"kind": "memory_exhaust", "start_secs": 160, "end_secs": 180, "device": 1}
  ]
}
)json";

std::optional<std::string> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string first_log_line(const fs::path& log) {
  std::ifstream in(log);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) return line;
  return "(no output)";
}

void criterion10(Criterion& c, const std::string& cli) {
  fs::path dir = "acceptance_tmp";
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  fs::path cfg = dir / "pipeline.json";
  {
    std::ofstream out(cfg, std::ios::binary);
    out << kPipelineConfig;
  }
  fs::path log = dir / "cli.log";
  auto d = [&](const char* name) { return (dir / name).string(); };

  struct Step {
    std::string name;
    std::string args;
    std::vector<std::string> outputs;
  };
  std::string corpus = d("corpus");
  std::vector<Step> steps = {
      {"generate",
       "generate --out " + corpus,
       {corpus + "/capture.pcap", corpus + "/packets.csv", corpus + "/telemetry.csv",
        corpus + "/truth.csv", corpus + "/config.json"}},
      {"train",
       "train --packets " + corpus + "/capture.pcap --truth " + corpus + "/truth.csv" +
           " --model-out " + d("model.txt"),
       {d("model.txt"), d("model.txt") + ".report.txt", d("model.txt") + ".config.json"}},
      {"detect",
       "detect --packets " + corpus + "/capture.pcap --model " + d("model.txt") + " --out " +
           d("verdicts.csv"),
       {d("verdicts.csv"), d("verdicts.csv") + ".config.json"}},
      {"attribute",
       "attribute --verdicts " + d("verdicts.csv") + " --telemetry " + corpus +
           "/telemetry.csv --out " + d("attrib.csv"),
       {d("attrib.csv"), d("attrib.csv") + ".config.json"}},
      {"evaluate",
       "evaluate --packets " + corpus + "/capture.pcap --truth " + corpus + "/truth.csv" +
           " --out-prefix " + d("eval"),
       {d("eval.csv"), d("eval.txt"), d("eval.config.json")}},
      {"crossval",
       "crossval --packets " + corpus + "/capture.pcap --truth " + corpus + "/truth.csv" +
           " --out " + d("folds.csv"),
       {d("folds.csv"), d("folds.csv") + ".config.json"}},
      {"sweep",
       "sweep --packets " + corpus + "/capture.pcap --truth " + corpus + "/truth.csv" + " --out " +
           d("sweep.csv"),
       {d("sweep.csv"), d("sweep.csv") + ".config.json"}},
  };

  for (const Step& step : steps) {
    std::string cmd = "\"" + cli + "\" --config " + cfg.string() + " " + step.args + " >" +
                      log.string() + " 2>&1";
    if (std::system(cmd.c_str()) != 0)
      return c.fail(step.name + " failed: " + first_log_line(log));
    std::map<std::string, std::string> snapshot;
    for (const std::string& out : step.outputs) {
      auto bytes = slurp(out);
      if (!bytes) return c.fail(step.name + " did not produce " + out);
      snapshot.emplace(out, std::move(*bytes));
    }
    if (std::system(cmd.c_str()) != 0)
      return c.fail(step.name + " failed on rerun: " + first_log_line(log));
    for (const auto& [out, before] : snapshot) {
      auto after = slurp(out);
      if (!after) return c.fail(step.name + " rerun removed " + out);
      if (*after != before) return c.fail(step.name + " rerun changed " + out);
    }
  }
  fs::remove_all(dir, ec);
  c.note("7 commands rerun with identical config+seed, all outputs byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli-binary>\n");
    return 2;
  }
  const std::string cli = argv[1];

  struct Entry {
    int number;
    const char* title;
    double budget_s;
    void (*fn)(Criterion&);
  };
  const Entry entries[] = {
      {1, "confusion-matrix identities hold exactly", 1.0, criterion1},
      {2, "headline accuracy and false-discovery rate are complements", 1.0, criterion2},
      {3, "forest and tree match reference evaluation", 10.0, criterion3},
      {4, "margin trainer separates blobs with a non-increasing objective", 5.0, criterion4},
      {5, "forest outperforms margin model on the default corpus", 60.0, criterion5},
      {6, "cross-validation is tight and high", 120.0, criterion6},
      {7, "score sweeps are monotone with detection rate above fpr", 10.0, criterion7},
      {8, "attribution recovers the drained resource", 30.0, criterion8},
      {9, "capture round-trip is exact and cleaning is idempotent", 10.0, criterion9},
  };

  int failures = 0;
  auto report = [&](int number, const char* title, const Criterion& crit, double elapsed,
                    double budget) {
    Criterion c = crit;
    if (c.pass && elapsed >= budget) {
      std::ostringstream why;
      why << "took " << elapsed << "s, budget " << budget << "s";
      c.fail(why.str());
    }
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", c.pass ? "PASS" : "FAIL", number, title,
                elapsed, c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
    if (!c.pass) ++failures;
  };

  for (const Entry& e : entries) {
    Criterion crit;
    auto t0 = std::chrono::steady_clock::now();
    try {
      e.fn(crit);
    } catch (const std::exception& ex) {
      crit.fail(std::string("exception: ") + ex.what());
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(e.number, e.title, crit, elapsed, e.budget_s);
  }

  {
    Criterion crit;
    auto t0 = std::chrono::steady_clock::now();
    try {
      criterion10(crit, cli);
    } catch (const std::exception& ex) {
      crit.fail(std::string("exception: ") + ex.what());
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(10, "pipeline commands are byte-reproducible", crit, elapsed, 300.0);
  }

  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
