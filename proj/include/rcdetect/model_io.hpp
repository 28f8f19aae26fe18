#pragma once

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rcdetect/classifiers.hpp"
#include "rcdetect/errors.hpp"

// Line-based text serialization for trained models. The format is
// deterministic: parsing a serialized bundle and serializing it again yields
// byte-identical output, which makes saved models diff- and hash-friendly.

namespace rcdetect {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void append_doubles(std::string& out, const std::vector<double>& vs) {
  for (double v : vs) {
    out += ' ';
    out += fmt_double(v);
  }
  out += '\n';
}

struct LineReader {
  std::istringstream in;
  std::string line;
  std::size_t line_no = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  // Next line split into whitespace tokens; throws when the stream ends.
  // Blank lines and '#' comment rows (the provenance header) are skipped.
  std::vector<std::string> next(const char* expecting) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line[0] == '#') continue;
      std::vector<std::string> tokens;
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    throw FormatError(std::string("model text ended while expecting ") + expecting);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("model text line " + std::to_string(line_no) + ": " + what);
  }
};

inline double parse_model_double(LineReader& r, const std::string& tok) {
  const char* s = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end != s + tok.size()) r.fail("bad numeric token \"" + tok + "\"");
  return v;
}

inline long long parse_model_int(LineReader& r, const std::string& tok) {
  const char* s = tok.c_str();
  char* end = nullptr;
  long long v = std::strtoll(s, &end, 10);
  if (end != s + tok.size()) r.fail("bad integer token \"" + tok + "\"");
  return v;
}

inline std::vector<double> parse_double_row(LineReader& r, const std::vector<std::string>& toks,
                                            const char* keyword, std::size_t count) {
  if (toks.empty() || toks[0] != keyword)
    r.fail(std::string("expected \"") + keyword + "\" row");
  if (toks.size() != count + 1)
    r.fail(std::string(keyword) + " row carries " + std::to_string(toks.size() - 1) +
           " values, expected " + std::to_string(count));
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = parse_model_double(r, toks[i + 1]);
  return out;
}

inline void append_tree(std::string& out, const DecisionTree& t) {
  out += "tree " + std::to_string(t.nodes.size()) + '\n';
  for (const auto& n : t.nodes) {
    out += "node " + std::to_string(n.feature) + ' ' + fmt_double(n.split) + ' ' +
           std::to_string(n.left) + ' ' + std::to_string(n.right) + ' ' +
           std::string(n.label == Label::ATTACKED ? "1" : "0") + ' ' +
           std::to_string(n.count_normal) + ' ' + std::to_string(n.count_attacked) + '\n';
  }
}

inline DecisionTree parse_tree(LineReader& r, const std::vector<std::string>& header) {
  if (header.size() != 2 || header[0] != "tree") r.fail("expected \"tree <count>\" row");
  long long count = parse_model_int(r, header[1]);
  if (count <= 0) r.fail("tree must have at least one node");
  DecisionTree t;
  t.nodes.resize(static_cast<std::size_t>(count));
  for (auto& n : t.nodes) {
    auto toks = r.next("a node row");
    if (toks.size() != 8 || toks[0] != "node") r.fail("expected 7-field node row");
    n.feature = static_cast<int32_t>(parse_model_int(r, toks[1]));
    n.split = parse_model_double(r, toks[2]);
    n.left = static_cast<int32_t>(parse_model_int(r, toks[3]));
    n.right = static_cast<int32_t>(parse_model_int(r, toks[4]));
    long long lab = parse_model_int(r, toks[5]);
    if (lab != 0 && lab != 1) r.fail("node label must be 0 or 1");
    n.label = lab == 1 ? Label::ATTACKED : Label::NORMAL;
    n.count_normal = static_cast<uint64_t>(parse_model_int(r, toks[6]));
    n.count_attacked = static_cast<uint64_t>(parse_model_int(r, toks[7]));
    if (n.feature >= 0) {
      if (n.left < 0 || n.right < 0 || n.left >= count || n.right >= count)
        r.fail("internal node child index out of range");
    }
  }
  return t;
}

}  // namespace detail

inline std::string serialize_models(const std::vector<TrainedModel>& models) {
  std::string out = "rcdetect-model v1\n";
  out += "models " + std::to_string(models.size()) + '\n';
  for (const auto& m : models) {
    out += std::string("model ") + to_string(m.kind) + ' ' + to_string(m.protocol) + '\n';
    const auto& sp = m.standardization;
    out += "dim " + std::to_string(sp.dim()) + '\n';
    out += "mean";
    detail::append_doubles(out, sp.mean);
    out += "stddev";
    detail::append_doubles(out, sp.stddev);
    out += "constant";
    for (bool c : sp.constant_feature) out += c ? " 1" : " 0";
    out += '\n';

    switch (m.kind) {
      case ModelKind::DT:
        detail::append_tree(out, std::get<DecisionTree>(m.model));
        break;
      case ModelKind::RF: {
        const auto& rf = std::get<RandomForest>(m.model);
        out += "forest " + std::to_string(rf.trees.size()) + '\n';
        for (const auto& t : rf.trees) detail::append_tree(out, t);
        break;
      }
      case ModelKind::SVM: {
        const auto& svm = std::get<LinearSVM>(m.model);
        out += "svm " + detail::fmt_double(svm.C) + ' ' + std::to_string(svm.epochs) + '\n';
        out += "weights";
        detail::append_doubles(out, svm.weights);
        out += "bias " + detail::fmt_double(svm.bias) + '\n';
        out += "objectives";
        detail::append_doubles(out, svm.epoch_objectives);
        break;
      }
      case ModelKind::KNN: {
        const auto& knn = std::get<KnnModel>(m.model);
        out += "knn " + std::to_string(knn.k) + ' ' + std::to_string(knn.x.size()) + '\n';
        for (std::size_t i = 0; i < knn.x.size(); ++i) {
          out += std::string("row ") + (knn.y[i] == Label::ATTACKED ? "1" : "0");
          detail::append_doubles(out, knn.x[i]);
        }
        break;
      }
      case ModelKind::NB: {
        const auto& nb = std::get<NbModel>(m.model);
        out += "nb\n";
        out += "prior " + detail::fmt_double(nb.log_prior[0]) + ' ' +
               detail::fmt_double(nb.log_prior[1]) + '\n';
        out += "mean0";
        detail::append_doubles(out, nb.mean[0]);
        out += "var0";
        detail::append_doubles(out, nb.variance[0]);
        out += "mean1";
        detail::append_doubles(out, nb.mean[1]);
        out += "var1";
        detail::append_doubles(out, nb.variance[1]);
        break;
      }
    }
    out += "end\n";
  }
  return out;
}

inline std::vector<TrainedModel> parse_models(const std::string& text) {
  detail::LineReader r(text);
  auto header = r.next("the signature row");
  if (header.size() != 2 || header[0] != "rcdetect-model")
    throw FormatError("not a model file: missing \"rcdetect-model\" signature");
  if (header[1] != "v1")
    throw FormatError("unsupported model format version \"" + header[1] + "\"");
  auto counts = r.next("the model count");
  if (counts.size() != 2 || counts[0] != "models") r.fail("expected \"models <count>\" row");
  long long n_models = detail::parse_model_int(r, counts[1]);
  if (n_models < 0) r.fail("negative model count");

  std::vector<TrainedModel> models;
  models.reserve(static_cast<std::size_t>(n_models));
  for (long long mi = 0; mi < n_models; ++mi) {
    auto mh = r.next("a model row");
    if (mh.size() != 3 || mh[0] != "model") r.fail("expected \"model <kind> <protocol>\" row");
    TrainedModel m;
    m.kind = model_kind_from_string(mh[1]);
    m.protocol = model_protocol_from_string(mh[2]);

    auto dim_row = r.next("the dimension row");
    if (dim_row.size() != 2 || dim_row[0] != "dim") r.fail("expected \"dim <d>\" row");
    long long dim = detail::parse_model_int(r, dim_row[1]);
    if (dim <= 0) r.fail("model dimension must be positive");
    auto d = static_cast<std::size_t>(dim);

    m.standardization.mean = detail::parse_double_row(r, r.next("the mean row"), "mean", d);
    m.standardization.stddev =
        detail::parse_double_row(r, r.next("the stddev row"), "stddev", d);
    auto const_row = r.next("the constant row");
    if (const_row.size() != d + 1 || const_row[0] != "constant")
      r.fail("expected \"constant\" row with " + std::to_string(d) + " flags");
    m.standardization.constant_feature.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      if (const_row[i + 1] != "0" && const_row[i + 1] != "1")
        r.fail("constant flags must be 0 or 1");
      m.standardization.constant_feature[i] = const_row[i + 1] == "1";
    }

    switch (m.kind) {
      case ModelKind::DT:
        m.model = detail::parse_tree(r, r.next("the tree header"));
        break;
      case ModelKind::RF: {
        auto fh = r.next("the forest header");
        if (fh.size() != 2 || fh[0] != "forest") r.fail("expected \"forest <count>\" row");
        long long n_trees = detail::parse_model_int(r, fh[1]);
        if (n_trees <= 0) r.fail("forest must have at least one tree");
        RandomForest rf;
        rf.trees.reserve(static_cast<std::size_t>(n_trees));
        for (long long t = 0; t < n_trees; ++t)
          rf.trees.push_back(detail::parse_tree(r, r.next("a tree header")));
        m.model = std::move(rf);
        break;
      }
      case ModelKind::SVM: {
        auto sh = r.next("the svm header");
        if (sh.size() != 3 || sh[0] != "svm") r.fail("expected \"svm <C> <epochs>\" row");
        LinearSVM svm;
        svm.C = detail::parse_model_double(r, sh[1]);
        svm.epochs = static_cast<uint32_t>(detail::parse_model_int(r, sh[2]));
        svm.weights = detail::parse_double_row(r, r.next("the weights row"), "weights", d);
        auto bias_row = r.next("the bias row");
        if (bias_row.size() != 2 || bias_row[0] != "bias") r.fail("expected \"bias <b>\" row");
        svm.bias = detail::parse_model_double(r, bias_row[1]);
        auto obj_row = r.next("the objectives row");
        if (obj_row.empty() || obj_row[0] != "objectives")
          r.fail("expected \"objectives\" row");
        svm.epoch_objectives.resize(obj_row.size() - 1);
        for (std::size_t i = 1; i < obj_row.size(); ++i)
          svm.epoch_objectives[i - 1] = detail::parse_model_double(r, obj_row[i]);
        m.model = std::move(svm);
        break;
      }
      case ModelKind::KNN: {
        auto kh = r.next("the knn header");
        if (kh.size() != 3 || kh[0] != "knn") r.fail("expected \"knn <k> <n>\" row");
        KnnModel knn;
        knn.k = static_cast<uint32_t>(detail::parse_model_int(r, kh[1]));
        long long rows = detail::parse_model_int(r, kh[2]);
        if (rows <= 0) r.fail("stored neighbor set cannot be empty");
        if (knn.k == 0 || knn.k % 2 == 0 || knn.k > static_cast<uint64_t>(rows))
          r.fail("stored neighbor count k is invalid");
        for (long long i = 0; i < rows; ++i) {
          auto row = r.next("a neighbor row");
          if (row.size() != d + 2 || row[0] != "row") r.fail("expected neighbor row");
          if (row[1] != "0" && row[1] != "1") r.fail("neighbor label must be 0 or 1");
          knn.y.push_back(row[1] == "1" ? Label::ATTACKED : Label::NORMAL);
          FeatureRow x(d);
          for (std::size_t j = 0; j < d; ++j)
            x[j] = detail::parse_model_double(r, row[j + 2]);
          knn.x.push_back(std::move(x));
        }
        m.model = std::move(knn);
        break;
      }
      case ModelKind::NB: {
        auto nh = r.next("the nb header");
        if (nh.size() != 1 || nh[0] != "nb") r.fail("expected \"nb\" row");
        auto pr = r.next("the prior row");
        if (pr.size() != 3 || pr[0] != "prior") r.fail("expected \"prior <p0> <p1>\" row");
        NbModel nb;
        nb.log_prior[0] = detail::parse_model_double(r, pr[1]);
        nb.log_prior[1] = detail::parse_model_double(r, pr[2]);
        nb.mean[0] = detail::parse_double_row(r, r.next("the mean0 row"), "mean0", d);
        nb.variance[0] = detail::parse_double_row(r, r.next("the var0 row"), "var0", d);
        nb.mean[1] = detail::parse_double_row(r, r.next("the mean1 row"), "mean1", d);
        nb.variance[1] = detail::parse_double_row(r, r.next("the var1 row"), "var1", d);
        m.model = std::move(nb);
        break;
      }
    }

    auto tail = r.next("the end row");
    if (tail.size() != 1 || tail[0] != "end") r.fail("expected \"end\" row");
    models.push_back(std::move(m));
  }
  return models;
}

inline void save_models_file(const std::vector<TrainedModel>& models,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open \"" + path + "\" for writing");
  std::string text = serialize_models(models);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("short write to \"" + path + "\"");
}

inline std::vector<TrainedModel> load_models_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\" for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on \"" + path + "\"");
  return parse_models(buf.str());
}

}  // namespace rcdetect
