#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "passrate/errors.hpp"

namespace passrate {

struct ConfusionMatrix {
  int k = 0;
  std::vector<long> counts;  // row = truth, column = predicted

  long& at(int truth, int pred) {
    return counts[static_cast<std::size_t>((truth - 1) * k + (pred - 1))];
  }
  long at(int truth, int pred) const {
    return counts[static_cast<std::size_t>((truth - 1) * k + (pred - 1))];
  }
  long total() const {
    return std::accumulate(counts.begin(), counts.end(), 0L);
  }
};

struct MetricReport {
  double accuracy = 0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<bool> degenerate;  // zero-denominator classes, reported as 0
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
};

struct KappaReport {
  double kappa = 0;
  double p_o = 0;
  double p_e = 0;
};

inline ConfusionMatrix confusion(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred, int k) {
  if (y_true.size() != y_pred.size())
    throw LengthMismatchError("y_true and y_pred lengths differ");
  ConfusionMatrix cm;
  cm.k = k;
  cm.counts.assign(static_cast<std::size_t>(k * k), 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 1 || y_true[i] > k || y_pred[i] < 1 || y_pred[i] > k)
      throw LabelRangeError("label outside 1..k");
    ++cm.at(y_true[i], y_pred[i]);
  }
  return cm;
}

inline MetricReport metrics(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total == 0) throw EmptyMatrixError("empty confusion matrix");
  MetricReport r;
  r.precision.assign(static_cast<std::size_t>(cm.k), 0);
  r.recall.assign(static_cast<std::size_t>(cm.k), 0);
  r.f1.assign(static_cast<std::size_t>(cm.k), 0);
  r.degenerate.assign(static_cast<std::size_t>(cm.k), false);
  long trace = 0;
  double mp = 0, mr = 0, mf = 0;
  int present = 0;
  for (int j = 1; j <= cm.k; ++j) {
    trace += cm.at(j, j);
    long rowsum = 0, colsum = 0;
    for (int o = 1; o <= cm.k; ++o) {
      rowsum += cm.at(j, o);
      colsum += cm.at(o, j);
    }
    const std::size_t idx = static_cast<std::size_t>(j - 1);
    if (colsum > 0)
      r.precision[idx] = static_cast<double>(cm.at(j, j)) / colsum;
    else
      r.degenerate[idx] = true;
    if (rowsum > 0)
      r.recall[idx] = static_cast<double>(cm.at(j, j)) / rowsum;
    else
      r.degenerate[idx] = true;
    const double pr = r.precision[idx] + r.recall[idx];
    r.f1[idx] = pr > 0 ? 2 * r.precision[idx] * r.recall[idx] / pr : 0;
    if (rowsum > 0) {  // macro over classes with ground-truth presence
      mp += r.precision[idx];
      mr += r.recall[idx];
      mf += r.f1[idx];
      ++present;
    }
  }
  r.accuracy = static_cast<double>(trace) / total;
  if (present > 0) {
    r.macro_precision = mp / present;
    r.macro_recall = mr / present;
    r.macro_f1 = mf / present;
  }
  return r;
}

inline KappaReport cohens_kappa(const std::vector<int>& a,
                                const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw LengthMismatchError("labelings must share a positive length");
  const std::size_t m = a.size();
  std::map<int, double> ma, mb;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i] == b[i]) ++agree;
    ma[a[i]] += 1;
    mb[b[i]] += 1;
  }
  KappaReport r;
  r.p_o = static_cast<double>(agree) / static_cast<double>(m);
  for (const auto& [label, ca] : ma) {
    const auto it = mb.find(label);
    if (it != mb.end())
      r.p_e += (ca / static_cast<double>(m)) *
               (it->second / static_cast<double>(m));
  }
  // Both raters constant and identical: perfect agreement by convention.
  r.kappa = r.p_e >= 1.0 ? 1.0 : (r.p_o - r.p_e) / (1 - r.p_e);
  return r;
}

inline std::vector<std::vector<double>> kappa_matrix(
    const std::vector<std::vector<int>>& labelings) {
  const std::size_t n = labelings.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = cohens_kappa(labelings[i], labelings[j]).kappa;
      out[i][j] = out[j][i] = k;
    }
  return out;
}

namespace detail {

inline std::map<int, std::vector<std::size_t>> indices_by_class(
    const std::vector<int>& y) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  return by_class;
}

}  // namespace detail

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class seeded shuffle, round(m_j * fraction) test examples per class
// (at least one when the class has two or more examples).
inline Split stratified_split(const std::vector<int>& y,
                              double test_fraction, unsigned seed) {
  if (y.empty()) throw TooFewExamplesError("no examples to split");
  std::mt19937 rng(seed);
  Split split;
  for (auto& [cls, idx] : detail::indices_by_class(y)) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t take = static_cast<std::size_t>(
        std::lround(static_cast<double>(idx.size()) * test_fraction));
    if (test_fraction > 0 && idx.size() >= 2 && take == 0) take = 1;
    take = std::min(take, idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < take ? split.test : split.train).push_back(idx[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// Stratified k folds by per-class round-robin after a seeded shuffle.
inline std::vector<std::vector<std::size_t>> kfold(const std::vector<int>& y,
                                                   int folds, unsigned seed,
                                                   bool stratified = true) {
  if (folds < 2 || static_cast<std::size_t>(folds) > y.size())
    throw TooFewExamplesError("folds must be in [2, m]");
  std::mt19937 rng(seed);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  if (stratified) {
    for (auto& [cls, idx] : detail::indices_by_class(y)) {
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t i = 0; i < idx.size(); ++i)
        out[i % static_cast<std::size_t>(folds)].push_back(idx[i]);
    }
  } else {
    std::vector<std::size_t> idx(y.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i)
      out[i % static_cast<std::size_t>(folds)].push_back(idx[i]);
  }
  for (auto& fold : out) std::sort(fold.begin(), fold.end());
  return out;
}

inline std::string metrics_summary(const MetricReport& r,
                                   const std::vector<std::string>& class_names) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "accuracy  %.3f\n", r.accuracy);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-14s %9s %9s %9s\n", "class", "precision",
                "recall", "f1");
  out << buf;
  for (std::size_t j = 0; j < r.precision.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%-14s %9.3f %9.3f %9.3f%s\n",
                  j < class_names.size() ? class_names[j].c_str() : "?",
                  r.precision[j], r.recall[j], r.f1[j],
                  r.degenerate[j] ? "  (degenerate)" : "");
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-14s %9.3f %9.3f %9.3f\n", "macro",
                r.macro_precision, r.macro_recall, r.macro_f1);
  out << buf;
  return out.str();
}

inline void write_confusion_csv(const ConfusionMatrix& cm,
                                const std::vector<std::string>& class_names,
                                const std::string& path) {
  std::ofstream out(path);
  out << "truth\\pred";
  for (int j = 1; j <= cm.k; ++j)
    out << ','
        << (static_cast<std::size_t>(j - 1) < class_names.size()
                ? class_names[static_cast<std::size_t>(j - 1)]
                : std::to_string(j));
  out << '\n';
  for (int t = 1; t <= cm.k; ++t) {
    out << (static_cast<std::size_t>(t - 1) < class_names.size()
                ? class_names[static_cast<std::size_t>(t - 1)]
                : std::to_string(t));
    for (int p = 1; p <= cm.k; ++p) out << ',' << cm.at(t, p);
    out << '\n';
  }
}

}  // namespace passrate
