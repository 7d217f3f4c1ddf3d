#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "passrate/errors.hpp"
#include "passrate/features.hpp"

namespace passrate {

enum class RiskKind { MLE, Arithmetic, Quadratic };

inline const char* risk_kind_name(RiskKind k) {
  switch (k) {
    case RiskKind::MLE: return "mle";
    case RiskKind::Arithmetic: return "arith";
    case RiskKind::Quadratic: return "quad";
  }
  return "?";
}

// Row-major k x (n+1) parameter matrix, last column is the bias.
struct MlrModel {
  int k = 0;
  int n = 0;
  std::vector<double> theta;
  std::string catalog_version = kCatalogVersion;
  RiskKind risk_kind = RiskKind::MLE;
  int norm_p = 2;
  double lambda = 0;

  double& at(int cls, int col) {
    return theta[static_cast<std::size_t>(cls * (n + 1) + col)];
  }
  double at(int cls, int col) const {
    return theta[static_cast<std::size_t>(cls * (n + 1) + col)];
  }
};

struct TrainingOptions {
  int max_iters = 2000;
  double step_size = 1.0;  // initial step, halved by backtracking
  double tolerance = 1e-7;
  unsigned seed = 0;  // reserved; training is deterministic from zero init
};

struct TrainReport {
  double final_objective = 0;
  int iterations = 0;
  bool converged = true;
};

// Data layout used by risk/gradient: X row-major m x n (no bias column),
// labels y in 1..k.
struct Dataset {
  std::vector<double> X;
  std::vector<int> y;
  int m = 0;
  int n = 0;

  double x(int i, int j) const {
    return X[static_cast<std::size_t>(i * n + j)];
  }
};

namespace detail {

// Logits with bias; then max-subtracted softmax.
inline void softmax_row(const MlrModel& model, const double* x,
                        std::vector<double>& probs) {
  const int k = model.k, n = model.n;
  probs.resize(static_cast<std::size_t>(k));
  double mx = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    double z = model.at(c, n);  // bias
    for (int j = 0; j < n; ++j) z += model.at(c, j) * x[j];
    probs[static_cast<std::size_t>(c)] = z;
    mx = std::max(mx, z);
  }
  double sum = 0;
  for (int c = 0; c < k; ++c) {
    probs[static_cast<std::size_t>(c)] =
        std::exp(probs[static_cast<std::size_t>(c)] - mx);
    sum += probs[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < k; ++c) probs[static_cast<std::size_t>(c)] /= sum;
}

inline std::vector<int> class_counts(const std::vector<int>& y, int k) {
  std::vector<int> m(static_cast<std::size_t>(k), 0);
  for (int yi : y) {
    if (yi < 1 || yi > k) throw LabelRangeError("label out of range 1..k");
    ++m[static_cast<std::size_t>(yi - 1)];
  }
  return m;
}

}  // namespace detail

inline std::vector<double> softmax_probs(const MlrModel& model,
                                         const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != model.n)
    throw DimensionError("feature vector length mismatch");
  std::vector<double> p;
  detail::softmax_row(model, x.data(), p);
  return p;
}

inline int predict(const MlrModel& model, const std::vector<double>& x) {
  const auto p = softmax_probs(model, x);
  int best = 0;
  for (int c = 1; c < model.k; ++c)
    if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)])
      best = c;
  return best + 1;  // ties resolve to the lowest class code
}

// Per-class mean log-losses L_j; classes with no examples are skipped and
// reported via k_eff.
namespace detail {

struct ClassLosses {
  std::vector<double> L;       // size k, zero for empty classes
  std::vector<int> counts;     // m_j
  int k_eff = 0;
  double total = 0;            // sum of all per-example losses
};

inline ClassLosses per_class_losses(const Dataset& d, const MlrModel& model) {
  if (d.n != model.n) throw DimensionError("X column count != model n");
  ClassLosses cl;
  cl.counts = class_counts(d.y, model.k);
  cl.L.assign(static_cast<std::size_t>(model.k), 0.0);
  std::vector<double> p;
  for (int i = 0; i < d.m; ++i) {
    softmax_row(model, &d.X[static_cast<std::size_t>(i * d.n)], p);
    const int j = d.y[static_cast<std::size_t>(i)] - 1;
    const double li =
        -std::log(std::max(p[static_cast<std::size_t>(j)], 1e-300));
    cl.L[static_cast<std::size_t>(j)] += li;
    cl.total += li;
  }
  for (int j = 0; j < model.k; ++j)
    if (cl.counts[static_cast<std::size_t>(j)] > 0) {
      cl.L[static_cast<std::size_t>(j)] /=
          cl.counts[static_cast<std::size_t>(j)];
      ++cl.k_eff;
    }
  return cl;
}

}  // namespace detail

inline double risk(RiskKind kind, const Dataset& d, const MlrModel& model) {
  const auto cl = detail::per_class_losses(d, model);
  switch (kind) {
    case RiskKind::MLE:
      return cl.total / d.m;
    case RiskKind::Arithmetic: {
      double s = 0;
      for (double l : cl.L) s += l;
      return s / cl.k_eff;
    }
    case RiskKind::Quadratic: {
      double s = 0;
      for (double l : cl.L) s += l * l;
      return std::sqrt(s / cl.k_eff);
    }
  }
  return 0;
}

inline std::vector<double> risk_gradient(RiskKind kind, const Dataset& d,
                                         const MlrModel& model) {
  const int k = model.k, n = model.n;
  const auto cl = detail::per_class_losses(d, model);
  const double rq = kind == RiskKind::Quadratic
                        ? risk(RiskKind::Quadratic, d, model)
                        : 0;

  std::vector<double> grad(static_cast<std::size_t>(k * (n + 1)), 0.0);
  std::vector<double> p;
  for (int i = 0; i < d.m; ++i) {
    const int yi = d.y[static_cast<std::size_t>(i)] - 1;
    double w = 0;
    switch (kind) {
      case RiskKind::MLE:
        w = 1.0 / d.m;
        break;
      case RiskKind::Arithmetic:
        w = 1.0 / (cl.k_eff * cl.counts[static_cast<std::size_t>(yi)]);
        break;
      case RiskKind::Quadratic:
        // d R^Q / d L_j = L_j / (k_eff * R^Q); zero risk has zero gradient.
        w = rq > 0 ? cl.L[static_cast<std::size_t>(yi)] /
                         (cl.k_eff * rq *
                          cl.counts[static_cast<std::size_t>(yi)])
                   : 0;
        break;
    }
    detail::softmax_row(model, &d.X[static_cast<std::size_t>(i * d.n)], p);
    for (int c = 0; c < k; ++c) {
      const double coeff =
          w * (p[static_cast<std::size_t>(c)] - (c == yi ? 1.0 : 0.0));
      double* g = &grad[static_cast<std::size_t>(c * (n + 1))];
      const double* x = &d.X[static_cast<std::size_t>(i * d.n)];
      for (int j = 0; j < n; ++j) g[j] += coeff * x[j];
      g[n] += coeff;  // bias input is 1
    }
  }
  return grad;
}

namespace detail {

// Regularization over non-bias entries only.
inline double penalty(const MlrModel& m) {
  double s = 0;
  for (int c = 0; c < m.k; ++c)
    for (int j = 0; j < m.n; ++j)
      s += m.norm_p == 1 ? std::abs(m.at(c, j)) : m.at(c, j) * m.at(c, j);
  return m.lambda * s;
}

}  // namespace detail

inline double objective(const Dataset& d, const MlrModel& m) {
  return risk(m.risk_kind, d, m) + detail::penalty(m);
}

// Deterministic first-order training: gradient steps with backtracking for
// l2, proximal gradient (soft-thresholding) for l1 so exact zeros occur.
inline MlrModel train(const Dataset& d, int k, RiskKind risk_kind, int norm_p,
                      double lambda, const TrainingOptions& options = {},
                      TrainReport* report = nullptr,
                      const std::string& catalog_version = kCatalogVersion) {
  if (d.m < k) throw TooFewExamplesError("need at least k examples");
  if (norm_p != 1 && norm_p != 2) throw DimensionError("norm_p must be 1 or 2");
  MlrModel model;
  model.k = k;
  model.n = d.n;
  model.theta.assign(static_cast<std::size_t>(k * (d.n + 1)), 0.0);
  model.risk_kind = risk_kind;
  model.norm_p = norm_p;
  model.lambda = lambda;
  model.catalog_version = catalog_version;

  auto smooth = [&](const MlrModel& m) {
    double v = risk(risk_kind, d, m);
    if (norm_p == 2) v += detail::penalty(m);
    return v;
  };
  auto smooth_grad = [&](const MlrModel& m) {
    auto g = risk_gradient(risk_kind, d, m);
    if (norm_p == 2)
      for (int c = 0; c < k; ++c)
        for (int j = 0; j < d.n; ++j)
          g[static_cast<std::size_t>(c * (d.n + 1) + j)] +=
              2 * lambda * m.at(c, j);
    return g;
  };
  auto full_objective = [&](const MlrModel& m) {
    return risk(risk_kind, d, m) + detail::penalty(m);
  };

  double step = options.step_size;
  double cur_obj = full_objective(model);
  int iters = 0;
  bool converged = false;
  for (; iters < options.max_iters; ++iters) {
    const auto g = smooth_grad(model);
    double gnorm = 0;
    for (double v : g) gnorm += v * v;
    gnorm = std::sqrt(gnorm);
    if (gnorm < options.tolerance && norm_p == 2) {
      converged = true;
      break;
    }

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      MlrModel cand = model;
      for (std::size_t t = 0; t < cand.theta.size(); ++t)
        cand.theta[t] -= step * g[t];
      if (norm_p == 1) {
        const double thr = step * lambda;
        for (int c = 0; c < k; ++c)
          for (int j = 0; j < d.n; ++j) {
            double& v = cand.at(c, j);
            v = v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
          }
      }
      const double cand_obj = full_objective(cand);
      if (cand_obj <= cur_obj + 1e-15) {
        double delta = 0;
        for (std::size_t t = 0; t < cand.theta.size(); ++t)
          delta = std::max(delta, std::abs(cand.theta[t] - model.theta[t]));
        model = std::move(cand);
        const double improved = cur_obj - cand_obj;
        cur_obj = cand_obj;
        accepted = true;
        if (improved < options.tolerance && delta < options.tolerance)
          converged = true;
        break;
      }
      step /= 2;
      if (step < 1e-16) break;
    }
    if (!accepted || converged) {
      converged = converged || !accepted;
      break;
    }
    step *= 1.3;  // cautious growth after an accepted step
  }
  if (report) {
    report->final_objective = cur_obj;
    report->iterations = iters;
    report->converged = converged;
  }
  return model;
}

// Catalog entries with any above-threshold class weight, by descending
// max |weight|.
inline std::vector<std::pair<std::string, double>> nonzero_predictors(
    const MlrModel& model, double tol = 1e-8) {
  const auto& catalog = feature_catalog();
  std::vector<std::pair<std::string, double>> out;
  for (int j = 0; j < model.n; ++j) {
    double mx = 0;
    for (int c = 0; c < model.k; ++c)
      mx = std::max(mx, std::abs(model.at(c, j)));
    if (mx > tol)
      out.push_back({j < static_cast<int>(catalog.size())
                         ? catalog[static_cast<std::size_t>(j)].name
                         : "feature_" + std::to_string(j),
                     mx});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  return out;
}

inline void write_model(const MlrModel& m, const std::string& path) {
  std::ofstream out(path);
  out << "passrate-mlr-model v1\n";
  out << "k " << m.k << '\n';
  out << "n " << m.n << '\n';
  out << "catalog_version " << m.catalog_version << '\n';
  out << "risk_kind " << risk_kind_name(m.risk_kind) << '\n';
  out << "norm_p " << m.norm_p << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", m.lambda);
  out << "lambda " << buf << '\n';
  for (int c = 0; c < m.k; ++c) {
    for (int j = 0; j <= m.n; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.at(c, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

inline MlrModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "passrate-mlr-model v1")
    throw SchemaError(path + ": bad model header");
  MlrModel m;
  std::string key;
  in >> key >> m.k;
  in >> key >> m.n;
  in >> key >> m.catalog_version;
  std::string risk_name;
  in >> key >> risk_name;
  if (risk_name == "mle") m.risk_kind = RiskKind::MLE;
  else if (risk_name == "arith") m.risk_kind = RiskKind::Arithmetic;
  else if (risk_name == "quad") m.risk_kind = RiskKind::Quadratic;
  else throw SchemaError(path + ": bad risk kind");
  in >> key >> m.norm_p;
  in >> key >> m.lambda;
  m.theta.assign(static_cast<std::size_t>(m.k * (m.n + 1)), 0.0);
  for (double& v : m.theta)
    if (!(in >> v)) throw SchemaError(path + ": truncated theta");
  return m;
}

}  // namespace passrate
