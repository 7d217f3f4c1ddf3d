// passrate: command-line front end for the pass-rating pipeline.
//
// Subcommands: generate, validate, render, featurize, train, evaluate,
// agree. Every subcommand is deterministic given its flags and seeds.
// Exit codes: 0 success, 1 validation/data error, 2 usage error.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "passrate/classifier.hpp"
#include "passrate/evaluation.hpp"
#include "passrate/features.hpp"
#include "passrate/labels.hpp"
#include "passrate/svg.hpp"
#include "passrate/synthetic.hpp"

namespace {

using namespace passrate;

struct ModelFlags {
  std::string model = "ellipse";
  double tau_step = 0.1;
  double tau_max = 10.0;
  int n_sides = 16;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--model", f.model, "Motion model")
      ->check(CLI::IsMember({"circle", "ellipse"}))
      ->capture_default_str();
  cmd->add_option("--tau-step", f.tau_step, "Reach-time grid step (s)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tau-max", f.tau_max, "Reach-time grid horizon (s)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--n-sides", f.n_sides, "Reachable-polygon vertex count")
      ->check(CLI::Range(8, 256))
      ->capture_default_str();
}

FeatureConfig feature_config(const ModelFlags& f) {
  FeatureConfig cfg;
  cfg.model.kind = f.model == "circle" ? MotionModelKind::Circle
                                       : MotionModelKind::Ellipse;
  cfg.grid.tau_step = f.tau_step;
  cfg.grid.tau_max = f.tau_max;
  cfg.n_sides = f.n_sides;
  return cfg;
}

// Labels file -> one rating per pass index: single observer sets pass
// through, two or more are triangulated pairwise in file order.
std::map<std::size_t, Rating> merged_ratings(const std::string& path) {
  const auto sets = read_labels(path);
  if (sets.empty()) throw SchemaError(path + ": no labels found");
  LabelSet merged = sets.front();
  for (std::size_t i = 1; i < sets.size(); ++i)
    merged = merge_labels(merged, sets[i]);
  return merged.ratings;
}

struct Supervised {
  Dataset data;                      // standardized features, aligned labels
  std::vector<std::size_t> passes;   // pass index per row
};

// Rows of the feature file that carry a rating, standardized over the
// whole file so train and evaluate see identical coordinates.
Supervised supervised_dataset(const FeatureMatrix& raw,
                              const std::map<std::size_t, Rating>& ratings,
                              const std::string& scheme) {
  const auto m = apply_standardization(raw, column_stats(raw));
  Supervised out;
  out.data.n = static_cast<int>(m.columns());
  for (const auto& row : m.rows) {
    const auto it = ratings.find(row.pass_index);
    if (it == ratings.end()) continue;
    out.data.X.insert(out.data.X.end(), row.values.begin(), row.values.end());
    out.data.y.push_back(scheme == "three"
                             ? code(aggregate_to_three(it->second))
                             : code(it->second));
    out.passes.push_back(row.pass_index);
    ++out.data.m;
  }
  if (out.data.m == 0)
    throw CoverageError("no feature rows match the label file");
  return out;
}

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.n = d.n;
  for (std::size_t i : rows) {
    for (int j = 0; j < d.n; ++j) out.X.push_back(d.x(static_cast<int>(i), j));
    out.y.push_back(d.y[i]);
    ++out.m;
  }
  return out;
}

double mean_cv_accuracy(const Dataset& d, int k, RiskKind risk_kind,
                        int norm_p, double lambda, int folds, unsigned seed) {
  const auto fold_sets = kfold(d.y, folds, seed);
  double acc_sum = 0;
  for (const auto& test_rows : fold_sets) {
    std::vector<std::size_t> train_rows;
    const std::set<std::size_t> held(test_rows.begin(), test_rows.end());
    for (std::size_t i = 0; i < d.y.size(); ++i)
      if (!held.count(i)) train_rows.push_back(i);
    const auto model =
        train(take_rows(d, train_rows), k, risk_kind, norm_p, lambda);
    int correct = 0;
    for (std::size_t i : test_rows) {
      std::vector<double> x(d.X.begin() + static_cast<long>(i) * d.n,
                            d.X.begin() + (static_cast<long>(i) + 1) * d.n);
      if (predict(model, x) == d.y[i]) ++correct;
    }
    acc_sum += static_cast<double>(correct) /
               static_cast<double>(test_rows.size());
  }
  return acc_sum / static_cast<double>(fold_sets.size());
}

RiskKind parse_risk(const std::string& s) {
  if (s == "mle") return RiskKind::MLE;
  if (s == "arith") return RiskKind::Arithmetic;
  return RiskKind::Quadratic;
}

std::vector<std::string> class_names(int k) {
  std::vector<std::string> names;
  if (k == 3) {
    names = {"Good", "OK", "Bad"};
  } else {
    for (int v = 1; v <= k; ++v)
      names.push_back(rating_name(static_cast<Rating>(v)));
  }
  return names;
}

int run_generate(unsigned seed, int players, int steps, double pass_rate,
                 double noise, const std::string& out_dir) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.players_per_team = players;
  cfg.duration_steps = steps;
  cfg.pass_rate = pass_rate;
  cfg.noise_level = noise;
  const auto ds = generate_match(cfg);
  write_match(ds, out_dir);
  const auto passes = extract_passes(ds);
  const auto [obs1, obs2] = generate_labels(ds, passes, noise, seed);
  write_labels({obs1, obs2}, out_dir + "/labels.csv");
  std::printf("wrote %zu players, %zu events, %zu passes to %s\n",
              ds.players.size(), ds.events.size(), passes.size(),
              out_dir.c_str());
  return 0;
}

int run_validate(const std::string& dir) {
  const auto ds = load_match_dir(dir);
  const auto passes = extract_passes(ds);
  std::printf("%s: ok (%zu players, %zu events, %zu passes, %d steps)\n",
              dir.c_str(), ds.players.size(), ds.events.size(), passes.size(),
              ds.clock.max_step + 1);
  return 0;
}

int run_render(const std::string& dir, int step, const ModelFlags& flags,
               bool grid_oracle, const std::string& out_path) {
  const auto ds = load_match_dir(dir);
  const auto cfg = feature_config(flags);
  std::map<int, PlayerState> states;
  std::map<int, Vec2> positions;
  for (int id : ds.players_on_pitch(step)) {
    states[id] = player_state(ds, id, step, cfg.facing);
    positions[id] = states[id].position;
  }
  if (states.size() < 2)
    throw IntegrityError("need at least 2 players on pitch at step " +
                         std::to_string(step));
  const auto sub =
      dominant_subdivision(states, cfg.model, cfg.grid, cfg.n_sides, ds.pitch);
  std::optional<OwnershipGrid> oracle;
  if (grid_oracle)
    oracle = grid_dominant(states, cfg.model, cfg.grid, 1.0, ds.pitch,
                           cfg.n_sides);
  write_subdivision_svg(sub, ds.team_map, positions, out_path,
                        oracle ? &*oracle : nullptr, ds.pitch);
  std::printf("wrote %s (%zu regions%s)\n", out_path.c_str(),
              sub.regions.size(), grid_oracle ? ", oracle overlay" : "");
  return 0;
}

int run_featurize(const std::string& dir, const ModelFlags& flags,
                  const std::string& out_path) {
  const auto ds = load_match_dir(dir);
  const auto passes = extract_passes(ds);
  const auto m = feature_matrix(ds, passes, feature_config(flags));
  write_feature_matrix(m, out_path);
  std::printf("wrote %zu passes x %zu features to %s\n", m.rows.size(),
              m.columns(), out_path.c_str());
  return 0;
}

int run_train(const std::string& features_path, const std::string& labels_path,
              const std::string& risk_name, const std::string& norm_name,
              double lambda, bool lambda_given, const std::string& scheme,
              int holdout_seed, bool holdout_given, unsigned cv_seed,
              const std::string& out_path) {
  const auto raw = read_feature_matrix(features_path);
  auto sup = supervised_dataset(raw, merged_ratings(labels_path), scheme);
  const int k = scheme == "three" ? 3 : 6;
  const RiskKind risk_kind = parse_risk(risk_name);
  const int norm_p = norm_name == "l1" ? 1 : 2;

  Dataset train_data = sup.data;
  if (holdout_given) {
    const auto split = stratified_split(
        sup.data.y, 0.2, static_cast<unsigned>(holdout_seed));
    train_data = take_rows(sup.data, split.train);
    std::printf("holdout: %zu train / %zu held-out rows (seed %d)\n",
                split.train.size(), split.test.size(), holdout_seed);
  }

  if (!lambda_given) {
    // Tenfold CV over a 10-point geometric grid; ties prefer the larger
    // lambda (the simpler model).
    double best_acc = -1;
    double best_lambda = 0;
    for (int g = 0; g < 10; ++g) {
      const double cand = 1e-5 * std::pow(10.0, g * 5.0 / 9.0);  // 1e-5..1
      const double acc = mean_cv_accuracy(train_data, k, risk_kind, norm_p,
                                          cand, 10, cv_seed);
      std::printf("cv lambda=%.6g  accuracy=%.4f\n", cand, acc);
      if (acc >= best_acc) {
        best_acc = acc;
        best_lambda = cand;
      }
    }
    lambda = best_lambda;
    std::printf("selected lambda=%.6g\n", lambda);
  }

  TrainReport report;
  const auto model = train(train_data, k, risk_kind, norm_p, lambda, {},
                           &report, raw.catalog_version);
  write_model(model, out_path);
  std::printf("trained k=%d model on %d rows: objective=%.6f iters=%d%s\n",
              k, train_data.m, report.final_objective, report.iterations,
              report.converged ? "" : " (not converged)");
  const auto predictors = nonzero_predictors(model);
  std::printf("nonzero predictors: %zu\n", predictors.size());
  for (std::size_t i = 0; i < predictors.size() && i < 5; ++i)
    std::printf("  %-32s %.4f\n", predictors[i].first.c_str(),
                predictors[i].second);
  return 0;
}

int run_evaluate(const std::string& model_path,
                 const std::string& features_path,
                 const std::string& labels_path, int holdout_seed,
                 bool holdout_given, const std::string& confusion_path) {
  const auto model = read_model(model_path);
  const auto raw = read_feature_matrix(features_path);
  if (raw.catalog_version != model.catalog_version)
    throw SchemaError("feature catalog version '" + raw.catalog_version +
                      "' does not match model '" + model.catalog_version +
                      "'");
  const std::string scheme = model.k == 3 ? "three" : "six";
  auto sup = supervised_dataset(raw, merged_ratings(labels_path), scheme);

  std::vector<std::size_t> rows(sup.data.y.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (holdout_given) {
    rows = stratified_split(sup.data.y, 0.2,
                            static_cast<unsigned>(holdout_seed))
               .test;
    std::printf("evaluating on %zu held-out rows (seed %d)\n", rows.size(),
                holdout_seed);
  }

  std::vector<int> y_true, y_pred;
  std::map<int, long> truth_counts;
  for (std::size_t i : rows) {
    std::vector<double> x(
        sup.data.X.begin() + static_cast<long>(i) * sup.data.n,
        sup.data.X.begin() + (static_cast<long>(i) + 1) * sup.data.n);
    y_true.push_back(sup.data.y[i]);
    y_pred.push_back(predict(model, x));
    ++truth_counts[sup.data.y[i]];
  }

  const auto names = class_names(model.k);
  std::printf("label counts:");
  for (int c = 1; c <= model.k; ++c)
    std::printf(" %s=%ld", names[static_cast<std::size_t>(c - 1)].c_str(),
                truth_counts.count(c) ? truth_counts.at(c) : 0L);
  std::printf(" (total %zu)\n", y_true.size());

  const auto cm = confusion(y_true, y_pred, model.k);
  const auto report = metrics(cm);
  std::fputs(metrics_summary(report, names).c_str(), stdout);

  long majority = 0;
  for (const auto& [cls, cnt] : truth_counts)
    majority = std::max(majority, cnt);
  std::printf("majority baseline %.3f\n",
              static_cast<double>(majority) /
                  static_cast<double>(y_true.size()));
  if (!confusion_path.empty()) write_confusion_csv(cm, names, confusion_path);
  return 0;
}

int run_agree(const std::vector<std::string>& paths) {
  std::vector<LabelSet> sets;
  for (const auto& p : paths)
    for (auto& s : read_labels(p)) sets.push_back(std::move(s));
  if (sets.size() < 2)
    throw CoverageError("agree needs at least two observer label sets");

  // All observers must rate the same passes; ratings are compared in
  // ascending pass-index order.
  std::vector<std::vector<int>> codes;
  for (const auto& s : sets) {
    if (s.ratings.size() != sets.front().ratings.size())
      throw CoverageError("observer '" + s.observer +
                          "' covers a different pass set");
    std::vector<int> v;
    for (const auto& [idx, r] : s.ratings) {
      if (!sets.front().ratings.count(idx))
        throw CoverageError("observer '" + s.observer +
                            "' covers a different pass set");
      v.push_back(code(r));
    }
    codes.push_back(std::move(v));
  }
  const auto km = kappa_matrix(codes);
  std::printf("%-12s", "kappa");
  for (const auto& s : sets) std::printf(" %10s", s.observer.c_str());
  std::printf("\n");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::printf("%-12s", sets[i].observer.c_str());
    for (std::size_t j = 0; j < sets.size(); ++j)
      std::printf(" %10.3f", km[i][j]);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"passrate: rate football passes from spatiotemporal data"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key = value configuration file");
  app.failure_message(CLI::FailureMessage::help);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic match");
  unsigned gen_seed = 42;
  int gen_players = 11, gen_steps = 6000;
  double gen_pass_rate = 0.005, gen_noise = 0.1;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--players", gen_players, "Players per team")
      ->check(CLI::Range(1, 11))
      ->capture_default_str();
  gen->add_option("--steps", gen_steps, "Duration in 10 Hz steps")
      ->check(CLI::Range(100, 200000))
      ->capture_default_str();
  gen->add_option("--pass-rate", gen_pass_rate,
                  "Per-step pass attempt probability")
      ->check(CLI::Range(0.0, 0.05))
      ->capture_default_str();
  gen->add_option("--noise", gen_noise, "Observer label noise probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output match directory")->required();

  // validate
  auto* val = app.add_subcommand("validate", "Check a match directory");
  std::string val_dir;
  val->add_option("dir", val_dir, "Match directory")->required();

  // render
  auto* ren = app.add_subcommand("render", "Render a dominant subdivision");
  std::string ren_dir, ren_out;
  int ren_step = 0;
  bool ren_oracle = false;
  ModelFlags ren_flags;
  ren->add_option("dir", ren_dir, "Match directory")->required();
  ren->add_option("--step", ren_step, "Time step to render")
      ->capture_default_str();
  ren->add_flag("--grid-oracle", ren_oracle,
                "Overlay grid-oracle disagreement cells");
  add_model_flags(ren, ren_flags);
  ren->add_option("--out", ren_out, "Output SVG file")->required();

  // featurize
  auto* fea = app.add_subcommand("featurize", "Extract per-pass features");
  std::string fea_dir, fea_out;
  ModelFlags fea_flags;
  fea->add_option("dir", fea_dir, "Match directory")->required();
  add_model_flags(fea, fea_flags);
  fea->add_option("--out", fea_out, "Output feature CSV")->required();

  // train
  auto* tra = app.add_subcommand("train", "Train a pass-rating classifier");
  std::string tra_features, tra_labels, tra_out;
  std::string tra_risk = "mle", tra_norm = "l2", tra_scheme = "six";
  double tra_lambda = 0;
  int tra_holdout_seed = 0;
  unsigned tra_cv_seed = 1;
  tra->add_option("features", tra_features, "Feature CSV")->required();
  tra->add_option("labels", tra_labels, "Labels CSV")->required();
  tra->add_option("--risk", tra_risk, "Empirical risk")
      ->check(CLI::IsMember({"mle", "arith", "quad"}))
      ->capture_default_str();
  tra->add_option("--norm", tra_norm, "Regularization norm")
      ->check(CLI::IsMember({"l1", "l2"}))
      ->capture_default_str();
  auto* tra_lambda_opt = tra->add_option(
      "--lambda", tra_lambda, "Regularization weight (omit for tenfold CV)");
  tra_lambda_opt->check(CLI::NonNegativeNumber);
  tra->add_option("--scheme", tra_scheme, "Label scheme")
      ->check(CLI::IsMember({"six", "three"}))
      ->capture_default_str();
  auto* tra_holdout_opt = tra->add_option(
      "--holdout-seed", tra_holdout_seed,
      "Exclude a stratified 20% holdout drawn with this seed");
  tra->add_option("--cv-seed", tra_cv_seed, "Cross-validation fold seed")
      ->capture_default_str();
  tra->add_option("--out", tra_out, "Output model file")->required();

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "Score a model against labels");
  std::string eva_model, eva_features, eva_labels, eva_confusion;
  int eva_holdout_seed = 0;
  eva->add_option("model", eva_model, "Model file")->required();
  eva->add_option("features", eva_features, "Feature CSV")->required();
  eva->add_option("labels", eva_labels, "Labels CSV")->required();
  auto* eva_holdout_opt = eva->add_option(
      "--holdout-seed", eva_holdout_seed,
      "Evaluate only the stratified 20% holdout drawn with this seed");
  eva->add_option("--confusion-out", eva_confusion,
                  "Also write the confusion matrix CSV here");

  // agree
  auto* agr = app.add_subcommand("agree", "Inter-observer kappa matrix");
  std::vector<std::string> agr_paths;
  agr->add_option("labels", agr_paths, "Two or more label CSVs")
      ->expected(-2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen)
      return run_generate(gen_seed, gen_players, gen_steps, gen_pass_rate,
                          gen_noise, gen_out);
    if (*val) return run_validate(val_dir);
    if (*ren)
      return run_render(ren_dir, ren_step, ren_flags, ren_oracle, ren_out);
    if (*fea) return run_featurize(fea_dir, fea_flags, fea_out);
    if (*tra)
      return run_train(tra_features, tra_labels, tra_risk, tra_norm,
                       tra_lambda, tra_lambda_opt->count() > 0, tra_scheme,
                       tra_holdout_seed, tra_holdout_opt->count() > 0,
                       tra_cv_seed, tra_out);
    if (*eva)
      return run_evaluate(eva_model, eva_features, eva_labels,
                          eva_holdout_seed, eva_holdout_opt->count() > 0,
                          eva_confusion);
    if (*agr) return run_agree(agr_paths);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
