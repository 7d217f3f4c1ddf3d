#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "passrate/features.hpp"

using namespace passrate;
using geom::Vec2;

namespace {

const std::string kDir = "features_tmp";

void write_file(const std::string& name, const std::string& content) {
  std::filesystem::create_directories(kDir);
  std::ofstream out(kDir + "/" + name);
  out << content;
}

// Same 3-player fixture as the match-data tests: player 1 walks up the y
// axis at 1 m/s, players 2 and 101 stand still; one pass from 1 to 2.
void write_basic_fixture(const std::string& events =
                             "step,kind,player1,player2\n"
                             "0,StartOfHalf,,\n"
                             "2,Touch,1,\n"
                             "10,Pass,1,\n"
                             "20,Touch,2,\n"
                             "28,Shot,2,\n") {
  std::string traj = "step,player_id,x,y\n";
  for (int s = 0; s < 30; ++s) {
    traj += std::to_string(s) + ",1,0.000," + format_coord(s * 0.1) + "\n";
    traj += std::to_string(s) + ",2,10.000,0.000\n";
    traj += std::to_string(s) + ",101,-10.000,5.000\n";
  }
  write_file("trajectories.csv", traj);
  write_file("events.csv", events);
  write_file("teams.csv", "player_id,team\n1,HOME\n2,HOME\n101,AWAY\n");
}

std::size_t column(const std::string& name) {
  const auto& catalog = feature_catalog();
  for (std::size_t c = 0; c < catalog.size(); ++c)
    if (catalog[c].name == name) return c;
  REQUIRE(false);
  return 0;
}

}  // namespace

TEST_CASE("feature catalog: 25 uniquely named entries") {
  const auto& catalog = feature_catalog();
  CHECK(catalog.size() == 25);
  std::set<std::string> names;
  std::map<FeatureCategory, int> per_cat;
  for (const auto& e : catalog) {
    names.insert(e.name);
    ++per_cat[e.category];
  }
  CHECK(names.size() == catalog.size());
  CHECK(per_cat[FeatureCategory::BasicGeometric] == 9);
  CHECK(per_cat[FeatureCategory::Sequential] == 6);
  CHECK(per_cat[FeatureCategory::Physiological] == 4);
  CHECK(per_cat[FeatureCategory::Strategic] == 6);
  CHECK(std::string(kCatalogVersion) == "pass-features-v1");
}

TEST_CASE("basic geometric features match hand-computed values") {
  write_basic_fixture();
  const auto ds = load_match_dir(kDir);
  const auto passes = extract_passes(ds);
  REQUIRE(passes.size() == 1);
  FeatureConfig cfg;
  const auto fv = compute_features(ds, passes[0], cfg);
  REQUIRE(fv.values.size() == feature_catalog().size());

  // Pass leaves (0, 1) at step 10, received at (10, 0) at step 20 (1.0 s).
  const double dist = std::sqrt(101.0);
  CHECK(fv.values[column("pass_distance")] == doctest::Approx(dist));
  CHECK(fv.values[column("pass_ball_speed")] == doctest::Approx(dist / 1.0));
  // Home attacks +x in the first half; the pass vector is (10, -1).
  CHECK(fv.values[column("pass_angle_to_attack")] ==
        doctest::Approx(std::acos(10.0 / dist)));
  CHECK(fv.values[column("passer_speed")] == doctest::Approx(1.0));
  CHECK(fv.values[column("passer_dist_nearest_opponent")] ==
        doctest::Approx(std::sqrt(116.0)));  // opponent at (-10, 5)
  CHECK(fv.values[column("receiver_dist_nearest_opponent")] ==
        doctest::Approx(std::sqrt(425.0)));
  CHECK(fv.values[column("passer_dist_to_opponent_goal")] ==
        doctest::Approx(std::sqrt(52.5 * 52.5 + 1.0)));
  CHECK(fv.values[column("end_point_dist_to_opponent_goal")] ==
        doctest::Approx(42.5));
  CHECK(fv.values[column("pass_lateral_position")] == doctest::Approx(1.0));
  for (std::size_t c = 0; c < fv.mask.size(); ++c) CHECK(fv.mask[c]);
}

TEST_CASE("sequential features count events and durations") {
  write_basic_fixture();
  const auto ds = load_match_dir(kDir);
  const auto passes = extract_passes(ds);
  FeatureConfig cfg;
  const auto fv = compute_features(ds, passes[0], cfg);

  // Player 1's run: Touch@2 then Pass@10 -> 2nd event of the run.
  CHECK(fv.values[column("ordinal_in_player_possession")] ==
        doctest::Approx(2.0));
  // All touches are by the home team -> same ordinal in the team run.
  CHECK(fv.values[column("ordinal_in_team_possession")] ==
        doctest::Approx(2.0));
  // The play covers every event incl. StartOfHalf -> pass is 3rd.
  CHECK(fv.values[column("ordinal_in_play_possession")] ==
        doctest::Approx(3.0));
  // Team run started with the touch at step 2; pass at step 10 at 10 Hz.
  CHECK(fv.values[column("team_possession_duration")] ==
        doctest::Approx(0.8));
  CHECK(fv.values[column("play_possession_events")] == doctest::Approx(3.0));
  // The team run ends with a shot.
  CHECK(fv.values[column("sequence_outcome_is_shot_or_goal")] ==
        doctest::Approx(1.0));
}

TEST_CASE("physiological features agree with direct reach times") {
  write_basic_fixture();
  const auto ds = load_match_dir(kDir);
  const auto passes = extract_passes(ds);
  FeatureConfig cfg;
  const auto fv = compute_features(ds, passes[0], cfg);

  const auto& pass = passes[0];
  const auto opp = player_state(ds, 101, 10, cfg.facing);
  const Vec2 mid = (pass.start_point + pass.end_point) / 2;
  CHECK(fv.values[column("min_opponent_time_to_midpoint")] ==
        doctest::Approx(std::min(
            reach_time(cfg.model, opp, mid, cfg.grid, cfg.n_sides),
            cfg.grid.tau_max)));
  CHECK(fv.values[column("min_opponent_time_to_end_point")] ==
        doctest::Approx(std::min(reach_time(cfg.model, opp, pass.end_point,
                                            cfg.grid, cfg.n_sides),
                                 cfg.grid.tau_max)));
  // The lone opponent is >= 10 m from the lane but the ball flies 1 s.
  CHECK(fv.values[column("opponents_able_to_intercept")] ==
        doctest::Approx(0.0));
  // The receiver already stands on the end point.
  CHECK(fv.values[column("receiver_time_to_end_point")] ==
        doctest::Approx(cfg.grid.tau_step));
}

TEST_CASE("strategic features partition the pitch") {
  write_basic_fixture();
  const auto ds = load_match_dir(kDir);
  const auto passes = extract_passes(ds);
  FeatureConfig cfg;
  const auto fv = compute_features(ds, passes[0], cfg);

  CHECK(fv.values[column("passer_region_area")] > 0);
  CHECK(fv.values[column("receiver_region_area")] > 0);
  const double share = fv.values[column("team_pitch_share")];
  CHECK(share > 0.5);  // two home players vs one away
  CHECK(share < 1.0);
  CHECK(std::abs(fv.values[column("team_pitch_share_change")]) < 0.2);
  CHECK(fv.values[column("team_area_attacking_half")] > 0);
  CHECK(fv.values[column("team_area_attacking_half")] <=
        ds.pitch.area() / 2 + 1.0);
  // The lane from (0,1) to (10,0) stays far from the away player's region.
  CHECK(fv.values[column("opposing_regions_crossed")] ==
        doctest::Approx(0.0));
}

TEST_CASE("pass with no reception masks the dependent features") {
  write_basic_fixture(
      "step,kind,player1,player2\n"
      "2,Touch,1,\n"
      "10,Pass,1,\n");
  const auto ds = load_match_dir(kDir);
  const auto passes = extract_passes(ds);
  REQUIRE(passes.size() == 1);
  FeatureConfig cfg;
  const auto fv = compute_features(ds, passes[0], cfg);
  for (const char* name :
       {"pass_ball_speed", "receiver_dist_nearest_opponent",
        "receiver_time_to_end_point", "receiver_region_area",
        "team_pitch_share_change"}) {
    CAPTURE(name);
    CHECK(!fv.mask[column(name)]);
    CHECK(std::isnan(fv.values[column(name)]));
  }
  CHECK(fv.mask[column("pass_distance")]);
  // Without a receive step the assumed ball speed bounds the flight time.
  CHECK(fv.mask[column("opponents_able_to_intercept")]);
}

TEST_CASE("no opponents on the pitch masks opponent features") {
  write_basic_fixture();
  write_file("teams.csv", "player_id,team\n1,HOME\n2,HOME\n101,HOME\n");
  const auto ds = load_match_dir(kDir);
  const auto passes = extract_passes(ds);
  FeatureConfig cfg;
  const auto fv = compute_features(ds, passes[0], cfg);
  for (const char* name :
       {"passer_dist_nearest_opponent", "receiver_dist_nearest_opponent",
        "min_opponent_time_to_midpoint", "min_opponent_time_to_end_point",
        "opponents_able_to_intercept"}) {
    CAPTURE(name);
    CHECK(!fv.mask[column(name)]);
  }
  CHECK(fv.values[column("team_pitch_share")] > 0.9);
  CHECK(fv.values[column("team_pitch_share")] < 1.2);
}

TEST_CASE("column stats and standardization") {
  FeatureMatrix m;
  const std::size_t n = feature_catalog().size();
  auto row = [&](double v0, double v1, bool mask1) {
    FeatureVector fv;
    fv.values.assign(n, 5.0);  // constant filler -> zero variance
    fv.mask.assign(n, true);
    fv.values[0] = v0;
    fv.values[1] = v1;
    fv.mask[1] = mask1;
    return fv;
  };
  m.rows = {row(1.0, 10.0, true), row(3.0, 20.0, true), row(5.0, 99.0, false)};

  const auto stats = column_stats(m);
  CHECK(stats[0].mean == doctest::Approx(3.0));
  CHECK(stats[0].stddev == doctest::Approx(std::sqrt(8.0 / 3.0)));
  // Masked entry excluded: mean of {10, 20}.
  CHECK(stats[1].mean == doctest::Approx(15.0));
  CHECK(stats[1].stddev == doctest::Approx(5.0));
  CHECK(stats[2].stddev == doctest::Approx(0.0));

  const auto z = standardize(m);
  CHECK(z.rows[0].values[0] ==
        doctest::Approx((1.0 - 3.0) / std::sqrt(8.0 / 3.0)));
  CHECK(z.rows[2].values[1] == doctest::Approx(0.0));  // masked -> mean -> 0
  CHECK(z.rows[0].values[2] == doctest::Approx(0.0));  // zero variance -> 0
  double sum0 = 0;
  for (const auto& r : z.rows) sum0 += r.values[0];
  CHECK(sum0 == doctest::Approx(0.0));

  FeatureMatrix tiny;
  tiny.rows = {row(1.0, 2.0, true)};
  CHECK_THROWS_AS(standardize(tiny), TooFewExamplesError);
}

TEST_CASE("feature matrix file round trip") {
  write_basic_fixture();
  const auto ds = load_match_dir(kDir);
  const auto passes = extract_passes(ds);
  FeatureConfig cfg;
  auto m = feature_matrix(ds, passes, cfg);
  m.rows[0].mask[3] = false;
  m.rows[0].values[3] = std::numeric_limits<double>::quiet_NaN();

  const std::string path = kDir + "/features.csv";
  write_feature_matrix(m, path);
  const auto back = read_feature_matrix(path);
  REQUIRE(back.rows.size() == m.rows.size());
  CHECK(back.catalog_version == m.catalog_version);
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    CHECK(back.rows[r].pass_index == m.rows[r].pass_index);
    for (std::size_t c = 0; c < m.rows[r].values.size(); ++c) {
      CHECK(back.rows[r].mask[c] == m.rows[r].mask[c]);
      if (m.rows[r].mask[c])
        CHECK(back.rows[r].values[c] == m.rows[r].values[c]);
    }
  }

  // Writing the re-read matrix is byte-identical.
  write_feature_matrix(back, kDir + "/features2.csv");
  std::ifstream a(path), b(kDir + "/features2.csv");
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
  CHECK(!sa.empty());

  CHECK_THROWS_AS(read_feature_matrix(kDir + "/nope.csv"), SchemaError);
  write_file("bad.csv", "pass_index,only_one\n0,1\n");
  CHECK_THROWS_AS(read_feature_matrix(kDir + "/bad.csv"), SchemaError);
}
