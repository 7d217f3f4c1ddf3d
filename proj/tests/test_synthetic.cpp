#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "passrate/synthetic.hpp"

using namespace passrate;
using geom::Vec2;

namespace {

const std::string kDir = "synthetic_tmp";

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  SynthConfig cfg;
  cfg.duration_steps = 1500;
  const auto a = generate_match(cfg);
  const auto b = generate_match(cfg);
  write_match(a, kDir + "_a");
  write_match(b, kDir + "_b");
  cfg.seed = 43;
  write_match(generate_match(cfg), kDir + "_c");
  for (const char* f : {"trajectories.csv", "events.csv", "teams.csv"}) {
    CAPTURE(f);
    CHECK(slurp(kDir + "_a/" + std::string(f)) ==
          slurp(kDir + "_b/" + std::string(f)));
  }
  CHECK(slurp(kDir + "_a/events.csv") != slurp(kDir + "_c/events.csv"));
}

TEST_CASE("generated match survives a write/load round trip") {
  SynthConfig cfg;
  cfg.duration_steps = 1500;
  const auto ds = generate_match(cfg);
  write_match(ds, kDir + "_rt");
  const auto back = load_match_dir(kDir + "_rt");  // runs integrity checks
  CHECK(back.players.size() == ds.players.size());
  CHECK(back.events.size() == ds.events.size());
  CHECK(back.clock.max_step == ds.clock.max_step);
}

TEST_CASE("generated match is physically and structurally plausible") {
  SynthConfig cfg;  // defaults: 22 players, 6000 steps
  const auto ds = generate_match(cfg);

  CHECK(ds.players.size() == 22);
  int home = 0, away = 0;
  for (int id : ds.players)
    (ds.team_of(id) == Team::Home ? home : away)++;
  CHECK(home == 11);
  CHECK(away == 11);

  // Two halves are marked.
  int starts = 0, ends = 0;
  int prev_step = -1;
  for (const auto& e : ds.events) {
    CHECK(e.step >= prev_step);  // sorted
    prev_step = e.step;
    if (e.kind == EventKind::StartOfHalf) ++starts;
    if (e.kind == EventKind::EndOfHalf) ++ends;
  }
  CHECK(starts == 2);
  CHECK(ends == 2);

  // Every sample stays on the pitch and below the speed cap.
  const double cap = 12.0 * ds.clock.dt() + 1e-9;
  for (const auto& [id, tr] : ds.trajectories) {
    REQUIRE(tr.samples.size() == static_cast<std::size_t>(cfg.duration_steps));
    for (std::size_t s = 0; s < tr.samples.size(); ++s) {
      const Vec2 p = tr.samples[s];
      CHECK(std::abs(p.x) <= ds.pitch.half_length);
      CHECK(std::abs(p.y) <= ds.pitch.half_width);
      if (s > 0) CHECK(geom::dist(p, tr.samples[s - 1]) <= cap);
    }
  }

  // Enough passes for training experiments, mostly completed.
  const auto passes = extract_passes(ds);
  CHECK(passes.size() >= 15);
  std::size_t completed = 0;
  for (const auto& p : passes) {
    if (p.completed) ++completed;
    if (p.receive_step) {
      CHECK(*p.receive_step > p.pass_event.step);
      CHECK(*p.receive_step - p.pass_event.step <= 30);
    }
  }
  CHECK(completed > passes.size() / 2);
  CHECK(completed < passes.size());  // interceptions happen
}

TEST_CASE("planted rating reacts to pressure, length and completion") {
  SynthConfig cfg;
  cfg.duration_steps = 1500;
  const auto ds = generate_match(cfg);
  const auto passes = extract_passes(ds);
  REQUIRE(!passes.empty());

  PassRecord p = passes.front();
  PassRecord failed = p;
  failed.completed = false;
  // A turnover can only rate the same or worse (larger code).
  CHECK(code(planted_rating(ds, failed)) >= code(planted_rating(ds, p)));

  PassRecord longer = p;
  longer.end_point = p.start_point + (p.end_point - p.start_point) * 4.0;
  CHECK(code(planted_rating(ds, longer)) >= code(planted_rating(ds, p)));

  for (const auto& pass : passes) {
    const int c = code(planted_rating(ds, pass));
    CHECK(c >= 1);
    CHECK(c <= 6);
  }
}

TEST_CASE("observer labels follow the planted rule plus noise") {
  SynthConfig cfg;
  cfg.duration_steps = 3000;
  const auto ds = generate_match(cfg);
  const auto passes = extract_passes(ds);
  REQUIRE(passes.size() >= 5);

  const auto [clean1, clean2] = generate_labels(ds, passes, 0.0, 7);
  CHECK(clean1.observer == "obs1");
  CHECK(clean2.observer == "obs2");
  REQUIRE(clean1.ratings.size() == passes.size());
  for (const auto& pass : passes) {
    CHECK(clean1.ratings.at(pass.pass_index) == planted_rating(ds, pass));
    CHECK(clean2.ratings.at(pass.pass_index) == planted_rating(ds, pass));
  }

  const auto [noisy1, noisy2] = generate_labels(ds, passes, 0.5, 7);
  std::size_t moved = 0;
  for (const auto& pass : passes) {
    const int base = code(planted_rating(ds, pass));
    const int v1 = code(noisy1.ratings.at(pass.pass_index));
    const int v2 = code(noisy2.ratings.at(pass.pass_index));
    CHECK(std::abs(v1 - base) <= 1);
    CHECK(std::abs(v2 - base) <= 1);
    if (v1 != base || v2 != base) ++moved;
  }
  CHECK(moved > 0);

  // Label generation is deterministic per seed too.
  const auto [again1, _] = generate_labels(ds, passes, 0.5, 7);
  CHECK(again1.ratings == noisy1.ratings);
}
