#include <set>

#include "doctest.h"
#include "dpmf/data.hpp"
#include "dpmf/error.hpp"

using namespace dpmf;

namespace {

const std::string kCsv =
    "date,season,home_team,away_team,home_score,away_score,home_spread,over_under\n"
    "2003-01-08,2002,Bulls,Hawks,101,97,-3.5,199\n"
    "2002-11-01,2002,Hawks,Bulls,88,93,,\n"
    "2003-11-03,2003,Hawks,Celtics,110.5,104,2,210\n";

}  // namespace

TEST_CASE("dates") {
  CHECK(format_date(parse_date("2004-02-29")) == "2004-02-29");
  CHECK((parse_date("2003-01-08") - parse_date("2002-11-01")).count() == 68);
  CHECK_THROWS_AS(parse_date("2003-02-29"), DomainError);
  CHECK_THROWS_AS(parse_date("2003/01/08"), DomainError);
}

TEST_CASE("games CSV parses, sorts and assigns weeks") {
  const auto g = parse_games_csv(kCsv);
  REQUIRE(g.size() == 3);
  CHECK(g[0].home_team == "Hawks");
  CHECK(g[0].week == 0.0);
  CHECK(g[1].week == doctest::Approx(68.0 / 7.0));
  CHECK_FALSE(g[0].has_lines());
  CHECK(g[1].has_lines());
  CHECK(*g[1].home_spread == -3.5);
  CHECK(g[2].home_score == 110.5);
  const auto shifted = parse_games_csv(kCsv, parse_date("2002-10-25"));
  CHECK(shifted[0].week == 1.0);
}

TEST_CASE("games CSV round trip") {
  const auto g = parse_games_csv(kCsv);
  const std::string text = games_to_csv(g);
  const auto back = parse_games_csv(text);
  REQUIRE(back.size() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(back[i].date == g[i].date);
    CHECK(back[i].home_team == g[i].home_team);
    CHECK(back[i].away_score == g[i].away_score);
    CHECK(back[i].over_under == g[i].over_under);
  }
  CHECK(games_to_csv(back) == text);
}

TEST_CASE("malformed game files") {
  const std::string header = std::string(kGamesCsvHeader) + "\n";
  CHECK_THROWS_AS(parse_games_csv("date,season\n"), ParseError);
  CHECK_THROWS_AS(parse_games_csv(header + "2003-01-08,2002,A,B,1,2,,\n2003-01-09,2002,A,B,1\n"), ParseError);
  CHECK_THROWS_AS(parse_games_csv(header + "2003-01-08,2002,A,B,x,2,,\n"), ParseError);
  CHECK_THROWS_AS(parse_games_csv(header + "2003-13-08,2002,A,B,1,2,,\n"), ParseError);
  CHECK_THROWS_AS(parse_games_csv(header + "2003-01-08,2002,A,A,1,2,,\n"), ValidationError);
  CHECK_THROWS_AS(parse_games_csv(header + "2003-01-08,2002,A,B,-1,2,,\n"), ValidationError);
  CHECK_THROWS_AS(parse_games_csv(header + "2003-01-08,2002,A,B,1,2,,\n2003-01-08,2002,A,B,3,4,,\n"), ValidationError);
  try {
    parse_games_csv(header + "2003-01-08,2002,A,B,1,2,,\n2003-01-09,2002,A,B,1\n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(load_games("/nonexistent/games.csv"), IoError);
}

TEST_CASE("teams, calendar and model games") {
  const auto g = parse_games_csv(kCsv);
  const auto teams = team_table(g);
  CHECK(teams == std::vector<std::string>{"Bulls", "Celtics", "Hawks"});
  CHECK(team_index(teams, "Hawks") == 2);
  CHECK_THROWS_AS(team_index(teams, "Knicks"), IndexError);
  const SeasonCalendar cal = calendar_from_games(g);
  REQUIRE(cal.boundaries.size() == 1);
  CHECK(cal.boundaries[0].season_end_week == g[1].week);
  CHECK(cal.boundaries[0].next_season_start_week == g[2].week);
  const std::vector<std::size_t> keys{10, 11, 12};
  const auto mg = to_model_games(g, teams, keys);
  CHECK(mg[1].home == 0);
  CHECK(mg[1].away == 2);
  CHECK(mg[2].key == 12);
}

TEST_CASE("rolling blocks cover each season without leakage") {
  SynthConfig sc;
  sc.n_teams = 6;
  sc.n_seasons = 4;
  sc.season_weeks = 10.0;
  const auto games = synth_generate(sc).games;
  const auto blocks = make_rolling_blocks(games, 4.0, 2);
  std::set<std::size_t> tested;
  for (const auto& b : blocks) {
    CHECK(b.block_end_week - b.block_start_week == 4.0);
    for (std::size_t i : b.test_games) {
      CHECK(games[i].season == b.season);
      CHECK(games[i].week >= b.block_start_week);
      CHECK(games[i].week < b.block_end_week);
      CHECK(tested.insert(i).second);
    }
    for (std::size_t i : b.train_games) {
      CHECK(games[i].week < b.block_start_week);
      CHECK(games[i].season >= b.season - 2);
    }
  }
  CHECK(tested.size() == games.size());
  // Ten-week seasons split 4 + 4 + short final block.
  int first_season_blocks = 0;
  for (const auto& b : blocks) first_season_blocks += b.season == blocks.front().season;
  CHECK(first_season_blocks == 3);
  CHECK(blocks.front().train_games.empty());
  // The fourth season's training window drops the first.
  for (const auto& b : blocks)
    if (b.season == blocks.back().season)
      for (std::size_t i : b.train_games) CHECK(games[i].season != blocks.front().season);
  CHECK_THROWS_AS(make_rolling_blocks(games, 0.0, 2), ConfigError);
}

TEST_CASE("expert predictions from spread and total") {
  const auto [away, home] = expert_prediction(-4.0, 200.0);
  CHECK(away == 98.0);
  CHECK(home == 102.0);
  const auto e = expert_prediction(-4.0, 210.0);
  CHECK(e[0] + e[1] == 210.0);
  CHECK(e[0] - e[1] == -4.0);
  GameRecord r;
  CHECK_FALSE(expert_scores(r).has_value());
  r.home_spread = 6.0;
  r.over_under = 190.0;
  const auto s = expert_scores(r);
  REQUIRE(s.has_value());
  CHECK((*s)[0] == 92.0);
  CHECK((*s)[1] == 98.0);
}

TEST_CASE("synthetic data is a function of the seed") {
  SynthConfig sc;
  sc.seed = 9;
  sc.with_lines = true;
  const auto a = synth_generate(sc), b = synth_generate(sc);
  CHECK(games_to_csv(a.games) == games_to_csv(b.games));
  REQUIRE(a.expected.size() == a.games.size());
  CHECK(a.calendar.boundaries.size() == static_cast<std::size_t>(sc.n_seasons - 1));
  for (const auto& g : a.games) CHECK(g.has_lines());
  sc.seed = 10;
  CHECK(games_to_csv(synth_generate(sc).games) != games_to_csv(a.games));
  // Expected scores sit near the requested average.
  double mean = 0;
  for (const auto& y : a.expected) mean += 0.5 * (y[0] + y[1]);
  mean /= static_cast<double>(a.expected.size());
  CHECK(mean > 50.0);
  CHECK(mean < 150.0);
}
