#include "dpmf/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dpmf/error.hpp"

namespace dpmf {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& s, const char* field, long line) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ParseError(std::string("bad ") + field + " '" + s + "'", line);
  return v;
}

int parse_int(const std::string& s, const char* field, long line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(std::string("bad ") + field + " '" + s + "'", line);
  return v;
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Date parse_date(const std::string& iso) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw DomainError("bad date '" + iso + "'");
  auto digits = [&](std::size_t pos, std::size_t len) {
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (iso[i] < '0' || iso[i] > '9') throw DomainError("bad date '" + iso + "'");
      v = v * 10 + static_cast<unsigned>(iso[i] - '0');
    }
    return v;
  };
  y = static_cast<int>(digits(0, 4));
  m = digits(5, 2);
  d = digits(8, 2);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw DomainError("invalid calendar date '" + iso + "'");
  return Date(ymd);
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

void assign_weeks(std::vector<GameRecord>& games, Date epoch) {
  for (auto& g : games) {
    const auto days = (g.date - epoch).count();
    if (days < 0) throw ValidationError("game dated " + format_date(g.date) + " precedes the epoch");
    g.week = static_cast<double>(days) / 7.0;
  }
}

std::vector<GameRecord> parse_games_csv(const std::string& text, std::optional<Date> epoch) {
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  std::vector<GameRecord> games;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header_seen) {
      if (trim(line) != kGamesCsvHeader) throw ParseError("unexpected header '" + line + "'", line_no);
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw ParseError("expected 8 fields, got " + std::to_string(f.size()), line_no);
    GameRecord g;
    try {
      g.date = parse_date(trim(f[0]));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line_no);
    }
    g.season = parse_int(trim(f[1]), "season", line_no);
    g.home_team = trim(f[2]);
    g.away_team = trim(f[3]);
    g.home_score = parse_real(trim(f[4]), "home_score", line_no);
    g.away_score = parse_real(trim(f[5]), "away_score", line_no);
    if (!trim(f[6]).empty()) g.home_spread = parse_real(trim(f[6]), "home_spread", line_no);
    if (!trim(f[7]).empty()) g.over_under = parse_real(trim(f[7]), "over_under", line_no);
    if (g.home_team.empty() || g.away_team.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty team name");
    if (g.home_team == g.away_team)
      throw ValidationError("line " + std::to_string(line_no) + ": team plays itself");
    if (g.home_score < 0.0 || g.away_score < 0.0)
      throw ValidationError("line " + std::to_string(line_no) + ": negative score");
    games.push_back(std::move(g));
  }
  if (!header_seen) throw ParseError("missing header", 1);

  std::stable_sort(games.begin(), games.end(), [](const GameRecord& a, const GameRecord& b) {
    if (a.date != b.date) return a.date < b.date;
    if (a.home_team != b.home_team) return a.home_team < b.home_team;
    return a.away_team < b.away_team;
  });
  for (std::size_t i = 1; i < games.size(); ++i) {
    const auto& a = games[i - 1];
    const auto& b = games[i];
    if (a.date == b.date && a.home_team == b.home_team && a.away_team == b.away_team)
      throw ValidationError("duplicate game " + a.home_team + " vs " + a.away_team + " on " + format_date(a.date));
  }
  if (!games.empty()) assign_weeks(games, epoch.value_or(games.front().date));
  return games;
}

std::vector<GameRecord> load_games(const std::filesystem::path& path, std::optional<Date> epoch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_games_csv(ss.str(), epoch);
}

std::string games_to_csv(std::span<const GameRecord> games) {
  std::string out = std::string(kGamesCsvHeader) + "\n";
  for (const auto& g : games) {
    out += format_date(g.date) + "," + std::to_string(g.season) + "," + g.home_team + "," + g.away_team + "," +
           format_real(g.home_score) + "," + format_real(g.away_score) + "," +
           (g.home_spread ? format_real(*g.home_spread) : "") + "," +
           (g.over_under ? format_real(*g.over_under) : "") + "\n";
  }
  return out;
}

void save_games(const std::filesystem::path& path, std::span<const GameRecord> games) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << games_to_csv(games);
}

SeasonCalendar calendar_from_games(std::span<const GameRecord> games, double true_gap_weeks) {
  std::map<int, std::pair<double, double>> span;  // season -> (first, last)
  for (const auto& g : games) {
    auto [it, inserted] = span.try_emplace(g.season, g.week, g.week);
    if (!inserted) {
      it->second.first = std::min(it->second.first, g.week);
      it->second.second = std::max(it->second.second, g.week);
    }
  }
  SeasonCalendar cal;
  cal.true_gap_weeks = true_gap_weeks;
  for (auto it = span.begin(); it != span.end(); ++it) {
    auto next = std::next(it);
    if (next == span.end()) break;
    if (!(it->second.second < next->second.first))
      throw ValidationError("seasons " + std::to_string(it->first) + " and " + std::to_string(next->first) + " overlap");
    cal.boundaries.push_back({it->second.second, next->second.first});
  }
  return cal;
}

std::vector<std::string> team_table(std::span<const GameRecord> games) {
  std::set<std::string> names;
  for (const auto& g : games) {
    names.insert(g.home_team);
    names.insert(g.away_team);
  }
  return {names.begin(), names.end()};
}

std::size_t team_index(const std::vector<std::string>& teams, const std::string& name) {
  const auto it = std::lower_bound(teams.begin(), teams.end(), name);
  if (it == teams.end() || *it != name) throw IndexError("unknown team '" + name + "'");
  return static_cast<std::size_t>(it - teams.begin());
}

std::vector<Game> to_model_games(std::span<const GameRecord> games, const std::vector<std::string>& teams,
                                 std::span<const std::size_t> keys) {
  if (keys.size() != games.size()) throw DomainError("to_model_games: key count mismatch");
  std::vector<Game> out;
  out.reserve(games.size());
  for (std::size_t i = 0; i < games.size(); ++i) {
    const auto& r = games[i];
    Game g;
    g.home = team_index(teams, r.home_team);
    g.away = team_index(teams, r.away_team);
    g.week = r.week;
    g.home_score = r.home_score;
    g.away_score = r.away_score;
    g.key = keys[i];
    out.push_back(g);
  }
  return out;
}

std::vector<RollingBlock> make_rolling_blocks(std::span<const GameRecord> games, double block_weeks,
                                              int previous_seasons) {
  if (!(block_weeks > 0.0)) throw ConfigError("block length must be positive");
  std::map<int, std::vector<std::size_t>> by_season;
  for (std::size_t i = 0; i < games.size(); ++i) by_season[games[i].season].push_back(i);

  std::vector<RollingBlock> blocks;
  for (const auto& [season, members] : by_season) {
    double first = games[members.front()].week;
    double last = first;
    for (std::size_t i : members) {
      first = std::min(first, games[i].week);
      last = std::max(last, games[i].week);
    }
    std::size_t b = 0;
    for (double start = first; start <= last; start = first + block_weeks * static_cast<double>(++b)) {
      RollingBlock block;
      block.season = season;
      block.index_in_season = b;
      block.block_start_week = start;
      block.block_end_week = start + block_weeks;
      for (std::size_t i : members)
        if (games[i].week >= block.block_start_week && games[i].week < block.block_end_week)
          block.test_games.push_back(i);
      if (block.test_games.empty()) continue;
      for (std::size_t i = 0; i < games.size(); ++i) {
        const auto& g = games[i];
        if (g.week < block.block_start_week && g.season <= season && g.season >= season - previous_seasons)
          block.train_games.push_back(i);
      }
      for (std::size_t i : block.train_games)
        if (!(games[i].week < block.block_start_week))
          throw ValidationError("rolling block trains on data at or after its start");
      blocks.push_back(std::move(block));
    }
  }
  return blocks;
}

std::array<double, 2> expert_prediction(double home_spread, double over_under) {
  return {(over_under + home_spread) / 2.0, (over_under - home_spread) / 2.0};
}

std::optional<ScorePair> expert_scores(const GameRecord& game) {
  if (!game.has_lines()) return std::nullopt;
  const auto [away, home] = expert_prediction(*game.home_spread, *game.over_under);
  return ScorePair{home, away};
}

}  // namespace dpmf
