#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "koalition/config.hpp"
#include "koalition/date.hpp"
#include "koalition/error.hpp"
#include "koalition/forecast.hpp"
#include "koalition/poe_engine.hpp"
#include "koalition/poll_ingest.hpp"
#include "koalition/pooling.hpp"
#include "koalition/posterior.hpp"
#include "koalition/report.hpp"
#include "koalition/viz.hpp"

namespace koalition::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kConfigError = 3 };

struct Options {
  std::string polls;
  std::string config;
  std::string as_of;
  std::uint64_t seed = 42;
  std::size_t draws = 0;  // 0: take it from the config
  std::string out;
  std::string election_date;
  std::string figure;
  std::string coalition;
  std::size_t k = 6;
  int grid_days = 7;
  std::size_t max_ridges = 10;
  bool linear_axis = false;
  unsigned threads = 0;
};

namespace detail {

/// Error tied to an input file, reported with its path.
struct FileError {
  std::string file;
  int line = 0;
};

inline std::string read_file(const std::string& path, bool is_config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (is_config) throw ConfigError("unreadable", "cannot read config file '" + path + "'");
    throw DataError("unreadable", "cannot read file '" + path + "'");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Date parse_date_flag(const std::string& text, const char* flag) {
  auto d = Date::parse(text);
  if (!d) throw DataError("bad-date", std::string("malformed ") + flag + " '" + text + "'");
  return *d;
}

inline void emit(const Options& opt, const std::string& payload, std::ostream& out) {
  if (opt.out.empty()) {
    out << payload;
    return;
  }
  std::ofstream file(opt.out, std::ios::binary);
  if (!file) throw DataError("unwritable", "cannot write '" + opt.out + "'");
  file << payload;
}

inline void error_line(std::ostream& err, const std::string& code, const std::string& message,
                       const std::optional<FileError>& where = std::nullopt,
                       const std::string& usage = {}) {
  Json j{{"error", code}, {"message", message}};
  if (where) {
    j["file"] = where->file;
    if (where->line > 0) j["line"] = where->line;
  }
  if (!usage.empty()) j["usage"] = usage;
  err << j.dump() << "\n";
}

/// Everything a subcommand needs once the input files are read.
struct Session {
  Options opt;
  Config config;
  std::vector<Poll> polls;
  Date as_of;
  std::size_t m = 0;
  Parallelism par;

  const NamedCoalition& coalition() const {
    return opt.coalition.empty() ? config.coalitions.front() : config.coalition(opt.coalition);
  }

  Provenance provenance(std::size_t draws) const { return {opt.seed, draws, as_of}; }

  Date election_date() const {
    if (opt.election_date.empty()) {
      throw Error("missing-election-date", "--election-date is required here");
    }
    return parse_date_flag(opt.election_date, "--election-date");
  }

  DirichletPosterior nowcast(PooledSample* pooled_out = nullptr) const {
    auto pooled = pool(polls, as_of, config.model.pooling);
    auto post = posterior_from(pooled, config.registry,
                               config.model.prior_for(config.registry.size()));
    if (pooled_out) *pooled_out = std::move(pooled);
    return post;
  }

  /// Distinct poll dates up to as_of, newest `max_ridges` of them.
  std::vector<Date> series_dates() const {
    std::set<Date> unique;
    for (const auto& p : polls) {
      if (p.publish_date <= as_of) unique.insert(p.publish_date);
    }
    std::vector<Date> dates(unique.begin(), unique.end());
    if (dates.size() > opt.max_ridges) {
      dates.erase(dates.begin(), dates.end() - static_cast<std::ptrdiff_t>(opt.max_ridges));
    }
    return dates;
  }
};

inline Session open_session(const Options& opt) {
  Session s;
  s.opt = opt;
  s.par = Parallelism{opt.threads};
  s.config = parse_config(read_file(opt.config, true));
  if (!opt.coalition.empty()) (void)s.config.coalition(opt.coalition);
  s.polls = parse_polls(read_file(opt.polls, false), s.config.registry);
  if (s.polls.empty()) throw DataError("no-polls", "poll file has no rows");
  s.as_of = opt.as_of.empty() ? s.polls.back().publish_date : parse_date_flag(opt.as_of, "--as-of");
  s.m = opt.draws > 0 ? opt.draws : s.config.draws;
  return s;
}

inline std::string run_nowcast(const Session& s) {
  PooledSample pooled;
  const auto post = s.nowcast(&pooled);
  Json report = build_report({s.config, post, pooled, s.as_of, s.m, s.opt.seed, s.par});
  report["command"] = "nowcast";
  return report.dump(2) + "\n";
}

inline std::string run_forecast(const Session& s) {
  const ForecastSpec spec{s.election_date(), s.as_of, s.config.tau};
  spec.validate();
  PooledSample pooled;
  const auto now = s.nowcast(&pooled);
  const auto post = inflate(now, spec, s.config.model.prior_for(s.config.registry.size()));
  Json report = build_report({s.config, post, pooled, s.as_of, s.m, s.opt.seed, s.par});
  report["command"] = "forecast";
  report["election_date"] = spec.election_date.str();
  report["horizon_days"] = spec.horizon_days();
  report["tau"] = round6(spec.tau);
  report["shrink_factor"] = round6(shrink_factor(spec.horizon_days(), spec.tau));
  return report.dump(2) + "\n";
}

inline std::string run_parliaments(const Session& s) {
  if (s.opt.k < 1) throw Error("empty-request", "--k must be at least 1");
  const auto post = s.nowcast();
  const auto& coalition = s.coalition();
  const auto members = s.config.registry.indices_of(coalition.parties);
  Json list = Json::array();
  for (const auto& alloc : sample_parliaments(post, s.config.rules, s.opt.k, s.opt.seed)) {
    const int joint = coalition_seats(alloc, members);
    list.push_back({{"seats", to_json(alloc, s.config.registry)},
                    {"hung", alloc.hung()},
                    {"coalition", coalition.name},
                    {"coalition_seats", joint},
                    {"majority", has_majority(joint, s.config.rules)}});
  }
  Json report{{"command", "parliaments"}, {"as_of", s.as_of.str()}, {"seed", s.opt.seed},
              {"window_days", s.config.model.pooling.window_days}, {"parliaments", list}};
  return report.dump(2) + "\n";
}

inline std::string run_plot(const Session& s) {
  const Theme theme;
  const auto& reg = s.config.registry;
  const auto& fig = s.opt.figure;
  if (fig == "classic") {
    const Poll* latest = nullptr;
    for (const auto& p : s.polls) {
      if (p.publish_date <= s.as_of) latest = &p;
    }
    if (!latest) throw Error("no-polls", "no poll on or before " + s.as_of.str());
    return render_classic_bars(*latest, reg, theme, s.provenance(0)).xml;
  }
  if (fig == "poe-bars") {
    const auto post = s.nowcast();
    std::vector<EventSpec> events;
    for (const auto& c : s.config.coalitions) events.push_back(EventSpec::coalition(c.parties));
    const auto results = estimate_poe(post, s.config.rules, events, s.m, s.opt.seed, s.par);
    std::vector<CoalitionPoE> bars;
    for (std::size_t j = 0; j < results.size(); ++j) {
      bars.push_back({s.config.coalitions[j].name, s.config.coalitions[j].parties, results[j]});
    }
    return render_poe_bars(bars, reg, post.mean(), theme, s.provenance(s.m)).xml;
  }
  if (fig == "density") {
    const auto& c = s.coalition();
    const auto dist = seat_distribution(s.nowcast(), s.config.rules, c.parties, s.m, s.opt.seed,
                                        s.par);
    return render_seat_density(dist, theme, s.provenance(s.m), c.name).xml;
  }
  if (fig == "parliaments") {
    if (s.opt.k < 1) throw Error("empty-request", "--k must be at least 1");
    const auto allocs = sample_parliaments(s.nowcast(), s.config.rules, s.opt.k, s.opt.seed);
    return render_parliaments(allocs, s.coalition().parties, reg, theme, s.provenance(s.opt.k))
        .xml;
  }
  if (fig == "ridgeline" || fig == "poe-timeline" || fig == "forecast-ridgeline") {
    const auto& c = s.coalition();
    const auto dates = s.series_dates();
    Theme tall = theme;
    tall.height = 600.0;
    if (fig == "poe-timeline") {
      const auto series = poe_series(s.polls, reg, dates, s.config.rules,
                                     EventSpec::coalition(c.parties), s.config.model, s.m,
                                     s.opt.seed, s.par);
      return render_poe_timeline(series.points, theme, s.provenance(s.m), !s.opt.linear_axis)
          .xml;
    }
    const auto now = distribution_series(s.polls, reg, dates, s.config.rules, c.parties,
                                         s.config.model, s.m, s.opt.seed, s.par);
    if (fig == "ridgeline") return render_ridgeline(now.points, tall, s.provenance(s.m)).xml;
    const auto fc = forecast_distribution_series(s.polls, reg, dates, s.election_date(),
                                                 s.config.tau, s.config.rules, c.parties,
                                                 s.config.model, s.m, s.opt.seed, s.par);
    Theme wide = tall;
    wide.width = 1000.0;
    return render_forecast_ridgeline(now.points, fc.points, wide, s.provenance(s.m)).xml;
  }
  if (fig == "fan") {
    const ForecastSpec spec{s.election_date(), s.as_of, s.config.tau};
    const auto fan =
        fan_chart_data(s.polls, reg, spec, s.config.model, s.opt.grid_days, s.m, s.opt.seed, s.par);
    return render_fan_chart(fan, s.polls, reg, theme, s.provenance(s.m)).xml;
  }
  throw Error("bad-figure", "unknown figure '" + fig + "'");
}

}  // namespace detail

/// Entry point behind the `koalition` executable. Output goes to `out` (or
/// --out); every error is one JSON line on `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Poll-based nowcasts, forecasts and coalition majority probabilities", "koalition"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--polls", opt.polls, "Poll table (CSV)")->required();
    sub->add_option("--config", opt.config, "Run configuration (INI)")->required();
    sub->add_option("--as-of", opt.as_of, "Nowcast date YYYY-MM-DD (default: newest poll)");
    sub->add_option("--seed", opt.seed, "Random seed");
    sub->add_option("--draws", opt.draws, "Monte-Carlo draws (default: config)");
    sub->add_option("--out", opt.out, "Output file (default: stdout)");
    sub->add_option("--threads", opt.threads, "Worker threads (default: all cores)");
    sub->add_option("--coalition", opt.coalition, "Coalition name (default: first in config)");
  };
  auto* nowcast = app.add_subcommand("nowcast", "JSON nowcast report");
  add_common(nowcast);
  auto* forecast = app.add_subcommand("forecast", "JSON forecast report for election day");
  add_common(forecast);
  forecast->add_option("--election-date", opt.election_date, "Election day YYYY-MM-DD")
      ->required();
  auto* plot = app.add_subcommand("plot", "Render a figure as SVG");
  add_common(plot);
  plot->add_option("--figure", opt.figure, "Figure kind")
      ->required()
      ->check(CLI::IsMember({"classic", "poe-bars", "density", "parliaments", "ridgeline",
                             "poe-timeline", "fan", "forecast-ridgeline"}));
  plot->add_option("--election-date", opt.election_date, "Election day (fan, forecast-ridgeline)");
  plot->add_option("--k", opt.k, "Number of simulated parliaments");
  plot->add_option("--grid-days", opt.grid_days, "Fan chart time step in days");
  plot->add_option("--max-ridges", opt.max_ridges, "Most recent poll dates in ridgelines");
  plot->add_flag("--linear-axis", opt.linear_axis, "Linear instead of logit PoE axis");
  auto* parliaments = app.add_subcommand("parliaments", "JSON list of simulated parliaments");
  add_common(parliaments);
  parliaments->add_option("--k", opt.k, "Number of parliaments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    detail::error_line(err, "usage", e.what(), std::nullopt, app.help());
    return kUsage;
  }

  std::optional<detail::FileError> where;
  try {
    where = detail::FileError{opt.config, 0};
    auto session = detail::open_session(opt);
    where.reset();
    std::string payload;
    if (*nowcast) {
      payload = detail::run_nowcast(session);
    } else if (*forecast) {
      payload = detail::run_forecast(session);
    } else if (*plot) {
      payload = detail::run_plot(session);
    } else {
      payload = detail::run_parliaments(session);
    }
    detail::emit(opt, payload, out);
    return kOk;
  } catch (const ConfigError& e) {
    detail::error_line(err, e.code(), e.what(), detail::FileError{opt.config, 0});
    return kConfigError;
  } catch (const DataError& e) {
    const bool in_polls = where.has_value();
    detail::error_line(err, e.code(), e.what(),
                       in_polls ? std::optional<detail::FileError>(
                                      detail::FileError{opt.polls, e.line()})
                                : std::nullopt);
    return kDataError;
  } catch (const Error& e) {
    detail::error_line(err, e.code(), e.what());
    return kDataError;
  } catch (const std::exception& e) {
    detail::error_line(err, "internal", e.what());
    return kDataError;
  }
}

}  // namespace koalition::cli
