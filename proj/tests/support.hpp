#pragma once

// Helpers shared by the unit tests and the acceptance runner: fixture
// loading, independent oracles, and small SVG inspection utilities.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "koalition/koalition.hpp"

namespace ktest {

using namespace koalition;

inline std::string data_path(const std::string& name) {
  return std::string(KOALITION_TEST_DATA_DIR) + "/" + name;
}

inline std::string golden_path(const std::string& name) {
  return std::string(KOALITION_GOLDEN_DIR) + "/" + name;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline const Config& fixture_config() {
  static const Config cfg = parse_config(read_text(data_path("config.ini")));
  return cfg;
}

inline const std::vector<Poll>& fixture_polls() {
  static const std::vector<Poll> polls =
      parse_polls(read_text(data_path("polls.csv")), fixture_config().registry);
  return polls;
}

/// Registry with `named` parties P0..P{named-1} plus the OTHER bucket.
inline PartyRegistry make_registry(std::size_t named) {
  std::vector<Party> parties;
  for (std::size_t k = 0; k < named; ++k) {
    parties.push_back({"P" + std::to_string(k), "Party " + std::to_string(k), "336699"});
  }
  parties.push_back({"OTHER", "Other", "999999"});
  return PartyRegistry(std::move(parties), "OTHER");
}

inline std::vector<std::string> ids_of(std::size_t named) { return make_registry(named).ids(); }

/// Highest averages by enumeration: list every quotient v_k / d_j for
/// j < house, order by (quotient desc, party asc, j asc), keep the top
/// `house` entries and count them per party.
inline std::vector<int> brute_force_seats(const std::vector<double>& values,
                                          const std::vector<char>& eligible, int house,
                                          SeatMethod method) {
  struct Q {
    double q;
    std::size_t party;
    int j;
  };
  std::vector<Q> all;
  const double step = method == SeatMethod::sainte_lague ? 2.0 : 1.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!eligible[k]) continue;
    for (int j = 0; j < house; ++j) all.push_back({values[k] / (1.0 + step * j), k, j});
  }
  std::sort(all.begin(), all.end(), [](const Q& a, const Q& b) {
    return std::tie(b.q, a.party, a.j) < std::tie(a.q, b.party, b.j);
  });
  std::vector<int> seats(values.size(), 0);
  for (int s = 0; s < house && s < static_cast<int>(all.size()); ++s) ++seats[all[s].party];
  return seats;
}

/// Random positive concentrations for `named` parties plus OTHER.
inline DirichletPosterior random_posterior(std::mt19937_64& rng, std::size_t named,
                                           double scale = 2000.0) {
  std::uniform_real_distribution<double> u(0.02, 1.0);
  std::vector<double> alpha(named + 1);
  double total = 0.0;
  for (auto& a : alpha) total += (a = u(rng));
  for (auto& a : alpha) a = a / total * scale + 0.5;
  return DirichletPosterior(ids_of(named), alpha);
}

inline bool well_formed_xml(const std::string& xml) {
  try {
    boost::property_tree::ptree tree;
    std::istringstream in(xml);
    boost::property_tree::read_xml(in, tree);
    return tree.count("svg") == 1;
  } catch (const boost::property_tree::xml_parser_error&) {
    return false;
  }
}

inline std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

/// Attribute `attr` of every element whose class attribute is exactly `cls`.
inline std::vector<std::string> attr_values(const std::string& xml, const std::string& cls,
                                            const std::string& attr) {
  std::vector<std::string> out;
  const std::string class_attr = " class=\"" + cls + "\"";
  const std::string wanted = " " + attr + "=\"";
  for (std::size_t open = xml.find('<'); open != std::string::npos; open = xml.find('<', open + 1)) {
    const std::size_t close = xml.find('>', open);
    if (close == std::string::npos) break;
    const std::string_view tag(xml.data() + open, close - open);
    if (tag.find(class_attr) == std::string_view::npos) continue;
    const std::size_t at = tag.find(wanted);
    if (at == std::string_view::npos) continue;
    const std::size_t begin = at + wanted.size();
    out.emplace_back(tag.substr(begin, tag.find('"', begin) - begin));
  }
  return out;
}

inline std::vector<std::pair<double, double>> path_points(const std::string& d) {
  std::vector<std::pair<double, double>> pts;
  const std::regex point("[ML](-?[0-9.]+),(-?[0-9.]+)");
  for (auto it = std::sregex_iterator(d.begin(), d.end(), point); it != std::sregex_iterator();
       ++it) {
    pts.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  }
  return pts;
}

/// Shoelace area of a closed polygon given as SVG path data.
inline double polygon_area(const std::string& d) {
  const auto pts = path_points(d);
  double twice = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& [x0, y0] = pts[i];
    const auto& [x1, y1] = pts[(i + 1) % pts.size()];
    twice += x0 * y1 - x1 * y0;
  }
  return std::abs(twice) / 2.0;
}

/// Settings of the committed figure suite.
struct SuiteSettings {
  Date as_of{2021, 8, 27};
  Date election{2021, 9, 26};
  std::uint64_t seed = 42;
  std::size_t m = 4000;
  int grid_days = 7;
};

/// All eight figures, rendered from the committed fixture, keyed by the
/// golden file name.
inline std::vector<std::pair<std::string, std::string>> render_figure_suite(
    const SuiteSettings& s = {}) {
  const auto& cfg = fixture_config();
  const auto& polls = fixture_polls();
  const auto& reg = cfg.registry;
  const Theme theme;
  const Provenance prov{s.seed, s.m, s.as_of};
  const auto& ampel = cfg.coalition("ampel");
  const auto post = posterior_from(pool(polls, s.as_of, cfg.model.pooling), reg,
                                   cfg.model.prior_for(reg.size()));

  std::vector<std::pair<std::string, std::string>> out;
  const Poll* latest = nullptr;
  for (const auto& p : polls) {
    if (p.publish_date <= s.as_of) latest = &p;
  }
  out.emplace_back("classic.svg", render_classic_bars(*latest, reg, theme, {s.seed, 0, s.as_of}).xml);

  std::vector<EventSpec> events;
  for (const auto& c : cfg.coalitions) events.push_back(EventSpec::coalition(c.parties));
  const auto results = estimate_poe(post, cfg.rules, events, s.m, s.seed, Parallelism{1});
  std::vector<CoalitionPoE> bars;
  for (std::size_t j = 0; j < results.size(); ++j) {
    bars.push_back({cfg.coalitions[j].name, cfg.coalitions[j].parties, results[j]});
  }
  out.emplace_back("poe_bars.svg", render_poe_bars(bars, reg, post.mean(), theme, prov).xml);

  const auto dist = seat_distribution(post, cfg.rules, ampel.parties, s.m, s.seed, Parallelism{1});
  out.emplace_back("density.svg", render_seat_density(dist, theme, prov, ampel.name).xml);

  const auto parliaments = sample_parliaments(post, cfg.rules, 6, s.seed);
  out.emplace_back("parliaments.svg",
                   render_parliaments(parliaments, ampel.parties, reg, theme, {s.seed, 6, s.as_of}).xml);

  std::vector<Date> dates;
  for (int w = 7; w >= 0; --w) dates.push_back(s.as_of - 7 * w);
  Theme tall = theme;
  tall.height = 600.0;
  const auto now = distribution_series(polls, reg, dates, cfg.rules, ampel.parties, cfg.model,
                                       s.m, s.seed, Parallelism{1});
  out.emplace_back("ridgeline.svg", render_ridgeline(now.points, tall, prov).xml);

  const auto poe = poe_series(polls, reg, dates, cfg.rules,
                              EventSpec::coalition(cfg.coalition("groko").parties),
                              cfg.model, s.m, s.seed, Parallelism{1});
  out.emplace_back("poe_timeline.svg", render_poe_timeline(poe.points, theme, prov).xml);

  const ForecastSpec spec{s.election, s.as_of, cfg.tau};
  const auto fan = fan_chart_data(polls, reg, spec, cfg.model, s.grid_days, s.m, s.seed,
                                  Parallelism{1});
  out.emplace_back("fan.svg", render_fan_chart(fan, polls, reg, theme, prov).xml);

  const auto fc = forecast_distribution_series(polls, reg, dates, s.election, cfg.tau, cfg.rules,
                                               ampel.parties, cfg.model, s.m, s.seed,
                                               Parallelism{1});
  Theme wide = tall;
  wide.width = 1000.0;
  out.emplace_back("forecast_ridgeline.svg",
                   render_forecast_ridgeline(now.points, fc.points, wide, prov).xml);
  return out;
}

}  // namespace ktest
