#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "koalition/electoral.hpp"
#include "koalition/error.hpp"
#include "koalition/poe_engine.hpp"
#include "koalition/registry.hpp"

// Run configuration, stored as INI:
//
//   [registry]
//   parties = CDU, SPD, GRUENE, FDP, AFD, LINKE, OTHER
//   other = OTHER
//   [names]
//   CDU = CDU/CSU
//   [colors]
//   CDU = #000000
//   [rules]
//   threshold = 0.05
//   house_size = 598
//   method = sainte-lague
//   [pooling]
//   window_days = 14
//   dependence_factor = 1
//   [model]
//   prior_alpha = 0.5
//   draws = 100000
//   tau = 60
//   [coalitions]
//   ampel = GRUENE, SPD, FDP
//
// [registry], [colors] and [coalitions] are required, the rest optional.
// Colors are six hex digits with an optional '#'. method is sainte-lague or
// dhondt. prior_alpha takes one value or one per party. Comment lines start
// with ';' or '#'.

namespace koalition {

struct NamedCoalition {
  std::string name;
  std::vector<std::string> parties;

  friend bool operator==(const NamedCoalition&, const NamedCoalition&) = default;
};

struct Config {
  PartyRegistry registry;
  ElectionRules rules;
  ModelConfig model;
  std::size_t draws = 100000;
  double tau = 60.0;
  std::vector<NamedCoalition> coalitions;

  const NamedCoalition& coalition(std::string_view name) const {
    for (const auto& c : coalitions) {
      if (c.name == name) return c;
    }
    throw ConfigError("unknown-coalition", fmt::format("unknown coalition '{}'", name));
  }
};

namespace config_detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t pos = s.find(',', start);
    auto item = s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                              : pos - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T get(const boost::property_tree::ptree& tree, const std::string& path, T fallback) {
  if (!tree.get_child_optional(path)) return fallback;
  try {
    return tree.get<T>(path);
  } catch (const boost::property_tree::ptree_bad_data&) {
    throw ConfigError("bad-config", fmt::format("cannot read '{}'", path));
  }
}

inline const boost::property_tree::ptree* section(const boost::property_tree::ptree& tree,
                                                  const std::string& name) {
  auto it = tree.find(name);
  return it == tree.not_found() ? nullptr : &it->second;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace config_detail

inline Config parse_config(std::string_view text) {
  namespace pt = boost::property_tree;
  using namespace config_detail;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("bad-config", fmt::format("line {}: {}", e.line(), e.message()));
  }

  Config cfg;
  const auto* reg = section(tree, "registry");
  if (!reg) throw ConfigError("bad-config", "missing [registry] section");
  const auto ids = split_list(reg->get<std::string>("parties", ""));
  const auto other = reg->get<std::string>("other", "");
  if (ids.empty() || other.empty()) {
    throw ConfigError("bad-config", "[registry] needs 'parties' and 'other'");
  }
  const auto* names = section(tree, "names");
  const auto* colors = section(tree, "colors");
  std::vector<Party> parties;
  for (const auto& id : ids) {
    Party p{id, id, ""};
    if (names) p.name = names->get<std::string>(pt::ptree::path_type(id, '\0'), id);
    if (colors) p.color = colors->get<std::string>(pt::ptree::path_type(id, '\0'), "");
    if (p.color.empty()) throw ConfigError("bad-config", "no color for party '" + id + "'");
    parties.push_back(std::move(p));
  }
  cfg.registry = PartyRegistry(std::move(parties), other);

  cfg.rules.threshold = get(tree, "rules.threshold", cfg.rules.threshold);
  cfg.rules.house_size = get(tree, "rules.house_size", cfg.rules.house_size);
  const auto method = get<std::string>(tree, "rules.method", "sainte-lague");
  if (method == "sainte-lague") {
    cfg.rules.method = SeatMethod::sainte_lague;
  } else if (method == "dhondt") {
    cfg.rules.method = SeatMethod::dhondt;
  } else {
    throw ConfigError("bad-config", "unknown seat method '" + method + "'");
  }
  cfg.rules.validate();

  cfg.model.pooling.window_days = get(tree, "pooling.window_days", cfg.model.pooling.window_days);
  cfg.model.pooling.dependence_factor =
      get(tree, "pooling.dependence_factor", cfg.model.pooling.dependence_factor);
  cfg.model.pooling.validate();

  const auto prior_text = get<std::string>(tree, "model.prior_alpha", "0.5");
  std::vector<double> prior;
  for (const auto& item : split_list(prior_text)) {
    try {
      std::size_t used = 0;
      prior.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("bad-config", "bad prior_alpha value '" + item + "'");
    }
  }
  if (prior.size() == 1) prior.assign(cfg.registry.size(), prior.front());
  if (prior.size() != cfg.registry.size()) {
    throw ConfigError("bad-config", "prior_alpha needs one value or one per party");
  }
  for (double a : prior) {
    if (!(a > 0.0)) throw ConfigError("bad-config", "prior_alpha values must be positive");
  }
  cfg.model.prior_alpha = std::move(prior);

  const auto draws = get<long long>(tree, "model.draws", 100000);
  if (draws < static_cast<long long>(kMinDraws)) {
    throw ConfigError("bad-config", fmt::format("draws must be at least {}", kMinDraws));
  }
  cfg.draws = static_cast<std::size_t>(draws);
  cfg.tau = get(tree, "model.tau", cfg.tau);
  if (!(cfg.tau > 0.0)) throw ConfigError("bad-config", "tau must be positive");

  if (const auto* coal = section(tree, "coalitions")) {
    for (const auto& [name, value] : *coal) {
      NamedCoalition c{name, split_list(value.data())};
      if (c.parties.empty()) {
        throw ConfigError("bad-coalition", "coalition '" + name + "' has no members");
      }
      for (const auto& id : c.parties) {
        if (!cfg.registry.index_of(id)) {
          throw ConfigError("unknown-party",
                            fmt::format("coalition '{}' names unknown party '{}'", name, id));
        }
      }
      cfg.coalitions.push_back(std::move(c));
    }
  }
  if (cfg.coalitions.empty()) throw ConfigError("bad-config", "no [coalitions] defined");
  return cfg;
}

/// Writes `cfg` in the format parse_config reads; doubles use the shortest
/// round-trip representation.
inline std::string write_config(const Config& cfg) {
  using config_detail::join;
  std::string out = "[registry]\n";
  out += "parties = " + join(cfg.registry.ids()) + "\n";
  out += "other = " + cfg.registry.other_id() + "\n\n[names]\n";
  for (const auto& p : cfg.registry.parties()) out += p.id + " = " + p.name + "\n";
  out += "\n[colors]\n";
  for (const auto& p : cfg.registry.parties()) out += p.id + " = #" + p.color + "\n";
  out += fmt::format("\n[rules]\nthreshold = {}\nhouse_size = {}\nmethod = {}\n",
                     cfg.rules.threshold, cfg.rules.house_size, to_string(cfg.rules.method));
  out += fmt::format("\n[pooling]\nwindow_days = {}\ndependence_factor = {}\n",
                     cfg.model.pooling.window_days, cfg.model.pooling.dependence_factor);
  std::vector<std::string> prior;
  for (double a : cfg.model.prior_for(cfg.registry.size())) prior.push_back(fmt::format("{}", a));
  out += fmt::format("\n[model]\nprior_alpha = {}\ndraws = {}\ntau = {}\n", join(prior),
                     cfg.draws, cfg.tau);
  out += "\n[coalitions]\n";
  for (const auto& c : cfg.coalitions) out += c.name + " = " + join(c.parties) + "\n";
  return out;
}

}  // namespace koalition
