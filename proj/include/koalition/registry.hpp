#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "koalition/error.hpp"

namespace koalition {

/// True for exactly six hex digits, optionally preceded by '#'.
inline bool is_hex_color(std::string_view s) {
  if (!s.empty() && s.front() == '#') s.remove_prefix(1);
  if (s.size() != 6) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
  });
}

struct Party {
  std::string id;
  std::string name;
  std::string color;  // six hex digits, no '#'
};

/// Ordered set of parties. The residual ("other") bucket is always last.
class PartyRegistry {
 public:
  PartyRegistry() = default;

  PartyRegistry(std::vector<Party> parties, const std::string& other_id) {
    for (auto& p : parties) {
      if (p.id.empty()) throw ConfigError("bad-registry", "party id must not be empty");
      if (!is_hex_color(p.color)) {
        throw ConfigError("bad-registry", "party '" + p.id + "' has invalid color '" + p.color + "'");
      }
      if (p.color.front() == '#') p.color.erase(0, 1);
      if (p.name.empty()) p.name = p.id;
    }
    for (std::size_t i = 0; i < parties.size(); ++i) {
      for (std::size_t j = i + 1; j < parties.size(); ++j) {
        if (parties[i].id == parties[j].id) {
          throw ConfigError("bad-registry", "duplicate party id '" + parties[i].id + "'");
        }
      }
    }
    auto it = std::find_if(parties.begin(), parties.end(),
                           [&](const Party& p) { return p.id == other_id; });
    if (it == parties.end()) {
      throw ConfigError("bad-registry", "other bucket '" + other_id + "' is not a registered party");
    }
    std::rotate(it, it + 1, parties.end());
    parties_ = std::move(parties);
  }

  std::size_t size() const { return parties_.size(); }
  const Party& operator[](std::size_t i) const { return parties_[i]; }
  const std::vector<Party>& parties() const { return parties_; }
  std::size_t other_index() const { return parties_.size() - 1; }
  const std::string& other_id() const { return parties_.back().id; }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(parties_.size());
    for (const auto& p : parties_) out.push_back(p.id);
    return out;
  }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < parties_.size(); ++i) {
      if (parties_[i].id == id) return i;
    }
    return std::nullopt;
  }

  /// Maps ids to registry indices; throws Error("unknown-party") on a miss.
  std::vector<std::size_t> indices_of(std::span<const std::string> ids) const {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      auto idx = index_of(id);
      if (!idx) throw Error("unknown-party", "unknown party id '" + id + "'");
      out.push_back(*idx);
    }
    return out;
  }

 private:
  std::vector<Party> parties_;
};

}  // namespace koalition
