#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "koalition/date.hpp"
#include "koalition/error.hpp"
#include "koalition/registry.hpp"

namespace koalition {

/// One published survey. `shares` is indexed like the PartyRegistry it was
/// read against; the last entry is the residual ("other") share.
struct Poll {
  std::string pollster;
  Date publish_date;
  long long sample_size = 0;
  std::vector<double> shares;

  friend bool operator==(const Poll&, const Poll&) = default;
};

namespace detail {

inline constexpr double kOversumTolerance = 1e-6;
inline constexpr double kSumInvariantTolerance = 1e-9;

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return 0.0;  // blank cell: party not reported
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Outcome of validate_poll: either a normalized poll or every violated
/// invariant ("oversum", "negative", "badsize", "shape").
struct PollValidation {
  std::optional<Poll> poll;
  std::vector<std::string> errors;

  bool ok() const { return poll.has_value(); }
};

/// Checks the poll invariants and routes the residual share to the other
/// bucket. The other bucket ends up as 1 minus the named shares regardless of
/// what was reported for it, so normalization is idempotent bit for bit.
inline PollValidation validate_poll(const Poll& poll, const PartyRegistry& registry) {
  PollValidation result;
  if (poll.shares.size() != registry.size()) {
    result.errors.emplace_back("shape");
    return result;
  }
  if (poll.sample_size < 1) result.errors.emplace_back("badsize");
  double total = 0.0;
  bool negative = false;
  for (double s : poll.shares) {
    if (s < 0.0) negative = true;
    total += s;
  }
  if (negative) result.errors.emplace_back("negative");
  if (total > 1.0 + detail::kOversumTolerance) result.errors.emplace_back("oversum");
  if (!result.errors.empty()) return result;

  Poll out = poll;
  const std::size_t other = registry.other_index();
  double named = 0.0;
  for (std::size_t k = 0; k < other; ++k) named += out.shares[k];
  if (named > 1.0 + detail::kSumInvariantTolerance) {
    // Within the parse tolerance but above the invariant: rescale.
    for (std::size_t k = 0; k < other; ++k) out.shares[k] /= named;
    named = 0.0;
    for (std::size_t k = 0; k < other; ++k) named += out.shares[k];
  }
  out.shares[other] = std::max(0.0, 1.0 - named);
  result.poll = std::move(out);
  return result;
}

/// Parses a poll table: header `pollster,date,n,<party ids...>`. Shares are
/// percentages if any share cell in the file exceeds 1, fractions otherwise.
/// Rows come back validated and sorted by publish date (stable).
inline std::vector<Poll> parse_polls(std::string_view text, const PartyRegistry& registry) {
  std::vector<std::pair<int, std::string_view>> lines;
  {
    int lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t pos = text.find('\n', start);
      std::string_view line =
          text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
      ++lineno;
      if (!detail::trim(line).empty()) lines.emplace_back(lineno, line);
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  }
  if (lines.empty()) throw DataError("bad-header", "empty poll file");

  auto header = detail::split_commas(lines.front().second);
  if (header.size() < 3 || header[0] != "pollster" || header[1] != "date" || header[2] != "n") {
    throw DataError("bad-header", "header must start with pollster,date,n", lines.front().first);
  }
  std::vector<std::size_t> column_party;
  for (std::size_t c = 3; c < header.size(); ++c) {
    auto idx = registry.index_of(header[c]);
    if (!idx) {
      throw DataError("unknown-party", fmt::format("unknown party column '{}'", header[c]),
                      lines.front().first);
    }
    if (std::find(column_party.begin(), column_party.end(), *idx) != column_party.end()) {
      throw DataError("bad-header", fmt::format("duplicate party column '{}'", header[c]),
                      lines.front().first);
    }
    column_party.push_back(*idx);
  }

  struct RawRow {
    int line;
    std::string pollster;
    Date date;
    long long n;
    std::vector<double> values;
  };
  std::vector<RawRow> rows;
  bool percent = false;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto [lineno, line] = lines[r];
    auto cells = detail::split_commas(line);
    if (cells.size() != header.size()) {
      throw DataError("bad-row",
                      fmt::format("expected {} columns, found {}", header.size(), cells.size()),
                      lineno);
    }
    auto date = Date::parse(cells[1]);
    if (!date) throw DataError("bad-date", fmt::format("malformed date '{}'", cells[1]), lineno);
    auto n = detail::parse_int(cells[2]);
    if (!n) throw DataError("badsize", fmt::format("malformed sample size '{}'", cells[2]), lineno);
    RawRow row{lineno, std::string(cells[0]), *date, *n, {}};
    for (std::size_t c = 3; c < cells.size(); ++c) {
      auto v = detail::parse_double(cells[c]);
      if (!v) throw DataError("bad-number", fmt::format("malformed share '{}'", cells[c]), lineno);
      if (*v > 1.0) percent = true;
      row.values.push_back(*v);
    }
    rows.push_back(std::move(row));
  }

  std::vector<Poll> polls;
  polls.reserve(rows.size());
  for (auto& row : rows) {
    Poll poll{row.pollster, row.date, row.n, std::vector<double>(registry.size(), 0.0)};
    for (std::size_t c = 0; c < row.values.size(); ++c) {
      poll.shares[column_party[c]] = percent ? row.values[c] / 100.0 : row.values[c];
    }
    auto checked = validate_poll(poll, registry);
    if (!checked.ok()) {
      std::string joined;
      for (const auto& e : checked.errors) joined += (joined.empty() ? "" : ",") + e;
      throw DataError(checked.errors.front(), fmt::format("invalid poll row: {}", joined),
                      row.line);
    }
    polls.push_back(std::move(*checked.poll));
  }
  std::stable_sort(polls.begin(), polls.end(), [](const Poll& a, const Poll& b) {
    return a.publish_date < b.publish_date;
  });
  return polls;
}

/// Writes polls back as a fraction-valued table with every registry column.
/// `%.17g` keeps shares bit-exact through parse_polls.
inline std::string serialize_polls(const std::vector<Poll>& polls, const PartyRegistry& registry) {
  std::string out = "pollster,date,n";
  for (const auto& p : registry.parties()) out += "," + p.id;
  out += "\n";
  for (const auto& poll : polls) {
    out += fmt::format("{},{},{}", poll.pollster, poll.publish_date.str(), poll.sample_size);
    for (double s : poll.shares) out += fmt::format(",{:.17g}", s);
    out += "\n";
  }
  return out;
}

}  // namespace koalition
