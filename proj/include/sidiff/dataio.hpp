#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sidiff/error.hpp"
#include "sidiff/estimate.hpp"
#include "sidiff/grid.hpp"
#include "sidiff/paths.hpp"

namespace sidiff::io {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty())
    return std::nullopt;
  if (s.front() == '+')
    s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    return std::nullopt;
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ','))
    out.push_back(cell);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  for (auto &c : out) {
    while (!c.empty() && (c.back() == '\r' || c.back() == ' '))
      c.pop_back();
    while (!c.empty() && c.front() == ' ')
      c.erase(c.begin());
  }
  return out;
}

/// Provenance line written at the top of every CSV output.
struct Metadata {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;

  std::string line() const {
    return "# config-hash=" + config_hash + ", seed=" + std::to_string(seed) +
           ", version=" + version + "\n";
  }
};

/// Writes `content` to `path` through a temporary file in the same directory
/// followed by a rename, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path &path, const std::string &content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
      throw IoError("cannot create directory '" + path.parent_path().string() +
                    "': " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out)
      throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                  "': " + ec.message());
}

/// Lines of a text file with their 1-based line numbers; comment lines
/// starting with '#' and blank lines are dropped.
inline std::vector<std::pair<std::size_t, std::string>>
read_data_lines(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line.front() == '#')
      continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Path sets

/// CSV text of a path set: header `t,path_1,...,path_d`, one row per time.
inline std::string path_set_csv(const PathSet &p, const Metadata &meta) {
  std::string s = meta.line();
  s += "t";
  for (std::size_t i = 0; i < p.paths(); ++i)
    s += ",path_" + std::to_string(i + 1);
  s += "\n";
  for (std::size_t j = 0; j < p.times(); ++j) {
    s += format_double(p.grid().time(j));
    for (std::size_t i = 0; i < p.paths(); ++i) {
      s += ',';
      s += format_double(p(i, j));
    }
    s += '\n';
  }
  return s;
}

/// Reads a path set written by path_set_csv (or any CSV of that shape with
/// equally spaced times). Values are taken as X-space observations.
inline PathSet read_path_set_csv(const std::filesystem::path &path, double K) {
  const auto lines = read_data_lines(path);
  if (lines.size() < 3)
    throw DataError("'" + path.string() + "': need a header and at least 2 rows");
  const auto header = split_csv_line(lines[0].second);
  if (header.size() < 2 || header[0] != "t")
    throw DataError("'" + path.string() + "': header must be t,path_1,...");
  const std::size_t d = header.size() - 1;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto &[number, text] = lines[k];
    const auto cells = split_csv_line(text);
    if (cells.size() != d + 1)
      throw DataError("'" + path.string() + "' line " + std::to_string(number) +
                      ": expected " + std::to_string(d + 1) + " cells");
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto v = parse_double(cells[c]);
      if (!v)
        throw DataError("'" + path.string() + "' line " + std::to_string(number) +
                        ": non-numeric cell '" + cells[c] + "'");
      row.push_back(*v);
    }
    times.push_back(row.front());
    rows.push_back(std::move(row));
  }
  const double delta = times[1] - times[0];
  if (!(delta > 0.0))
    throw DataError("'" + path.string() + "': times must increase");
  for (std::size_t j = 1; j < times.size(); ++j) {
    const double expected = times[0] + static_cast<double>(j) * delta;
    if (std::abs(times[j] - expected) > 1e-6 * std::max(1.0, std::abs(delta) * j))
      throw DataError("'" + path.string() + "': times are not equally spaced");
  }
  PathSet p(TimeGrid(times[0], delta, times.size()), d, Space::X, K);
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < d; ++i)
      p(i, j) = rows[j][i + 1];
  return p;
}

// ---------------------------------------------------------------------------
// Estimates

/// CSV text with columns t,lambda_hat,sigma2_hat_raw,sigma2_hat_floored.
inline std::string estimate_csv(const EstimateResult &r, const Metadata &meta) {
  std::string s = meta.line();
  s += "t,lambda_hat,sigma2_hat_raw,sigma2_hat_floored\n";
  for (std::size_t j = 0; j < r.times.size(); ++j) {
    s += format_double(r.times[j]) + ',' + format_double(r.lambda_hat[j]) + ',' +
         format_double(r.sigma2_raw[j]) + ',' + format_double(r.sigma2_floored[j]) + '\n';
  }
  return s;
}

// ---------------------------------------------------------------------------
// Raw incidence series

/// Incident case counts per location on common observation times.
struct RawSeriesTable {
  std::vector<double> times;
  std::vector<std::string> locations;
  std::vector<std::vector<double>> counts; ///< counts[location][time]
  std::vector<double> populations;         ///< aligned with locations
};

/// Reads `time,<loc1>,...,<locL>` case counts plus a `location,population`
/// file. Errors name the offending line.
inline RawSeriesTable load_csv(const std::filesystem::path &cases,
                               const std::filesystem::path &populations) {
  const auto lines = read_data_lines(cases);
  if (lines.empty())
    throw DataError("'" + cases.string() + "': empty file");
  const auto header = split_csv_line(lines[0].second);
  if (header.size() < 2 || header[0] != "time")
    throw DataError("'" + cases.string() + "' line " + std::to_string(lines[0].first) +
                    ": header must be time,<location>,...");
  RawSeriesTable t;
  t.locations.assign(header.begin() + 1, header.end());
  {
    std::set<std::string> seen;
    for (const auto &loc : t.locations) {
      if (loc.empty() || !seen.insert(loc).second)
        throw DataError("'" + cases.string() + "': empty or duplicate location '" + loc + "'");
    }
  }
  t.counts.assign(t.locations.size(), {});
  std::set<double> seen_times;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto &[number, text] = lines[k];
    const std::string where = "'" + cases.string() + "' line " + std::to_string(number);
    const auto cells = split_csv_line(text);
    if (cells.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    auto time = parse_double(cells[0]);
    if (!time)
      throw DataError(where + ": non-numeric time '" + cells[0] + "'");
    if (!seen_times.insert(*time).second)
      throw DataError(where + ": duplicate time " + cells[0]);
    if (!t.times.empty() && *time < t.times.back())
      throw DataError(where + ": times must be increasing");
    t.times.push_back(*time);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      auto v = parse_double(cells[c]);
      if (!v)
        throw DataError(where + ": non-numeric count '" + cells[c] + "'");
      if (*v < 0.0 || !std::isfinite(*v))
        throw DataError(where + ": negative or non-finite count " + cells[c] +
                        " for location '" + t.locations[c - 1] + "'");
      t.counts[c - 1].push_back(*v);
    }
  }
  if (t.times.size() < 3)
    throw DataError("'" + cases.string() + "': need at least 3 observation times");

  const auto pop_lines = read_data_lines(populations);
  if (pop_lines.empty())
    throw DataError("'" + populations.string() + "': empty file");
  const auto pop_header = split_csv_line(pop_lines[0].second);
  if (pop_header.size() != 2 || pop_header[0] != "location" || pop_header[1] != "population")
    throw DataError("'" + populations.string() + "': header must be location,population");
  std::map<std::string, double> pop;
  for (std::size_t k = 1; k < pop_lines.size(); ++k) {
    const auto &[number, text] = pop_lines[k];
    const std::string where = "'" + populations.string() + "' line " + std::to_string(number);
    const auto cells = split_csv_line(text);
    if (cells.size() != 2)
      throw DataError(where + ": expected 2 cells");
    auto v = parse_double(cells[1]);
    if (!v)
      throw DataError(where + ": non-numeric population '" + cells[1] + "'");
    if (!(*v > 0.0))
      throw DataError(where + ": population must be positive");
    if (!pop.emplace(cells[0], *v).second)
      throw DataError(where + ": duplicate location '" + cells[0] + "'");
  }
  for (const auto &loc : t.locations) {
    auto it = pop.find(loc);
    if (it == pop.end())
      throw DataError("missing population for location '" + loc + "'");
    t.populations.push_back(it->second);
  }
  return t;
}

/// Inverse of load_csv: case table text and population table text.
inline std::pair<std::string, std::string> series_csv(const RawSeriesTable &t) {
  std::string cases = "time";
  for (const auto &loc : t.locations)
    cases += "," + loc;
  cases += "\n";
  for (std::size_t j = 0; j < t.times.size(); ++j) {
    cases += format_double(t.times[j]);
    for (std::size_t l = 0; l < t.locations.size(); ++l)
      cases += "," + format_double(t.counts[l][j]);
    cases += "\n";
  }
  std::string pops = "location,population\n";
  for (std::size_t l = 0; l < t.locations.size(); ++l)
    pops += t.locations[l] + "," + format_double(t.populations[l]) + "\n";
  return {cases, pops};
}

enum class TimeUnit {
  Index,    ///< t = 0, 1, 2, ... (one unit per observation interval)
  Calendar, ///< the time column as written (must be equally spaced)
};

struct NormalizeOptions {
  double K = 0.25;
  double clip_eps = 1e-9;
  TimeUnit unit = TimeUnit::Index;
  /// Divide every location by the largest population instead of its own.
  bool global_max = false;
};

/// Running sums of incident counts divided by population, one path per
/// location. Zeros are lifted to eps K and counted in `clipped`; a value at
/// or above K means K is too small and is an error.
inline PathSet cumulate_normalize(const RawSeriesTable &t, NormalizeOptions opt = {}) {
  if (!(opt.K > 0.0))
    throw ConfigError("cumulate_normalize: K must be positive");
  const std::size_t n = t.times.size();
  std::optional<TimeGrid> grid;
  if (opt.unit == TimeUnit::Index) {
    grid.emplace(0.0, 1.0, n);
  } else {
    const double delta = t.times[1] - t.times[0];
    for (std::size_t j = 1; j < n; ++j) {
      const double expected = t.times[0] + static_cast<double>(j) * delta;
      if (std::abs(t.times[j] - expected) > 1e-6 * std::max(1.0, std::abs(expected)))
        throw DataError("calendar time unit requires equally spaced times");
    }
    grid.emplace(t.times[0], delta, n);
  }

  const double max_pop = *std::max_element(t.populations.begin(), t.populations.end());
  PathSet p(*grid, t.locations.size(), Space::X, opt.K);
  const double floor = opt.clip_eps * opt.K;
  for (std::size_t l = 0; l < t.locations.size(); ++l) {
    const double pop = opt.global_max ? max_pop : t.populations[l];
    double cum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cum += t.counts[l][j];
      double v = cum / pop;
      if (v >= opt.K) {
        std::ostringstream msg;
        msg << "location '" << t.locations[l] << "' reaches normalized value " << v
            << " at time " << t.times[j] << ", not below K = " << opt.K
            << " (K too small)";
        throw DataError(msg.str());
      }
      if (v < floor) {
        v = floor;
        ++p.clipped;
      }
      p(l, j) = v;
    }
  }
  return p;
}

/// Heuristic carrying capacity: largest observation times `inflation`.
inline double suggest_K(const PathSet &paths, double inflation = 1.05) {
  const auto v = paths.values();
  if (v.empty())
    throw DomainError("suggest_K: no observations");
  return *std::max_element(v.begin(), v.end()) * inflation;
}

struct AnalysisOptions {
  NormalizeOptions normalize;
  std::size_t stride = 1;
  /// Optional restriction of the estimation window, in the chosen time unit.
  std::optional<double> t_min;
  std::optional<double> t_max;
};

struct AnalysisResult {
  PathSet paths;
  EstimateResult estimate;
  double suggested_K = 0.0;
};

/// Real-data workflow: cumulate and normalize each location, treat the
/// locations as paths of one process, and run the moment-matching estimator
/// with the user's K.
inline AnalysisResult analyze(const RawSeriesTable &table, const AnalysisOptions &opt) {
  PathSet all = cumulate_normalize(table, opt.normalize);
  std::size_t first = 0;
  std::size_t last = all.times() - 1;
  if (opt.t_min || opt.t_max) {
    while (first < all.times() && opt.t_min && all.grid().time(first) < *opt.t_min)
      ++first;
    while (last > first && opt.t_max && all.grid().time(last) > *opt.t_max)
      --last;
    if (first >= all.times() || last - first + 1 < 3)
      throw ConfigError("analysis window keeps fewer than 3 observation times");
  }
  PathSet paths(TimeGrid(all.grid().time(first), all.grid().delta(), last - first + 1),
                all.paths(), Space::X, all.K());
  paths.clipped = all.clipped;
  for (std::size_t i = 0; i < all.paths(); ++i)
    for (std::size_t j = first; j <= last; ++j)
      paths(i, j - first) = all(i, j);

  GmmOptions gmm;
  gmm.stride = opt.stride;
  gmm.clip_eps = opt.normalize.clip_eps;
  AnalysisResult r{paths, estimate_from_paths(paths, gmm), suggest_K(paths)};
  return r;
}

} // namespace sidiff::io
