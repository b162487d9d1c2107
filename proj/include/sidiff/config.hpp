#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sidiff/error.hpp"
#include "sidiff/experiments.hpp"
#include "sidiff/rates.hpp"

namespace sidiff {

using json = nlohmann::json;

inline constexpr const char *version = "0.1.0";

namespace detail {

inline double number_field(const json &obj, const char *key, const std::string &ctx) {
  if (!obj.contains(key))
    throw ConfigError(ctx + ": missing field '" + key + "'");
  const auto &v = obj.at(key);
  if (!v.is_number())
    throw ConfigError(ctx + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::vector<double> number_array(const json &obj, const char *key,
                                        const std::string &ctx) {
  if (!obj.contains(key) || !obj.at(key).is_array())
    throw ConfigError(ctx + ": field '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto &v : obj.at(key)) {
    if (!v.is_number())
      throw ConfigError(ctx + ": field '" + key + "' must hold numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

} // namespace detail

/// Parses {"kind": "...", "params": {...}}.
///
///   constant        params {"value"}
///   sinusoid        params {"a", "b", "omega", "phi"}   a + b sin(omega t + phi)
///   exp_saturating  params {"a", "b", "c"}              a + b (1 - e^{-c t})^2
///   tabulated       params {"times": [...], "values": [...]}
inline RateFunction rate_from_json(const json &j, const std::string &ctx = "rate") {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(ctx + ": rate descriptor needs a string 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  if (!params.is_object())
    throw ConfigError(ctx + ": 'params' must be an object");
  const std::string where = ctx + " (" + kind + ")";
  using detail::number_field;
  if (kind == "constant")
    return RateFunction::constant(number_field(params, "value", where));
  if (kind == "sinusoid")
    return RateFunction::sinusoid(number_field(params, "a", where),
                                  number_field(params, "b", where),
                                  params.contains("omega") ? number_field(params, "omega", where) : 1.0,
                                  params.contains("phi") ? number_field(params, "phi", where) : 0.0);
  if (kind == "exp_saturating")
    return RateFunction::exp_saturating(number_field(params, "a", where),
                                        number_field(params, "b", where),
                                        number_field(params, "c", where));
  if (kind == "tabulated") {
    try {
      return RateFunction::tabulated(detail::number_array(params, "times", where),
                                     detail::number_array(params, "values", where));
    } catch (const DomainError &e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  throw ConfigError(ctx + ": unknown rate kind '" + kind + "'");
}

inline json rate_to_json(const RateFunction &f) {
  return std::visit(
      [](const auto &k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, rate_kind::Constant>)
          return {{"kind", "constant"}, {"params", {{"value", k.value}}}};
        else if constexpr (std::is_same_v<T, rate_kind::Sinusoid>)
          return {{"kind", "sinusoid"},
                  {"params", {{"a", k.a}, {"b", k.b}, {"omega", k.omega}, {"phi", k.phi}}}};
        else if constexpr (std::is_same_v<T, rate_kind::ExpSaturating>)
          return {{"kind", "exp_saturating"},
                  {"params", {{"a", k.a}, {"b", k.b}, {"c", k.c}}}};
        else if constexpr (std::is_same_v<T, rate_kind::Tabulated>)
          return {{"kind", "tabulated"},
                  {"params", {{"times", k.times}, {"values", k.values}}}};
        else
          throw ConfigError("custom rate '" + k.label + "' has no JSON form");
      },
      f.kind());
}

/// Rates file: {"lambda": <rate>, "sigma2": <rate>}; K comes from elsewhere.
inline RatePair rates_from_json(const json &j, double K) {
  if (!j.is_object() || !j.contains("lambda") || !j.contains("sigma2"))
    throw ConfigError("rates config needs 'lambda' and 'sigma2' descriptors");
  return RatePair(rate_from_json(j.at("lambda"), "lambda"),
                  rate_from_json(j.at("sigma2"), "sigma2"), K);
}

inline json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
}

/// 64-bit FNV-1a of the canonical (sorted-key, compact) JSON text.
inline std::string config_hash(const json &j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Experiment suite file:
///
///   {
///     "master_seed": 42, "workers": 1,
///     "defaults": { ...any experiment field... },
///     "experiments": [
///       {"name": "hom_0.4_0.05",
///        "lambda": <rate>, "sigma2": <rate>,
///        "K": 200, "x0": 20, "t0": 0, "T": 50, "delta": 0.01,
///        "paths": 50, "replicates": 100, "methods": ["GMM", "MLE"],
///        "stride": 1, "eval_stride": 10, "window": [2, 48],
///        "unbiased_sd": false, "seed_offset": 0}
///     ]
///   }
///
/// Each experiment's master seed is master_seed + seed_offset (offset
/// defaults to the experiment's position in the list).
struct ExperimentSuite {
  std::vector<ExperimentConfig> experiments;
  std::uint64_t master_seed = 1;
  json source;
};

inline ExperimentConfig experiment_from_json(const json &e, const json &defaults,
                                             std::uint64_t master_seed,
                                             std::size_t position) {
  json merged = defaults.is_object() ? defaults : json::object();
  for (const auto &[key, value] : e.items())
    merged[key] = value;
  const std::string name = merged.value("name", "experiment_" + std::to_string(position));
  const std::string ctx = "experiment '" + name + "'";
  if (!merged.contains("lambda") || !merged.contains("sigma2"))
    throw ConfigError(ctx + ": needs 'lambda' and 'sigma2' descriptors");

  try {
    const double K = merged.value("K", 200.0);
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.truth = RatePair(rate_from_json(merged.at("lambda"), ctx + " lambda"),
                         rate_from_json(merged.at("sigma2"), ctx + " sigma2"), K);
    cfg.x0 = merged.value("x0", 20.0);
    cfg.grid = TimeGrid::covering(merged.value("t0", 0.0), merged.value("T", 50.0),
                                  merged.value("delta", 0.01));
    cfg.paths = merged.value("paths", std::size_t{50});
    cfg.replicates = merged.value("replicates", std::size_t{100});
    cfg.stride = merged.value("stride", std::size_t{1});
    cfg.eval_stride = merged.value("eval_stride", std::size_t{10});
    cfg.unbiased_sd = merged.value("unbiased_sd", false);
    cfg.min_abs_truth = merged.value("min_abs_truth", 0.05);
    cfg.workers = merged.value("workers", std::size_t{1});
    const auto offset = merged.value("seed_offset", static_cast<std::uint64_t>(position));
    cfg.master_seed = master_seed + offset;
    if (merged.contains("window")) {
      const auto w = detail::number_array(merged, "window", ctx);
      if (w.size() != 2)
        throw ConfigError(ctx + ": 'window' must be [lo, hi]");
      cfg.window_lo = w[0];
      cfg.window_hi = w[1];
    }
    const std::vector<std::string> methods =
        merged.value("methods", std::vector<std::string>{"GMM"});
    cfg.gmm = cfg.mle = false;
    for (const auto &m : methods) {
      if (m == "GMM")
        cfg.gmm = true;
      else if (m == "MLE")
        cfg.mle = true;
      else
        throw ConfigError(ctx + ": unknown method '" + m + "'");
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception &ex) {
    throw ConfigError(ctx + ": " + ex.what());
  }
}

inline ExperimentSuite suite_from_json(const json &j) {
  if (!j.is_object() || !j.contains("experiments") || !j.at("experiments").is_array())
    throw ConfigError("experiment config needs an 'experiments' array");
  ExperimentSuite suite;
  suite.source = j;
  suite.master_seed = j.value("master_seed", std::uint64_t{1});
  const json defaults = j.value("defaults", json::object());
  const std::size_t workers = j.value("workers", std::size_t{1});
  std::size_t position = 0;
  for (const auto &e : j.at("experiments")) {
    auto cfg = experiment_from_json(e, defaults, suite.master_seed, position++);
    if (!e.contains("workers") && !defaults.contains("workers"))
      cfg.workers = workers;
    suite.experiments.push_back(std::move(cfg));
  }
  if (suite.experiments.empty())
    throw ConfigError("experiment config lists no experiments");
  return suite;
}

} // namespace sidiff
