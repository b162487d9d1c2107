#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sidiff/dataio.hpp"
#include "sidiff/experiments.hpp"
#include "sidiff/stats.hpp"

namespace sidiff::report {

using io::format_double;

/// One row per (experiment, method) with constant truth:
/// experiment,method,lambda,sigma2,mre_lambda,mre_sigma2
inline std::string table1_csv(const std::vector<ExperimentReport> &reports,
                              const std::vector<ExperimentConfig> &configs,
                              const io::Metadata &meta) {
  std::string s = meta.line();
  s += "experiment,method,lambda,sigma2,mre_lambda,mre_sigma2\n";
  for (std::size_t e = 0; e < reports.size(); ++e) {
    const auto &cfg = configs[e];
    if (!(cfg.truth.lambda.is_constant() && cfg.truth.sigma2.is_constant()))
      continue;
    for (const char *name : {"MLE", "GMM"}) {
      const auto *m = reports[e].method(name);
      if (!m)
        continue;
      s += reports[e].name + ',' + name + ',' +
           format_double(cfg.truth.lambda.constant_value()) + ',' +
           format_double(cfg.truth.sigma2.constant_value()) + ',' +
           format_double(m->mre_lambda) + ',' + format_double(m->mre_sigma2) + '\n';
    }
  }
  return s;
}

/// Pointwise bands of one experiment:
/// t, then true/mean/sd/lower/upper for lambda and for sigma2.
inline std::string bands_csv(const ExperimentReport &r, const io::Metadata &meta) {
  std::string s = meta.line();
  s += "t,lambda_true,lambda_mean,lambda_sd,lambda_lower,lambda_upper,"
       "sigma2_true,sigma2_mean,sigma2_sd,sigma2_lower,sigma2_upper\n";
  if (!r.lambda_band || !r.sigma2_band)
    return s;
  const auto &lb = *r.lambda_band;
  const auto &sb = *r.sigma2_band;
  for (std::size_t k = 0; k < r.eval_times.size(); ++k) {
    s += format_double(r.eval_times[k]);
    for (double v : {r.lambda_true[k], lb.mean[k], lb.sd[k], lb.lower[k], lb.upper[k],
                     r.sigma2_true[k], sb.mean[k], sb.sd[k], sb.lower[k], sb.upper[k]}) {
      s += ',';
      s += format_double(v);
    }
    s += '\n';
  }
  return s;
}

/// Five-number summaries of the per-replicate scalar estimates:
/// experiment,method,parameter,min,q1,median,q3,max,outliers
inline std::string boxplot_csv(const std::vector<ExperimentReport> &reports,
                               const io::Metadata &meta) {
  std::string s = meta.line();
  s += "experiment,method,parameter,min,q1,median,q3,max,outliers\n";
  for (const auto &r : reports) {
    for (const auto &m : r.methods) {
      for (const auto &[param, values] :
           {std::pair{"lambda", &m.lambda}, std::pair{"sigma2", &m.sigma2}}) {
        if (values->size() < 5)
          continue;
        const auto b = stats::boxplot_stats(*values);
        s += r.name + ',' + m.method + ',' + param;
        for (double v : {b.min, b.q1, b.median, b.q3, b.max}) {
          s += ',';
          s += format_double(v);
        }
        s += ',' + std::to_string(b.outliers.size()) + '\n';
      }
    }
  }
  return s;
}

/// Gaussian kernel densities of the standardized scalar estimates:
/// experiment,method,parameter,bandwidth,x,density
inline std::string kde_csv(const std::vector<ExperimentReport> &reports,
                           const io::Metadata &meta, std::size_t points = 256) {
  std::string s = meta.line();
  s += "experiment,method,parameter,bandwidth,x,density\n";
  for (const auto &r : reports) {
    for (const auto &m : r.methods) {
      for (const auto &[param, values] :
           {std::pair{"lambda", &m.lambda}, std::pair{"sigma2", &m.sigma2}}) {
        if (values->size() < 10 || stats::stddev(*values) == 0.0)
          continue;
        const auto curve = stats::kde(stats::standardize(*values), points);
        const std::string prefix = r.name + ',' + m.method + ',' + param + ',' +
                                   format_double(curve.bandwidth) + ',';
        for (std::size_t k = 0; k < curve.x.size(); ++k)
          s += prefix + format_double(curve.x[k]) + ',' + format_double(curve.density[k]) + '\n';
      }
    }
  }
  return s;
}

/// Scalar summary of every experiment, including the diagnostics:
/// experiment,seed,replicates,curve_mre_lambda,curve_mre_sigma2,clips,saturated
inline std::string summary_csv(const std::vector<ExperimentReport> &reports,
                               const std::vector<ExperimentConfig> &configs,
                               const io::Metadata &meta) {
  std::string s = meta.line();
  s += "experiment,seed,replicates,paths,curve_mre_lambda,curve_mre_sigma2,clips,saturated\n";
  for (std::size_t e = 0; e < reports.size(); ++e) {
    const auto &r = reports[e];
    s += r.name + ',' + std::to_string(r.master_seed) + ',' +
         std::to_string(configs[e].replicates) + ',' + std::to_string(configs[e].paths) + ',' +
         format_double(r.curve_mre_lambda) + ',' + format_double(r.curve_mre_sigma2) + ',' +
         std::to_string(r.total_clips) + ',' + std::to_string(r.total_saturated) + '\n';
  }
  return s;
}

} // namespace sidiff::report
