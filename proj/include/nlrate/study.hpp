#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlrate/errors.hpp"
#include "nlrate/kernel.hpp"
#include "nlrate/ratefn.hpp"
#include "nlrate/solver.hpp"

namespace nlrate {

inline constexpr double kDeviationFloor = 1e-300;

struct StudyConfig {
  std::string kernel_spec = "uniform:eta=1";
  std::vector<double> R_list{10.0, 15.0, 20.0};
  double theta = 0.8;
  double t_phys = 0.1;
  std::optional<double> h;   // upper bound on the spacing; default_grid otherwise
  std::optional<double> dt;  // default_dt otherwise
  double A = 10.0;           // cap for the shifted rate profile
  std::string output_dir;    // empty: nothing written
  ConvolutionMethod convolution = ConvolutionMethod::Direct;
  std::string u0 = "one";    // "one" or "bump:<width>"
  unsigned workers = 0;      // 0: one per hardware thread
};

struct ProfilePoint {
  double x = 0.0;          // rescaled position x / R
  double value = 0.0;      // I_R^A
  double deviation = 0.0;  // v_R at the node
};

struct DeviationRow {
  double R = 0.0;
  double h = 0.0;
  double dt = 0.0;
  double sup_err = 0.0;
  double E = 0.0;
  double predicted_exponent = 0.0;
  double asymptotic_exponent = 0.0;  // NaN unless the kernel is compactly supported
  double slack = 0.0;                // (E - predicted_exponent) / R
  bool floored = false;
  std::vector<ProfilePoint> profile;
};

struct DeviationReport {
  std::string kernel;
  double theta = 0.0;
  double t = 0.0;
  double A = 0.0;
  bool proxy_reference = false;
  std::vector<DeviationRow> rows;
  double fitted_slack = 0.0;  // least-squares c in E(R) ~ predicted(R) + c R
  std::vector<std::string> profile_files;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_number(item, field));
  }
  if (out.empty()) throw ValidationError(field + ": empty list");
  return out;
}

inline InitialDatum parse_initial(const std::string& spec) {
  if (spec == "one") return InitialDatum::one();
  if (spec.rfind("bump", 0) == 0) {
    const auto colon = spec.find(':');
    const double width = colon == std::string::npos ? 1.0 : parse_number(spec.substr(colon + 1), "u0");
    return InitialDatum::bump(width);
  }
  throw ValidationError("u0: expected 'one' or 'bump:<width>', got '" + spec + "'");
}

inline Grid study_grid(const Kernel& k, const StudyConfig& cfg, double R) {
  return cfg.h ? aligned_grid(k, R, *cfg.h) : default_grid(k, R);
}

// ln(a + b) from ln a and ln b, either possibly -inf.
inline double log_add(double la, double lb) {
  const double hi = std::max(la, lb);
  if (hi == -kInf) return -kInf;
  return hi + std::log1p(std::exp(std::min(la, lb) - hi));
}

}  // namespace detail

/// Throws ValidationError naming the offending field.
inline void validate(const StudyConfig& cfg, const Kernel& k) {
  if (cfg.R_list.empty()) throw ValidationError("R: list is empty");
  for (std::size_t i = 0; i < cfg.R_list.size(); ++i) {
    if (!(cfg.R_list[i] > 0.0)) throw ValidationError("R: values must be positive");
    if (i > 0 && !(cfg.R_list[i] > cfg.R_list[i - 1])) {
      throw ValidationError("R: list must be strictly increasing");
    }
  }
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) throw ValidationError("theta: must lie in (0, 1)");
  if (!(cfg.t_phys > 0.0)) throw ValidationError("t: must be positive");
  if (!(cfg.A > 0.0)) throw ValidationError("A: must be positive");
  if (cfg.h && !(*cfg.h > 0.0)) throw ValidationError("h: must be positive");
  if (cfg.dt && !(*cfg.dt > 0.0)) throw ValidationError("dt: must be positive");
  if (k.singular()) throw ValidationError("kernel: singular kernels cannot be used in a study");
  const Grid g = detail::study_grid(k, cfg, cfg.R_list.front());
  if (cfg.theta * cfg.R_list.front() < 10.0 * g.h) {
    throw ValidationError("theta: theta * R must cover at least 10 grid cells");
  }
  detail::parse_initial(cfg.u0);
}

/// I_R^A(x) = -(1/R) ln(v_R(R x) + e^{-R A}) on nodes with |x| <= theta.
inline std::vector<ProfilePoint> extract_rate_profile(const Field& deviation, double A,
                                                      double theta = 1.0) {
  if (!(A > 0.0)) throw ValidationError("A: must be positive");
  const Grid& g = deviation.grid;
  std::vector<ProfilePoint> out;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.x(i) / g.R;
    if (std::abs(x) > theta * (1.0 + 1e-12)) continue;
    const double v = std::max(deviation.values[i], 0.0);
    const double lv = v > 0.0 ? std::log(v) : -kInf;
    out.push_back({x, -detail::log_add(lv, -g.R * A) / g.R, deviation.values[i]});
  }
  return out;
}

/// Solves the u0 = 1 deviation problem at (R, t_phys) and extracts the profile.
inline std::vector<ProfilePoint> extract_rate_profile(const Kernel& k, double R, double t_phys,
                                                      double A, double theta = 1.0,
                                                      SolveConfig cfg = {}) {
  cfg.T = t_phys;
  const Field v = integrate_deviation(k, default_grid(k, R), cfg);
  return extract_rate_profile(v, A, theta);
}

namespace detail {

inline DeviationRow study_row(const Kernel& k, const StudyConfig& cfg, double R, double margin) {
  const Grid g = study_grid(k, cfg, R);
  SolveConfig sc;
  sc.T = cfg.t_phys;
  sc.dt = cfg.dt.value_or(0.0);
  sc.convolution = cfg.convolution;

  const InitialDatum u0 = parse_initial(cfg.u0);
  Field v;
  if (u0.constant_one) {
    v = integrate_deviation(k, g, sc);
  } else {
    const auto ref = reference_solution(k, g, u0, cfg.t_phys, margin, sc);
    const Field u = integrate(k, Field::sample(g, u0.f), sc);
    v = u;
    for (std::size_t i = 0; i < g.n; ++i) v.values[i] = std::abs(ref.field.values[i] - u.values[i]);
  }

  DeviationRow row;
  row.R = R;
  row.h = g.h;
  row.dt = effective_dt(k, sc);
  double sup = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (std::abs(g.x(i)) <= cfg.theta * R * (1.0 + 1e-12)) sup = std::max(sup, v.values[i]);
  }
  row.floored = sup < kDeviationFloor;
  row.sup_err = row.floored ? kDeviationFloor : sup;
  row.E = -std::log(row.sup_err);
  const auto b = bound(k, R, cfg.theta, cfg.t_phys);
  row.predicted_exponent = b.exponent;
  row.asymptotic_exponent = b.asymptotic_exponent;
  row.slack = (row.E - row.predicted_exponent) / R;
  row.profile = extract_rate_profile(v, cfg.A, cfg.theta);
  return row;
}

inline std::string format_g(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Runs one deviation solve per R (concurrently) and assembles the report.
inline DeviationReport run_study(const StudyConfig& cfg) {
  const Kernel k = parse_kernel_spec(cfg.kernel_spec);
  validate(cfg, k);
  const double margin = 2.0 * cfg.R_list.back();

  DeviationReport report;
  report.kernel = cfg.kernel_spec;
  report.theta = cfg.theta;
  report.t = cfg.t_phys;
  report.A = cfg.A;
  report.proxy_reference = !detail::parse_initial(cfg.u0).constant_one;

  const unsigned workers =
      cfg.workers > 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  report.rows.resize(cfg.R_list.size());
  for (std::size_t start = 0; start < cfg.R_list.size(); start += workers) {
    std::vector<std::future<DeviationRow>> batch;
    const std::size_t end = std::min(cfg.R_list.size(), start + workers);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, detail::study_row, std::cref(k),
                                 std::cref(cfg), cfg.R_list[i], margin));
    }
    for (std::size_t i = start; i < end; ++i) report.rows[i] = batch[i - start].get();
  }

  double num = 0.0, den = 0.0;
  for (const auto& row : report.rows) {
    num += row.R * (row.E - row.predicted_exponent);
    den += row.R * row.R;
  }
  report.fitted_slack = num / den;
  return report;
}

inline nlohmann::json to_json(const DeviationReport& r) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"R", row.R},
                    {"h", row.h},
                    {"dt", row.dt},
                    {"sup_err", row.sup_err},
                    {"E", row.E},
                    {"predicted_exponent", row.predicted_exponent},
                    {"asymptotic_exponent", num(row.asymptotic_exponent)},
                    {"slack", row.slack},
                    {"floored", row.floored}});
  }
  return {{"kernel", r.kernel},
          {"theta", r.theta},
          {"t", r.t},
          {"A", r.A},
          {"proxy_reference", r.proxy_reference},
          {"fitted_slack", r.fitted_slack},
          {"rows", rows},
          {"profile_files", r.profile_files}};
}

inline void write_summary_csv(std::ostream& os, const DeviationReport& r) {
  os << "R,h,dt,sup_err,E,predicted_exponent,asymptotic_exponent,slack,floored\n";
  for (const auto& row : r.rows) {
    using detail::format_g;
    os << format_g(row.R) << ',' << format_g(row.h) << ',' << format_g(row.dt) << ','
       << format_g(row.sup_err) << ',' << format_g(row.E) << ','
       << format_g(row.predicted_exponent) << ',' << format_g(row.asymptotic_exponent) << ','
       << format_g(row.slack) << ',' << (row.floored ? "true" : "false") << '\n';
  }
}

inline void write_profile_csv(std::ostream& os, const DeviationRow& row, double A) {
  os << "# R=" << detail::format_g(row.R) << " A=" << detail::format_g(A) << "\n";
  os << "x,I_R_A,v_R\n";
  for (const auto& p : row.profile) {
    os << detail::format_g(p.x) << ',' << detail::format_g(p.value) << ','
       << detail::format_g(p.deviation) << '\n';
  }
}

/// Writes summary.csv, profile_R<R>.csv and report.json into dir and records
/// the profile paths in the report.
inline void write_study_outputs(DeviationReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  r.profile_files.clear();
  for (const auto& row : r.rows) {
    const fs::path p = fs::path(dir) / ("profile_R" + detail::format_number(row.R) + ".csv");
    std::ofstream out(p);
    if (!out) throw ValidationError("out: cannot write " + p.string());
    write_profile_csv(out, row, r.A);
    r.profile_files.push_back(p.string());
  }
  {
    std::ofstream out(fs::path(dir) / "summary.csv");
    if (!out) throw ValidationError("out: cannot write summary.csv in " + dir);
    write_summary_csv(out, r);
  }
  std::ofstream out(fs::path(dir) / "report.json");
  out << to_json(r).dump(2) << '\n';
}

/// Flat key=value configuration; '#' starts a comment.
inline std::map<std::string, std::string> parse_flat_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(number) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline void apply_config(const std::map<std::string, std::string>& kv, StudyConfig& cfg) {
  using detail::parse_number;
  for (const auto& [key, value] : kv) {
    if (key == "kernel") cfg.kernel_spec = value;
    else if (key == "R") cfg.R_list = detail::parse_list(value, "R");
    else if (key == "theta") cfg.theta = parse_number(value, "theta");
    else if (key == "t") cfg.t_phys = parse_number(value, "t");
    else if (key == "h") cfg.h = parse_number(value, "h");
    else if (key == "dt") cfg.dt = parse_number(value, "dt");
    else if (key == "A") cfg.A = parse_number(value, "A");
    else if (key == "out") cfg.output_dir = value;
    else if (key == "u0") cfg.u0 = value;
    else if (key == "workers") cfg.workers = static_cast<unsigned>(parse_number(value, "workers"));
    else if (key == "convolution") {
      if (value == "direct") cfg.convolution = ConvolutionMethod::Direct;
      else if (value == "fft") cfg.convolution = ConvolutionMethod::FastTransform;
      else throw ValidationError("convolution: expected 'direct' or 'fft'");
    } else {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
}

}  // namespace nlrate
