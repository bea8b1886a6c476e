#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlrate/errors.hpp"

namespace nlrate {

enum class KernelFamily {
  UniformCompact,
  PolynomialCompact,
  Gaussian,
  StretchedExp,
  CriticalExp,
  SingularCompact,
  Custom,
};

inline std::string_view family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::UniformCompact: return "uniform";
    case KernelFamily::PolynomialCompact: return "polynomial";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::StretchedExp: return "stretched";
    case KernelFamily::CriticalExp: return "critical";
    case KernelFamily::SingularCompact: return "singular";
    case KernelFamily::Custom: return "custom";
  }
  return "unknown";
}

namespace detail {

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline double parse_number(std::string_view text, std::string_view what) {
  std::string s(text);
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("cannot parse " + std::string(what) + " from '" + s + "'");
  }
  return v;
}

// Piecewise-linear table on y >= 0, sorted by y.
struct Table {
  std::vector<double> y;
  std::vector<double> j;

  double at(double ay) const {
    if (ay <= y.front()) return j.front();
    if (ay > y.back()) return 0.0;
    const auto it = std::upper_bound(y.begin(), y.end(), ay);
    const std::size_t hi = static_cast<std::size_t>(it - y.begin());
    if (hi >= y.size()) return j.back();
    const std::size_t lo = hi - 1;
    const double w = (ay - y[lo]) / (y[hi] - y[lo]);
    return (1.0 - w) * j[lo] + w * j[hi];
  }
};

}  // namespace detail

/// A symmetric jump density J on the real line.
///
/// Built-in families carry closed forms for evaluation and mass. Custom kernels
/// are tabulated on y >= 0 and linearly interpolated; the declared support
/// radius and singularity order are taken at face value.
class Kernel {
 public:
  static Kernel uniform(double eta = 1.0) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
      throw ValidationError("uniform kernel: eta must be a positive finite number");
    }
    Kernel k(KernelFamily::UniformCompact);
    k.params_["eta"] = eta;
    k.support_ = eta;
    return k;
  }

  static Kernel polynomial() {
    Kernel k(KernelFamily::PolynomialCompact);
    k.support_ = 2.0;
    return k;
  }

  static Kernel gaussian() { return Kernel(KernelFamily::Gaussian); }

  /// exp(-|y|^alpha), deliberately left unnormalized.
  static Kernel stretched_exp(double alpha) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
      throw ValidationError("stretched kernel: alpha must be > 1");
    }
    Kernel k(KernelFamily::StretchedExp);
    k.params_["alpha"] = alpha;
    return k;
  }

  static Kernel critical_exp() { return Kernel(KernelFamily::CriticalExp); }

  /// |y|^(-1-alpha) on [-1, 1]; a Levy density that is not integrable at 0.
  static Kernel singular_compact(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
      throw ValidationError("singular kernel: alpha must lie in (0, 2)");
    }
    Kernel k(KernelFamily::SingularCompact);
    k.params_["alpha"] = alpha;
    k.support_ = 1.0;
    k.singularity_ = alpha;
    return k;
  }

  /// Tabulated kernel. Rows with y < 0 must mirror the y > 0 rows.
  static Kernel custom(std::vector<double> y, std::vector<double> j, double support,
                       double singularity = 0.0, double decay_rate = kInf) {
    if (y.size() != j.size() || y.size() < 2) {
      throw ValidationError("custom kernel: need at least two (y, J) rows of equal length");
    }
    if (!(support > 0.0)) throw ValidationError("custom kernel: support must be positive");
    if (!(singularity >= 0.0 && singularity < 2.0)) {
      throw ValidationError("custom kernel: singularity must lie in [0, 2)");
    }
    if (!(decay_rate > 0.0)) throw ValidationError("custom kernel: decay must be positive");
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!std::isfinite(y[i]) || !std::isfinite(j[i]) || j[i] < 0.0) {
        throw ValidationError("custom kernel: J must be finite and non-negative");
      }
      rows.emplace_back(y[i], j[i]);
    }
    std::sort(rows.begin(), rows.end());
    auto table = std::make_shared<detail::Table>();
    for (auto [yy, jj] : rows) {
      if (yy < 0.0) continue;
      if (!table->y.empty() && yy == table->y.back()) {
        throw ValidationError("custom kernel: duplicate y value");
      }
      table->y.push_back(yy);
      table->j.push_back(jj);
    }
    if (table->y.size() < 2) throw ValidationError("custom kernel: need two rows with y >= 0");
    for (auto [yy, jj] : rows) {
      if (yy >= 0.0) break;
      const double mirror = table->at(-yy);
      if (std::abs(mirror - jj) > 1e-9 * std::max(1.0, std::abs(jj))) {
        throw ValidationError("custom kernel: table is not symmetric in y");
      }
    }
    Kernel k(KernelFamily::Custom);
    k.table_ = std::move(table);
    k.support_ = std::min(support, k.table_->y.back());
    k.singularity_ = singularity;
    k.decay_rate_ = decay_rate;
    return k;
  }

  KernelFamily family() const noexcept { return family_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  double param(const std::string& name) const {
    const auto it = params_.find(name);
    if (it == params_.end()) {
      throw ValidationError(std::string(family_name(family_)) + " kernel has no parameter '" +
                            name + "'");
    }
    return it->second;
  }

  double support_radius() const noexcept { return support_; }
  bool compact() const noexcept { return std::isfinite(support_); }
  double singularity_order() const noexcept { return singularity_; }
  bool singular() const noexcept { return singularity_ > 0.0; }
  /// Exponential decay rate declared for a custom kernel; +inf otherwise.
  double declared_decay_rate() const noexcept { return decay_rate_; }

  double eval(double y) const {
    const double ay = std::abs(y);
    if (singular() && ay == 0.0) {
      throw std::domain_error("kernel is singular at the origin");
    }
    if (ay > support_) return 0.0;
    switch (family_) {
      case KernelFamily::UniformCompact: {
        const double eta = params_.at("eta");
        return ay < eta ? 0.5 / eta : 0.0;
      }
      case KernelFamily::PolynomialCompact:
        return ay < 2.0 ? -(3.0 / 32.0) * (ay - 2.0) * (ay + 2.0) : 0.0;
      case KernelFamily::Gaussian:
        return std::exp(-0.5 * ay * ay) / std::sqrt(2.0 * std::numbers::pi);
      case KernelFamily::StretchedExp:
        return std::exp(-std::pow(ay, params_.at("alpha")));
      case KernelFamily::CriticalExp:
        return 0.5 * std::exp(-ay);
      case KernelFamily::SingularCompact:
        return std::pow(ay, -1.0 - params_.at("alpha"));
      case KernelFamily::Custom:
        return table_->at(ay);
    }
    return 0.0;
  }

  /// ln J(y); -inf where J vanishes. Accurate far into the tails where eval underflows.
  double log_eval(double y) const {
    const double ay = std::abs(y);
    switch (family_) {
      case KernelFamily::Gaussian:
        return -0.5 * ay * ay - 0.5 * std::log(2.0 * std::numbers::pi);
      case KernelFamily::StretchedExp:
        return -std::pow(ay, params_.at("alpha"));
      case KernelFamily::CriticalExp:
        return std::log(0.5) - ay;
      default: {
        const double v = eval(y);
        return v > 0.0 ? std::log(v) : -kInf;
      }
    }
  }

  /// lim J(y) as y approaches the support radius from inside.
  double edge_value() const {
    if (!compact()) return 0.0;
    switch (family_) {
      case KernelFamily::UniformCompact: return 0.5 / params_.at("eta");
      case KernelFamily::PolynomialCompact: return 0.0;
      case KernelFamily::SingularCompact: return 1.0;
      default: return eval(support_);
    }
  }

  /// Total mass; +inf for kernels singular at the origin.
  double mass() const {
    if (singular()) return kInf;
    switch (family_) {
      case KernelFamily::UniformCompact:
      case KernelFamily::PolynomialCompact:
      case KernelFamily::Gaussian:
      case KernelFamily::CriticalExp:
        return 1.0;
      case KernelFamily::StretchedExp:
        return 2.0 * std::tgamma(1.0 + 1.0 / params_.at("alpha"));
      case KernelFamily::Custom: {
        // Exact integral of the interpolant, doubled for y < 0.
        const auto& t = *table_;
        double m = t.y.front() * t.j.front();
        for (std::size_t i = 0; i + 1 < t.y.size(); ++i) {
          const double hi = std::min(t.y[i + 1], support_);
          const double lo = t.y[i];
          if (hi <= lo) break;
          const double jhi = t.at(hi);
          m += 0.5 * (hi - lo) * (t.j[i] + jhi);
        }
        return 2.0 * m;
      }
      case KernelFamily::SingularCompact:
        return kInf;
    }
    return kInf;
  }

  /// Canonical spec string, e.g. "uniform:eta=1".
  std::string describe() const {
    std::string s(family_name(family_));
    if (family_ == KernelFamily::Custom) {
      s += ":support=" + detail::format_number(support_) +
           ",singularity=" + detail::format_number(singularity_);
      if (std::isfinite(decay_rate_)) s += ",decay=" + detail::format_number(decay_rate_);
      return s;
    }
    char sep = ':';
    for (const auto& [name, value] : params_) {
      s += sep;
      s += name + "=" + detail::format_number(value);
      sep = ',';
    }
    return s;
  }

 private:
  explicit Kernel(KernelFamily f) : family_(f) {}

  KernelFamily family_;
  std::map<std::string, double> params_;
  double support_ = kInf;
  double singularity_ = 0.0;
  double decay_rate_ = kInf;
  std::shared_ptr<const detail::Table> table_;
};

/// Reads the two-column (y, J) CSV. The first line must be
/// `# support=<r> singularity=<s>` with an optional `decay=<rate>`.
inline Kernel load_custom_kernel(std::istream& in) {
  std::string line;
  double support = -1.0;
  double singularity = 0.0;
  double decay = kInf;
  bool header = false;
  std::vector<double> ys;
  std::vector<double> js;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      std::istringstream words(line.substr(1));
      std::string word;
      while (words >> word) {
        const auto eq = word.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = word.substr(0, eq);
        const std::string val = word.substr(eq + 1);
        if (key == "support") {
          support = detail::parse_number(val, "support");
          header = true;
        } else if (key == "singularity") {
          singularity = detail::parse_number(val, "singularity");
        } else if (key == "decay") {
          decay = detail::parse_number(val, "decay");
        }
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("custom kernel: expected 'y,J' row");
    const std::string_view first(line.data(), comma);
    // A column-name row such as "y,J" is tolerated.
    if (ys.empty() && first.find_first_of("0123456789") == std::string_view::npos) continue;
    ys.push_back(detail::parse_number(first, "y"));
    js.push_back(detail::parse_number(std::string_view(line).substr(comma + 1), "J"));
  }
  if (!header) throw ValidationError("custom kernel: missing '# support=<r>' header");
  return Kernel::custom(std::move(ys), std::move(js), support, singularity, decay);
}

inline Kernel load_custom_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("custom kernel: cannot open '" + path + "'");
  return load_custom_kernel(in);
}

/// Parses "family[:key=value,...]", e.g. "uniform:eta=2", "stretched:alpha=2",
/// "singular:alpha=0.5", "custom:file=kernel.csv".
inline Kernel parse_kernel_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string name(spec.substr(0, colon));
  std::map<std::string, std::string> kv;
  if (colon != std::string_view::npos) {
    std::string rest(spec.substr(colon + 1));
    std::istringstream items(rest);
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw ValidationError("kernel: expected key=value in '" + item + "'");
      }
      kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto number = [&](const std::string& key, std::optional<double> fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      if (fallback) return *fallback;
      throw ValidationError("kernel: '" + name + "' requires " + key + "=<value>");
    }
    return detail::parse_number(it->second, "kernel." + key);
  };
  if (name == "uniform") return Kernel::uniform(number("eta", 1.0));
  if (name == "polynomial") return Kernel::polynomial();
  if (name == "gaussian") return Kernel::gaussian();
  if (name == "stretched") return Kernel::stretched_exp(number("alpha", std::nullopt));
  if (name == "critical") return Kernel::critical_exp();
  if (name == "singular") return Kernel::singular_compact(number("alpha", std::nullopt));
  if (name == "custom") {
    const auto it = kv.find("file");
    if (it == kv.end()) throw ValidationError("kernel: 'custom' requires file=<path>");
    return load_custom_kernel(it->second);
  }
  if (name == "fractional") {
    throw ValidationError(
        "kernel: the fractional Laplacian density |y|^(-1-alpha) has an infinite "
        "Hamiltonian for every p != 0 and is not supported");
  }
  throw ValidationError("kernel: unknown family '" + name + "'");
}

}  // namespace nlrate
