// nlrate: command line front end for the nlrate library.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlrate/nlrate.hpp"

namespace {

using namespace nlrate;

constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;

// "lo:hi:n" -> n evenly spaced values.
std::vector<double> parse_range(const std::string& text, const std::string& field) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    parts.push_back(detail::parse_number(text.substr(start, colon - start), field));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2])) {
    throw ValidationError(field + ": expected lo:hi:n");
  }
  const auto n = static_cast<int>(parts[2]);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(n == 1 ? parts[0] : parts[0] + (parts[1] - parts[0]) * i / (n - 1));
  }
  return out;
}

std::vector<double> values_from(const std::string& list, const std::string& range,
                                const std::string& field) {
  if (!list.empty() && !range.empty()) throw ValidationError(field + ": give a list or a range, not both");
  if (!range.empty()) return parse_range(range, field);
  if (list.empty()) throw ValidationError(field + ": no values given");
  return detail::parse_list(list, field);
}

void print_row(const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    std::printf(i ? ",%.17g" : "%.17g", row[i]);
  }
  std::printf("\n");
}

ConvolutionMethod parse_convolution(const std::string& s) {
  if (s == "direct") return ConvolutionMethod::Direct;
  if (s == "fft") return ConvolutionMethod::FastTransform;
  throw ValidationError("convolution: expected 'direct' or 'fft', got '" + s + "'");
}

struct HamiltonianArgs {
  std::string kernel = "uniform";
  std::string p, range;
  bool quadrature = false;
};

void run_hamiltonian(const HamiltonianArgs& a) {
  const Kernel k = parse_kernel_spec(a.kernel);
  const auto ps = values_from(a.p, a.range, "p");
  std::printf("p,H,dH,d2H,method\n");
  for (double p : ps) {
    const auto h = h_value(k, p, a.quadrature ? EvalMode::ForceQuadrature : EvalMode::Auto);
    std::printf("%.17g,%.17g,%.17g,%.17g,%s\n", p, h.value, h.deriv, h.second,
                h.method == HamiltonianMethod::ClosedForm ? "closed" : "quadrature");
  }
}

struct LegendreArgs {
  std::string kernel = "uniform";
  std::string q, range;
  bool law = false;
};

void run_legendre(const LegendreArgs& a) {
  const Kernel k = parse_kernel_spec(a.kernel);
  const auto qs = values_from(a.q, a.range, "q");
  if (a.law) {
    const auto law = asymptotic_ratio(k, qs);
    std::printf("# law=%s expected_limit=%.10g\n", law.formula.c_str(), law.expected_limit);
    std::printf("q,p0,L,law,ratio\n");
    for (const auto& s : law.samples) {
      print_row({s.q, conjugate(k, s.q).p0, s.value, s.law, s.ratio});
    }
    return;
  }
  std::printf("q,p0,L,iterations,saturated\n");
  for (double q : qs) {
    const auto lp = conjugate(k, q);
    std::printf("%.17g,%.17g,%.17g,%d,%d\n", q, lp.p0, lp.value, lp.iterations, lp.saturated ? 1 : 0);
  }
}

struct RateArgs {
  std::string kernel = "uniform";
  std::string x = "0";
  double t = 0.1;
  std::optional<double> A;
  std::optional<double> R;
  double theta = 0.8;
};

void run_rate(const RateArgs& a) {
  const Kernel k = parse_kernel_spec(a.kernel);
  if (a.R) {
    const auto b = bound(k, *a.R, a.theta, a.t);
    std::printf("R,theta,t,exponent,bound,asymptotic_exponent\n");
    print_row({b.R, b.theta, b.t_phys, b.exponent, b.bound, b.asymptotic_exponent});
    return;
  }
  const auto xs = detail::parse_list(a.x, "x");
  std::printf(a.A ? "x,t,rate,rate_capped\n" : "x,t,rate\n");
  for (double x : xs) {
    if (a.A) {
      print_row({x, a.t, rate(k, x, a.t), rate_capped(k, x, a.t, *a.A)});
    } else {
      print_row({x, a.t, rate(k, x, a.t)});
    }
  }
}

struct SolveArgs {
  std::string kernel = "uniform";
  double R = 10.0;
  double T = 0.1;
  std::optional<double> h;
  std::optional<double> dt;
  std::string u0 = "one";
  std::string integrator = "rk4";
  std::string convolution = "direct";
  bool deviation = false;
  bool no_mass_correction = false;
  std::string out;
};

void run_solve(const SolveArgs& a) {
  const Kernel k = parse_kernel_spec(a.kernel);
  const Grid g = a.h ? aligned_grid(k, a.R, *a.h) : default_grid(k, a.R);
  SolveConfig cfg;
  cfg.T = a.T;
  cfg.dt = a.dt.value_or(0.0);
  cfg.convolution = parse_convolution(a.convolution);
  cfg.mass_correction = !a.no_mass_correction;
  if (a.integrator == "dopri") {
    cfg.integrator = Integrator::DormandPrince;
  } else if (a.integrator != "rk4") {
    throw ValidationError("integrator: expected 'rk4' or 'dopri', got '" + a.integrator + "'");
  }
  if (!(a.T > 0.0)) throw ValidationError("T: must be positive");

  Field result;
  std::string name = "u";
  if (a.deviation) {
    if (a.u0 != "one") throw ValidationError("deviation: only defined for u0=one");
    result = integrate_deviation(k, g, cfg);
    result.time = a.T;
    name = "v";
  } else {
    result = integrate(k, Field::sample(g, detail::parse_initial(a.u0).f), cfg);
  }

  const double dt = cfg.integrator == Integrator::RK4 ? effective_dt(k, cfg) : 0.0;
  if (a.out.empty()) {
    write_field_csv(std::cout, result, k.describe(), dt, name);
  } else {
    std::ofstream f(a.out);
    if (!f) throw ValidationError("out: cannot open '" + a.out + "'");
    write_field_csv(f, result, k.describe(), dt, name);
  }
}

struct StudyArgs {
  std::string config;
  std::string kernel, R, convolution, u0, out;
  std::optional<double> theta, t, h, dt, A;
  std::optional<unsigned> workers;
};

void run_study_cmd(const StudyArgs& a) {
  StudyConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw ValidationError("config: cannot open '" + a.config + "'");
    apply_config(parse_flat_config(in), cfg);
  }
  // Flags override the file.
  if (!a.kernel.empty()) cfg.kernel_spec = a.kernel;
  if (!a.R.empty()) cfg.R_list = detail::parse_list(a.R, "R");
  if (a.theta) cfg.theta = *a.theta;
  if (a.t) cfg.t_phys = *a.t;
  if (a.h) cfg.h = a.h;
  if (a.dt) cfg.dt = a.dt;
  if (a.A) cfg.A = *a.A;
  if (!a.u0.empty()) cfg.u0 = a.u0;
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (!a.convolution.empty()) cfg.convolution = parse_convolution(a.convolution);
  if (a.workers) cfg.workers = *a.workers;

  auto report = run_study(cfg);
  if (!cfg.output_dir.empty()) write_study_outputs(report, cfg.output_dir);
  std::cout << to_json(report).dump(2) << "\n";
}

int run_selftest(const std::vector<std::string>& suites) {
  int failed = 0;
  for (const auto& r : run_property_suites(suites)) {
    std::printf("%s  %s  (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.passed) ++failed;
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-local diffusion on bounded domains: Hamiltonians, Legendre transforms, rate functions and convergence studies"};
  app.require_subcommand(1);

  HamiltonianArgs ha;
  auto* ham = app.add_subcommand("hamiltonian", "Tabulate H, H' and H'' over p");
  ham->add_option("--kernel,-k", ha.kernel, "Kernel spec, e.g. uniform:eta=1");
  ham->add_option("--p", ha.p, "Comma-separated p values");
  ham->add_option("--range", ha.range, "lo:hi:n");
  ham->add_flag("--quadrature", ha.quadrature, "Force quadrature even when a closed form exists");

  LegendreArgs la;
  auto* leg = app.add_subcommand("legendre", "Tabulate L and the maximizer p0 over q");
  leg->add_option("--kernel,-k", la.kernel, "Kernel spec");
  leg->add_option("--q", la.q, "Comma-separated q values");
  leg->add_option("--range", la.range, "lo:hi:n");
  leg->add_flag("--law", la.law, "Append the large-q law and the ratio L/law");

  RateArgs ra;
  auto* rat = app.add_subcommand("rate", "Evaluate the rate function or the deviation bound");
  rat->add_option("--kernel,-k", ra.kernel, "Kernel spec");
  rat->add_option("--x", ra.x, "Comma-separated points in [-1, 1]");
  rat->add_option("--t", ra.t, "Time");
  rat->add_option("--A", ra.A, "Cap for the capped rate");
  rat->add_option("--R", ra.R, "Domain radius: print the bound at theta instead");
  rat->add_option("--theta", ra.theta, "Relative position for the bound");

  SolveArgs sa;
  auto* sol = app.add_subcommand("solve", "Single solve, CSV field dump");
  sol->set_help_flag("--help", "Print this help message and exit");
  sol->add_option("--kernel,-k", sa.kernel, "Kernel spec");
  sol->add_option("--R", sa.R, "Domain radius");
  sol->add_option("--T", sa.T, "Final time");
  sol->add_option("--h", sa.h, "Maximum grid spacing");
  sol->add_option("--dt", sa.dt, "Time step");
  sol->add_option("--u0", sa.u0, "one or bump:<width>");
  sol->add_option("--integrator", sa.integrator, "rk4 or dopri");
  sol->add_option("--convolution", sa.convolution, "direct or fft");
  sol->add_flag("--deviation", sa.deviation, "Solve for 1 - u directly (u0 = one)");
  sol->add_flag("--no-mass-correction", sa.no_mass_correction, "Use the raw trapezoid weights");
  sol->add_option("--out,-o", sa.out, "Output CSV file (default stdout)");

  StudyArgs st;
  auto* stu = app.add_subcommand("study", "Convergence study over a list of R, JSON report");
  stu->set_help_flag("--help", "Print this help message and exit");
  stu->add_option("--config", st.config, "Flat key=value config file");
  stu->add_option("--kernel,-k", st.kernel, "Kernel spec");
  stu->add_option("--R", st.R, "Comma-separated radii");
  stu->add_option("--theta", st.theta, "Relative window for the sup");
  stu->add_option("--t", st.t, "Physical time");
  stu->add_option("--h", st.h, "Maximum grid spacing");
  stu->add_option("--dt", st.dt, "Time step");
  stu->add_option("--A", st.A, "Cap for the rate profile");
  stu->add_option("--u0", st.u0, "one or bump:<width>");
  stu->add_option("--convolution", st.convolution, "direct or fft");
  stu->add_option("--workers", st.workers, "Concurrent solves");
  stu->add_option("--out,-o", st.out, "Directory for CSV and JSON outputs");

  std::vector<std::string> suites;
  auto* self = app.add_subcommand("selftest", "Run the invariant suites");
  self->add_option("--suite", suites, "kernel, hamiltonian, legendre, ratefn, solver (default all)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*ham) run_hamiltonian(ha);
    if (*leg) run_legendre(la);
    if (*rat) run_rate(ra);
    if (*sol) run_solve(sa);
    if (*stu) run_study_cmd(st);
    if (*self) return run_selftest(suites);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
