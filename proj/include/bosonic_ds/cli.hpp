// Copyright 2026 The bosonic-ds Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 1 configuration or I/O
// error, 2 a checked invariant failed.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bosonic_ds/classifier.hpp"
#include "bosonic_ds/fixtures.hpp"
#include "bosonic_ds/io.hpp"

namespace bosonic_ds {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInvariant = 2 };

// State specs:
//   "vacuum", "fock:M", "thermal:NBAR", "displaced:Q,P[,Q,P...]", "file:PATH"
//   {"gaussian": {"d": [...], "gamma": [[...]]}}
//   {"density": {"modes", "cutoff", "real", "imag"}}
//   {"mixture": [{"weight": W, "state": SPEC}, ...]}
// A file holds either a density or a gaussian object.
inline FockOperator state_from_spec(const Json& spec, const FockSpace& space, const std::filesystem::path& base = {},
                                    const Tolerances& tol = {}) {
  auto as_double = [](const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw IoError("state spec: bad number \"" + s + "\" in " + what);
    return v;
  };
  auto from_object = [&](const Json& obj) -> FockOperator {
    if (obj.contains("gaussian")) return gaussian_to_fock(gaussian_from_json(obj.at("gaussian")), space, {}, tol);
    if (obj.contains("density") || obj.contains("real")) {
      FockOperator rho = density_from_json(obj.contains("density") ? obj.at("density") : obj, tol);
      if (!(rho.space == space)) throw DimensionError("state spec: density file does not match modes and cutoff");
      return rho;
    }
    if (obj.contains("mixture")) {
      std::vector<std::pair<double, FockOperator>> parts;
      for (const Json& part : obj.at("mixture")) {
        if (!part.contains("weight") || !part.contains("state")) throw IoError("mixture entries need weight and state");
        parts.emplace_back(to_double(part.at("weight"), "mixture.weight"), state_from_spec(part.at("state"), space, base, tol));
      }
      return mixture(parts);
    }
    if (obj.contains("gamma")) return gaussian_to_fock(gaussian_from_json(obj), space, {}, tol);
    throw IoError("state spec: unknown object form");
  };

  if (spec.is_object()) return from_object(spec);
  if (!spec.is_string()) throw IoError("state spec must be a string or an object");
  const std::string s = spec.get<std::string>();
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (kind == "vacuum") return vacuum_state(space);
  if (kind == "fock") return fock_state(space, static_cast<int>(as_double(arg, s)));
  if (kind == "thermal") return thermal_state(space, as_double(arg, s), tol);
  if (kind == "displaced") {
    std::vector<double> vals;
    std::stringstream ss(arg);
    for (std::string item; std::getline(ss, item, ',');) vals.push_back(as_double(item, s));
    RealVector d(2 * space.modes);
    if (vals.size() == 2) {
      for (int j = 0; j < space.modes; ++j) d.segment(2 * j, 2) << vals[0], vals[1];
    } else if (static_cast<Index>(vals.size()) == d.size()) {
      for (Index k = 0; k < d.size(); ++k) d(k) = vals[static_cast<std::size_t>(k)];
    } else {
      throw IoError("state spec: displaced needs 2 or 2n values");
    }
    return displaced_vacuum(space, d, tol);
  }
  if (kind == "file") {
    std::filesystem::path p(arg);
    if (p.is_relative() && !base.empty()) p = base / p;
    return from_object(read_json_file(p.string()));
  }
  throw IoError("state spec: unknown kind \"" + kind + "\"");
}

/// Parsed ds-run configuration.
struct RunConfig {
  Json state1, state2;
  std::vector<double> thetas;
  int cutoff = 0;
  int modes = 1;
  std::optional<std::uint64_t> seed;
  ExperimentConfig experiment;
  std::filesystem::path base;
  std::string out;
};

inline RunConfig parse_run_config(const Json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw IoError("config must be a JSON object");
  RunConfig c;
  c.base = base;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const Json& v = it.value();
    if (k == "state1") c.state1 = v;
    else if (k == "state2") c.state2 = v;
    else if (k == "theta") c.thetas = {to_double(v, "theta")};
    else if (k == "thetas") {
      c.thetas.clear();
      for (const Json& t : v) c.thetas.push_back(to_double(t, "thetas"));
    } else if (k == "cutoff") c.cutoff = v.get<int>();
    else if (k == "modes") c.modes = v.get<int>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else if (k == "synthesis_cutoff") c.experiment.synthesis_cutoff = v.get<int>();
    else if (k == "max_synthesis_cutoff") c.experiment.max_synthesis_cutoff = v.get<int>();
    else if (k == "kappa_samples") c.experiment.moment_options.kappa_samples = v.get<int>();
    else if (k == "refine_steps") c.experiment.moment_options.refine_steps = v.get<int>();
    else if (k == "compute_ds_residual") c.experiment.compute_ds_residual = v.get<bool>();
    else if (k == "margin_slack") {
      c.experiment.margin_slack = to_double(v, "margin_slack");
      if (!(c.experiment.margin_slack >= 0.0)) throw ValidationError("config: margin_slack must be non-negative");
    }
    else if (k == "tolerances") apply_tolerances(v, c.experiment.tolerances);
    else if (k == "ds_grid") {
      if (v.contains("extent")) c.experiment.ds_geometry.extent = to_double(v.at("extent"), "ds_grid.extent");
      if (v.contains("points")) c.experiment.ds_geometry.points = v.at("points").get<int>();
      if (v.contains("chi_extent")) c.experiment.ds_geometry.chi_extent = to_double(v.at("chi_extent"), "ds_grid.chi_extent");
    } else if (k == "out") c.out = v.get<std::string>();
    else throw IoError("config: unknown field \"" + k + "\"");
  }
  return c;
}

namespace detail {

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

inline std::string with_newline(std::string s) {
  if (s.empty() || s.back() != '\n') s += '\n';
  return s;
}

}  // namespace detail

struct CommonOptions {
  std::string config;
  std::optional<double> theta;
  std::optional<int> cutoff;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

/// 0 when every report passed its checks, 2 otherwise.
inline int exit_code_for(const std::vector<StabilityReport>& reports) {
  for (const auto& r : reports)
    if (!r.ok()) return kExitInvariant;
  return kExitOk;
}

inline int cmd_ds_run(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  if (o.config.empty()) throw IoError("ds-run: --config is required");
  const std::filesystem::path cfg_path(o.config);
  RunConfig rc = parse_run_config(read_json_file(o.config), cfg_path.parent_path());
  if (o.theta) rc.thetas = {*o.theta};
  if (o.cutoff) rc.cutoff = *o.cutoff;
  if (o.seed) rc.seed = *o.seed;
  if (rc.state1.is_null() || rc.state2.is_null()) throw IoError("ds-run: config needs state1 and state2");
  if (rc.thetas.empty()) throw IoError("ds-run: theta is required");
  if (rc.cutoff < 2) throw IoError("ds-run: cutoff (>= 2) is required");
  if (!rc.seed) throw IoError("ds-run: a seed is required (kappa is estimated by sampling)");
  rc.experiment.moment_options.seed = *rc.seed;

  const FockSpace space{rc.modes, rc.cutoff};
  const Tolerances& tol = rc.experiment.tolerances;
  const FockOperator r1 = state_from_spec(rc.state1, space, rc.base, tol);
  const FockOperator r2 = state_from_spec(rc.state2, space, rc.base, tol);

  std::vector<StabilityReport> reports;
  for (double th : rc.thetas) reports.push_back(run_experiment(r1, r2, th, rc.experiment));

  const Json input = {{"state1", rc.state1}, {"state2", rc.state2}, {"modes", rc.modes},
                      {"cutoff", rc.cutoff}, {"seed", *rc.seed}};
  std::string text;
  if (o.format == "csv") {
    text = sweep_csv(reports);
  } else {
    Json doc;
    if (reports.size() == 1) {
      doc = report_to_json(reports.front());
      doc["input"] = input;
    } else {
      doc = {{"input", input}, {"reports", Json::array()}};
      for (const auto& r : reports) doc["reports"].push_back(report_to_json(r));
    }
    text = detail::with_newline(dump(doc));
  }
  detail::emit(text, o.out.empty() ? rc.out : o.out, out);

  for (const auto& r : reports)
    for (const auto& v : r.violations) err << "violation (theta = " << fmt17(r.theta) << "): " << v << "\n";
  return exit_code_for(reports);
}

struct ConstantsOptions {
  double theta_min = kPi / 4, theta_max = kPi / 4;
  int steps = 1;
  int n = 1;
  double kappa = 1.0;
};

inline int cmd_constants(const CommonOptions& o, const ConstantsOptions& c, std::ostream& out) {
  const double lo = o.theta ? *o.theta : c.theta_min;
  const double hi = o.theta ? *o.theta : c.theta_max;
  const int steps = o.theta ? 1 : c.steps;
  const auto rows = constants_sweep(theta_grid(lo, hi, steps), c.n, c.kappa);
  const std::string text = o.format == "json" ? detail::with_newline(dump(constants_to_json(rows))) : constants_csv(rows);
  detail::emit(text, o.out, out);
  return kExitOk;
}

inline int cmd_classify(const CommonOptions& o, const std::string& matrix_file, std::ostream& out) {
  Json j = read_json_file(matrix_file);
  if (j.is_object() && j.contains("matrix")) j = j.at("matrix");
  const RealMatrix s = real_matrix_from_json(j, "classify");
  const ClassificationResult r = classify(s);
  detail::emit(detail::with_newline(dump(classification_to_json(r))), o.out, out);
  return kExitOk;
}

inline int cmd_witness(const CommonOptions& o, const std::string& spec_text, int modes, double threshold,
                       std::ostream& out) {
  if (!o.theta) throw IoError("witness: --theta is required");
  if (is_trivial_splitter(*o.theta)) throw ValidationError("witness: trivial splitter (theta is a multiple of pi/2)");
  const int cutoff = o.cutoff.value_or(14);
  Json spec;
  if (!spec_text.empty() && (spec_text.front() == '{' || spec_text.front() == '"')) {
    spec = Json::parse(spec_text);
  } else {
    spec = spec_text;
  }
  const FockOperator rho = state_from_spec(spec, FockSpace{modes, cutoff});
  const WitnessResult w = nongaussianity_witness(rho, *o.theta, threshold);
  std::string text;
  if (o.format == "json") {
    text = detail::with_newline(dump(witness_to_json(w, *o.theta)));
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", w.epsilon);
    text = std::string(w.gaussian ? "gaussian" : "non-gaussian") + " (\xCE\xB5=" + buf + ")\n";
  }
  detail::emit(text, o.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest

struct SelftestExpectations {
  double vacuum_epsilon_max = 1e-8;
  double hom_epsilon = 1.5;
  double hom_tolerance = 1e-8;
  double c1_pi4 = 32.0 * std::sqrt(8.0 / kPi);
  double gaussian_pair_epsilon_max = 1e-6;
  double identity_rel_tol = 1e-4;
  double parseval_rel_tol = 1e-3;
  double moment_tol = 1e-4;
  double sigma_psd_tol = 1e-8;
  double classifier_alpha_tol = 1e-8;
  double classifier_residual_tol = 1e-9;
};

/// Reads overrides from a JSON object; unknown keys are an error.
inline SelftestExpectations load_expectations(const Json& j) {
  SelftestExpectations e;
  const std::pair<const char*, double*> fields[] = {
      {"vacuum_epsilon_max", &e.vacuum_epsilon_max},
      {"hom_epsilon", &e.hom_epsilon},
      {"hom_tolerance", &e.hom_tolerance},
      {"c1_pi4", &e.c1_pi4},
      {"gaussian_pair_epsilon_max", &e.gaussian_pair_epsilon_max},
      {"identity_rel_tol", &e.identity_rel_tol},
      {"parseval_rel_tol", &e.parseval_rel_tol},
      {"moment_tol", &e.moment_tol},
      {"sigma_psd_tol", &e.sigma_psd_tol},
      {"classifier_alpha_tol", &e.classifier_alpha_tol},
      {"classifier_residual_tol", &e.classifier_residual_tol}};
  if (!j.is_object()) throw IoError("selftest expectations must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& [name, ptr] : fields) {
      if (it.key() == name) {
        *ptr = to_double(it.value(), name);
        known = true;
      }
    }
    if (!known) throw IoError("selftest expectations: unknown field \"" + it.key() + "\"");
  }
  return e;
}

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::vector<SelftestCheck> run_selftest(const SelftestExpectations& e, std::uint64_t seed) {
  std::vector<SelftestCheck> out;
  auto check = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    try {
      auto [ok, detail] = fn();
      out.push_back({name, ok, detail});
    } catch (const std::exception& ex) {
      out.push_back({name, false, std::string("exception: ") + ex.what()});
    }
  };
  std::mt19937_64 rng(seed);
  ExperimentConfig quick;
  quick.moment_options.kappa_samples = 8;
  quick.moment_options.refine_steps = 4;
  quick.moment_options.seed = seed;

  check("vacuum_fixed_point", [&] {
    const FockSpace s{1, 6};
    const StabilityReport r = run_experiment(vacuum_state(s), vacuum_state(s), kPi / 4, quick);
    return std::pair{r.epsilon <= e.vacuum_epsilon_max && r.ok(), "eps = " + fmt17(r.epsilon)};
  });
  check("hom_product_defect", [&] {
    const FockSpace s{1, 6};
    const double eps = product_defect(evolve(beam_splitter_unitary(s, kPi / 4), tensor(fock_state(s, 1), fock_state(s, 1)))).epsilon;
    return std::pair{std::abs(eps - e.hom_epsilon) <= e.hom_tolerance, "eps = " + fmt17(eps)};
  });
  check("gaussian_pair_product", [&] {
    const FockSpace s{1, 12};
    const RealMatrix gamma = random_covariance(1, rng, 0.05, 0.3);
    RealVector d1(2), d2(2);
    d1 << 0.2, -0.1;
    d2 << -0.1, 0.25;
    const FockOperator r1 = gaussian_to_fock({d1, gamma}, s), r2 = gaussian_to_fock({d2, gamma}, s);
    const double eps = product_defect(evolve(beam_splitter_unitary(s, kPi / 3), tensor(r1, r2))).epsilon;
    return std::pair{eps <= e.gaussian_pair_epsilon_max, "eps = " + fmt17(eps)};
  });
  check("stability_bounds", [&] {
    const FockSpace s{1, 6};
    const FockOperator rp = mixture({{0.9, fock_state(s, 0)}, {0.1, fock_state(s, 2)}});
    const StabilityReport r = run_experiment(rp, vacuum_state(s), kPi / 4, quick);
    const bool ok = r.ok() && r.margin_dist_1 > 0 && r.margin_dist_2 > 0 && r.margin_cm > 0 && r.margin_v >= 0;
    return std::pair{ok, "margins " + fmt17(r.margin_dist_1) + ", " + fmt17(r.margin_cm)};
  });
  check("covariance_identity", [&] {
    const FockSpace s{1, 6};
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      auto random_state = [&] {
        ComplexMatrix a = ComplexMatrix::Zero(6, 6);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) a(i, j) = Complex(g(rng), g(rng));
        ComplexMatrix rho = a * a.adjoint();
        return FockOperator{s, ComplexMatrix(rho / rho.trace()), OperatorKind::density, {}};
      };
      const FockOperator r1 = random_state(), r2 = random_state();
      const double theta = kPi / 6 + t * kPi / 12;
      const FockOperator ab = evolve(beam_splitter_unitary(s, theta), tensor(r1, r2));
      const ProductDefect pd = product_defect(ab);
      const CrossCovariance cv = cross_covariance_V(ab, pd.rho_a, pd.rho_b, theta, 1.0);
      const GaussianState g1 = gaussify(r1), g2 = gaussify(r2);
      const RealMatrix sigma = symplectic_form(1);
      const RealMatrix lhs = sigma * (g1.gamma - g2.gamma) * sigma.transpose();
      const double res = max_abs(RealMatrix(lhs - (2.0 / std::pow(std::cos(theta), 2)) * cv.v.real()));
      worst = std::max(worst, res / (1.0 + g1.gamma.norm()));
    }
    return std::pair{worst <= e.identity_rel_tol, "worst scaled residual " + fmt17(worst)};
  });
  check("parseval_isometry", [&] {
    const FockSpace s{1, 14};
    const FockOperator a = fock_state(s, 1), b = thermal_state(s, 0.5);
    const GridGeometry geom{1, 6.0, 97};
    const double quad = parseval_distance(char_grid(a, geom), char_grid(b, geom));
    const double hs = std::pow(hs_norm(ComplexMatrix(a.matrix - b.matrix)), 2);
    return std::pair{std::abs(quad - hs) <= e.parseval_rel_tol * (1.0 + hs), fmt17(quad) + " vs " + fmt17(hs)};
  });
  check("constant_c1", [&] {
    const double c1 = stability_c1(kPi / 4, 1, 1.0);
    return std::pair{std::abs(c1 / e.c1_pi4 - 1.0) <= 1e-12, "c1 = " + fmt17(c1) + ", caption " + fmt17(kCaptionC1)};
  });
  check("derivative_moments", [&] {
    const FockSpace s{1, 14};
    double worst = 0.0;
    for (const FockOperator& rho : {vacuum_state(s), fock_state(s, 1), thermal_state(s, 0.5)}) {
      const GaussianState fd = derivative_moments(rho), tr = gaussify(rho);
      worst = std::max({worst, max_abs(RealMatrix(fd.gamma - tr.gamma)), (fd.d - tr.d).cwiseAbs().maxCoeff()});
    }
    return std::pair{worst <= e.moment_tol, "worst " + fmt17(worst)};
  });
  check("sigma_positivity", [&] {
    SigmaPositivityConfig cfg;
    cfg.sets = 20;
    cfg.seed = seed;
    const FockSpace s{1, 10};
    const SigmaPositivityReport good = sigma_positivity_test(char_function_of(fock_state(s, 1)), 1, cfg);
    SigmaPositivityConfig search = cfg;
    search.search = true;
    const GaussianState bad{RealVector::Zero(2), 0.25 * RealMatrix::Identity(2, 2)};
    const SigmaPositivityReport falsified = sigma_positivity_test(char_function_of(bad), 1, search);
    const bool ok = good.min_eigenvalue >= -e.sigma_psd_tol && !falsified.passed;
    return std::pair{ok, "fock1 min eig " + fmt17(good.min_eigenvalue) + ", Gamma = I/4 min eig " +
                             fmt17(falsified.min_eigenvalue)};
  });
  check("classifier", [&] {
    std::uniform_real_distribution<double> ua(-5.0, 5.0);
    double worst_alpha = 0.0, worst_res = 0.0;
    for (int t = 0; t < 10; ++t) {
      const double alpha = ua(rng);
      const ClassificationResult r = decompose(random_admissible(1, alpha, rng));
      worst_alpha = std::max(worst_alpha, std::abs(r.alpha - alpha));
      worst_res = std::max(worst_res, r.residual);
    }
    bool rejected = true;
    for (int t = 0; t < 5; ++t) rejected = rejected && classify(random_two_mode_squeezing(1, rng)).witness.has_value();
    const bool ok = worst_alpha <= e.classifier_alpha_tol && worst_res <= e.classifier_residual_tol && rejected;
    return std::pair{ok, "alpha error " + fmt17(worst_alpha) + ", residual " + fmt17(worst_res)};
  });
  return out;
}

inline int cmd_selftest(const CommonOptions& o, const std::string& expectations_file, std::ostream& out) {
  const SelftestExpectations e =
      expectations_file.empty() ? SelftestExpectations{} : load_expectations(read_json_file(expectations_file));
  const auto start = std::chrono::steady_clock::now();
  const auto checks = run_selftest(e, o.seed.value_or(20240917));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  int failed = 0;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    failed += !c.passed;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d/%zu checks passed in %.1f s\n", static_cast<int>(checks.size()) - failed,
                checks.size(), secs);
  out << buf;
  return failed == 0 ? kExitOk : kExitInvariant;
}

// ---------------------------------------------------------------------------

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Beam-splitter Darmois-Skitovich toolkit for bosonic Gaussian states", "bosonic_ds"};
  app.require_subcommand(1);
  CommonOptions o;
  ConstantsOptions co;
  std::string matrix_file, state_spec = "vacuum", expectations;
  int modes = 1;
  double threshold = 1e-5;

  auto add_common = [&](CLI::App* sub, bool config, bool theta, bool cutoff, bool seed,
                        std::vector<std::string> formats) {
    if (config) sub->add_option("--config", o.config, "JSON configuration file");
    if (theta) sub->add_option("--theta", o.theta, "Beam-splitter angle in radians");
    if (cutoff) sub->add_option("--cutoff", o.cutoff, "Fock cutoff D per mode");
    if (seed) sub->add_option("--seed", o.seed, "Seed for every sampling step");
    sub->add_option("--out", o.out, "Output path (default: stdout)");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember(std::move(formats)));
  };

  CLI::App* ds = app.add_subcommand("ds-run", "Run the stability experiment for two input states");
  add_common(ds, true, true, true, true, {"json", "csv"});
  CLI::App* cs = app.add_subcommand("constants", "Tabulate the stability constants over theta");
  add_common(cs, false, true, false, false, {"json", "csv"});
  cs->add_option("--theta-min", co.theta_min);
  cs->add_option("--theta-max", co.theta_max);
  cs->add_option("--steps", co.steps);
  cs->add_option("--n", co.n, "Modes per arm");
  cs->add_option("--kappa", co.kappa);
  CLI::App* cl = app.add_subcommand("classify", "Classify a symplectic matrix given as a JSON file");
  add_common(cl, false, false, false, false, {"json"});
  cl->add_option("matrix", matrix_file, "JSON file with an array of rows")->required();
  CLI::App* wi = app.add_subcommand("witness", "Non-Gaussianity witness for one state");
  add_common(wi, false, true, true, false, {"json", "text"});
  wi->add_option("--state", state_spec, "State spec, e.g. fock:1 or thermal:0.5");
  wi->add_option("--modes", modes);
  wi->add_option("--threshold", threshold);
  CLI::App* st = app.add_subcommand("selftest", "Run the invariant checks at reduced sizes");
  add_common(st, false, false, false, true, {"text"});
  st->add_option("--expect", expectations, "JSON file overriding the expected values");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (ds->parsed()) return cmd_ds_run(o, out, err);
    if (cs->parsed()) {
      if (cs->count("--format") == 0) o.format = "csv";
      return cmd_constants(o, co, out);
    }
    if (cl->parsed()) return cmd_classify(o, matrix_file, out);
    if (wi->parsed()) {
      if (wi->count("--format") == 0) o.format = "text";
      return cmd_witness(o, state_spec, modes, threshold, out);
    }
    if (st->parsed()) return cmd_selftest(o, expectations, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace bosonic_ds
