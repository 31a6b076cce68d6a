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

// JSON and CSV serialisation. Floating-point values are always written with
// 17 significant digits so that equal results give byte-identical files.
// Non-finite values are written as the strings "inf", "-inf" and "nan".

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bosonic_ds/classifier.hpp"
#include "bosonic_ds/stability.hpp"

namespace bosonic_ds {

using Json = nlohmann::json;

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline Json num(double x) { return std::isfinite(x) ? Json(x) : Json(fmt17(x)); }

inline double to_double(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw IoError(what + ": expected a number");
}

namespace detail {

inline void dump_to(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::number_float: out += fmt17(j.get<double>()); break;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_to(out, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_to(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      break;
    }
    default: out += j.dump(); break;
  }
}

}  // namespace detail

/// Serialises with keys in sorted order and 17-digit floats.
inline std::string dump(const Json& j, int indent = 2) {
  std::string out;
  detail::dump_to(out, j, indent, 0);
  return out;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

// Matrices are arrays of rows.

inline Json to_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(num(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const RealVector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

inline RealMatrix real_matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) throw IoError(what + ": expected an array of rows");
  const Index rows = static_cast<Index>(j.size()), cols = static_cast<Index>(j.front().size());
  RealMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw IoError(what + ": ragged rows");
    for (Index k = 0; k < cols; ++k) m(i, k) = to_double(row[static_cast<std::size_t>(k)], what);
  }
  return m;
}

inline RealVector real_vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw IoError(what + ": expected an array");
  RealVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = to_double(j[i], what);
  return v;
}

inline Json to_json(const GaussianState& g) { return {{"d", to_json(g.d)}, {"gamma", to_json(g.gamma)}}; }

inline GaussianState gaussian_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("gamma")) throw IoError("gaussian: needs \"gamma\"");
  GaussianState g;
  g.gamma = real_matrix_from_json(j.at("gamma"), "gaussian.gamma");
  g.d = j.contains("d") ? real_vector_from_json(j.at("d"), "gaussian.d") : RealVector(RealVector::Zero(g.gamma.rows()));
  return g;
}

/// {"modes", "cutoff", "real", "imag"}.
inline Json density_to_json(const FockOperator& rho) {
  return {{"modes", rho.space.modes},
          {"cutoff", rho.space.cutoff},
          {"real", to_json(RealMatrix(rho.matrix.real()))},
          {"imag", to_json(RealMatrix(rho.matrix.imag()))}};
}

inline FockOperator density_from_json(const Json& j, const Tolerances& tol = {}) {
  if (!j.is_object() || !j.contains("modes") || !j.contains("cutoff") || !j.contains("real")) {
    throw IoError("density: needs \"modes\", \"cutoff\" and \"real\"");
  }
  const FockSpace space{j.at("modes").get<int>(), j.at("cutoff").get<int>()};
  space.validate();
  const RealMatrix re = real_matrix_from_json(j.at("real"), "density.real");
  const RealMatrix im =
      j.contains("imag") ? real_matrix_from_json(j.at("imag"), "density.imag") : RealMatrix(RealMatrix::Zero(re.rows(), re.cols()));
  if (re.rows() != space.dim() || re.cols() != space.dim() || im.rows() != re.rows() || im.cols() != re.cols()) {
    throw DimensionError("density: matrix size does not match modes and cutoff");
  }
  FockOperator rho{space, ComplexMatrix(re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>()), OperatorKind::density, {}};
  validate_density(rho, tol);
  return rho;
}

inline Json to_json(const Tolerances& t) {
  return {{"symplectic", num(t.symplectic)}, {"symmetry", num(t.symmetry)},       {"uncertainty", num(t.uncertainty)},
          {"hermitian", num(t.hermitian)},   {"trace", num(t.trace)},             {"psd", num(t.psd)},
          {"leak_budget", num(t.leak_budget)}, {"unitary_leak", num(t.unitary_leak)}, {"grid_boundary", num(t.grid_boundary)},
          {"sigma_psd", num(t.sigma_psd)},   {"classify", num(t.classify)}};
}

/// Overrides the fields present in j; every tolerance must be positive.
inline void apply_tolerances(const Json& j, Tolerances& t) {
  const std::pair<const char*, double*> fields[] = {
      {"symplectic", &t.symplectic}, {"symmetry", &t.symmetry},       {"uncertainty", &t.uncertainty},
      {"hermitian", &t.hermitian},   {"trace", &t.trace},             {"psd", &t.psd},
      {"leak_budget", &t.leak_budget}, {"unitary_leak", &t.unitary_leak}, {"grid_boundary", &t.grid_boundary},
      {"sigma_psd", &t.sigma_psd},   {"classify", &t.classify}};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& [name, ptr] : fields) {
      if (it.key() != name) continue;
      known = true;
      *ptr = to_double(it.value(), std::string("tolerances.") + name);
      if (!(*ptr > 0.0)) throw ValidationError(std::string("tolerances.") + name + " must be positive");
    }
    if (!known) throw IoError("tolerances: unknown field \"" + it.key() + "\"");
  }
}

inline Json to_json(const ExperimentConfig& c) {
  return {{"synthesis_cutoff", c.synthesis_cutoff},
          {"max_synthesis_cutoff", c.max_synthesis_cutoff},
          {"moments",
           {{"estimate_kappa", c.moment_options.estimate_kappa},
            {"kappa_samples", c.moment_options.kappa_samples},
            {"refine_steps", c.moment_options.refine_steps},
            {"seed", c.moment_options.seed}}},
          {"synthesis",
           {{"tail_tol", num(c.synthesis.tail_tol)},
            {"oversample", num(c.synthesis.oversample)},
            {"residual_tol", num(c.synthesis.residual_tol)},
            {"psd_tol", num(c.synthesis.psd_tol)},
            {"max_work", num(c.synthesis.max_work)}}},
          {"tolerances", to_json(c.tolerances)},
          {"compute_ds_residual", c.compute_ds_residual},
          {"ds_grid",
           {{"extent", num(c.ds_geometry.extent)},
            {"points", c.ds_geometry.points},
            {"chi_extent", num(c.ds_geometry.chi_extent)}}},
          {"margin_slack", num(c.margin_slack)}};
}

inline Json to_json(const ComplexMatrix& m) {
  return {{"real", to_json(RealMatrix(m.real()))}, {"imag", to_json(RealMatrix(m.imag()))}};
}

inline Json report_to_json(const StabilityReport& r) {
  Json j;
  j["theta"] = num(r.theta);
  j["modes_per_arm"] = r.n;
  j["cutoff"] = r.cutoff;
  j["synthesis_cutoff"] = r.synthesis_cutoff;
  j["epsilon"] = num(r.epsilon);
  j["epsilon_3x"] = num(r.epsilon_3x);
  j["lambda"] = num(r.lambda);
  j["kappa"] = num(r.kappa);
  j["kappa_evaluations"] = r.kappa_evaluations;
  j["trace_gamma_ab"] = num(r.trace_gamma_ab);
  j["region"] = r.region ? Json{{"r", num(r.region->r)}, {"floor", num(r.region->floor)}} : Json(nullptr);
  j["constants"] = {{"c1", num(r.c1)}, {"c2", num(r.c2)}, {"c3", num(r.c3)}, {"c1_caption", num(r.c1_caption)}};
  j["gaussified"] = {to_json(r.gauss1), to_json(r.gauss2)};
  j["dist_hs"] = {num(r.dist_hs_1), num(r.dist_hs_2)};
  j["cm_gap"] = num(r.cm_gap);
  j["bound1"] = num(r.bound1);
  j["bound2"] = num(r.bound2);
  j["cross_covariance"] = {{"v", to_json(r.v)}, {"norm", num(r.v_norm)}, {"bound", num(r.v_bound)}};
  j["identity"] = {{"residual_sigma_frame", num(r.identity_residual)},
                   {"residual_literal", num(r.identity_residual_literal)},
                   {"tolerance", num(r.identity_tolerance)}};
  j["margins"] = {{"dist_1", num(r.margin_dist_1)},
                  {"dist_2", num(r.margin_dist_2)},
                  {"cm", num(r.margin_cm)},
                  {"v", num(r.margin_v)}};
  j["ds_residual"] = r.ds_max ? Json{{"max_abs", num(*r.ds_max)}, {"excluded", r.ds_excluded}} : Json(nullptr);
  j["splitter_leak"] = num(r.splitter_leak);
  j["truncation_flags"] = r.truncation_flags;
  j["violations"] = r.violations;
  j["ok"] = r.ok();
  j["config"] = to_json(r.config);
  return j;
}

inline Json classification_to_json(const ClassificationResult& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["alpha"] = num(r.alpha);
  j["branch"] = r.branch;
  j["residual"] = num(r.residual);
  j["criterion_residual"] = num(r.criterion_residual);
  j["cond_a"] = num(r.cond_a);
  j["cond_b"] = num(r.cond_b);
  j["x"] = r.x ? to_json(*r.x) : Json(nullptr);
  j["y"] = r.y ? to_json(*r.y) : Json(nullptr);
  j["witness_gamma"] = r.witness ? to_json(*r.witness) : Json(nullptr);
  j["witness_offdiag"] = num(r.witness_offdiag);
  return j;
}

inline Json witness_to_json(const WitnessResult& w, double theta) {
  return {{"theta", num(theta)},
          {"epsilon", num(w.epsilon)},
          {"verdict", w.gaussian ? "gaussian" : "non-gaussian"},
          {"truncation_flags", w.truncation_flags}};
}

inline Json char_grid_to_json(const CharGrid& g) {
  Json re = Json::array(), im = Json::array();
  for (const Complex& c : g.values) {
    re.push_back(num(c.real()));
    im.push_back(num(c.imag()));
  }
  return {{"modes", g.geometry.modes},
          {"extent", num(g.geometry.extent)},
          {"points", g.geometry.points},
          {"source", to_string(g.source)},
          {"boundary_max", num(g.boundary_max)},
          {"warnings", g.warnings},
          {"real", std::move(re)},
          {"imag", std::move(im)}};
}

/// One row per node: xi_0 .. xi_{2n-1}, re, im.
inline std::string char_grid_csv(const CharGrid& g) {
  std::string out;
  for (int k = 0; k < g.geometry.axes(); ++k) out += "xi" + std::to_string(k) + ",";
  out += "re,im\n";
  for (Index i = 0; i < g.geometry.size(); ++i) {
    const RealVector x = g.geometry.node(i);
    for (Index k = 0; k < x.size(); ++k) out += fmt17(x(k)) + ",";
    out += fmt17(g.values[static_cast<std::size_t>(i)].real()) + "," + fmt17(g.values[static_cast<std::size_t>(i)].imag()) + "\n";
  }
  return out;
}

inline std::string wigner_csv(const WignerGrid& w) {
  std::string out;
  for (int k = 0; k < w.geometry.axes(); ++k) out += "x" + std::to_string(k) + ",";
  out += "w\n";
  for (Index i = 0; i < w.geometry.size(); ++i) {
    const RealVector x = w.geometry.node(i);
    for (Index k = 0; k < x.size(); ++k) out += fmt17(x(k)) + ",";
    out += fmt17(w.values[static_cast<std::size_t>(i)]) + "\n";
  }
  return out;
}

inline std::string constants_csv(const std::vector<ConstantsRow>& rows) {
  std::string out = "theta,curve,c1,c2_shape,c3\n";
  for (const auto& r : rows) {
    out += fmt17(r.theta) + "," + fmt17(r.curve) + "," + fmt17(r.c1) + "," + fmt17(r.c2_shape) + "," + fmt17(r.c3) + "\n";
  }
  return out;
}

inline Json constants_to_json(const std::vector<ConstantsRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) {
    a.push_back({{"theta", num(r.theta)}, {"curve", num(r.curve)}, {"c1", num(r.c1)}, {"c2_shape", num(r.c2_shape)}, {"c3", num(r.c3)}});
  }
  return a;
}

inline std::string sweep_csv(const std::vector<StabilityReport>& reports) {
  std::string out = "theta,epsilon,bound1,bound2,dist_hs_1,dist_hs_2,cm_gap,v_norm,v_bound,ok\n";
  for (const auto& r : reports) {
    out += fmt17(r.theta) + "," + fmt17(r.epsilon) + "," + fmt17(r.bound1) + "," + fmt17(r.bound2) + "," +
           fmt17(r.dist_hs_1) + "," + fmt17(r.dist_hs_2) + "," + fmt17(r.cm_gap) + "," + fmt17(r.v_norm) + "," +
           fmt17(r.v_bound) + "," + (r.ok() ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace bosonic_ds
