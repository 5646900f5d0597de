// locdil - dilation theory on locally Hilbert spaces
//
// JSON encoding of towers, vectors, operators, semigroups, kernels,
// functions, POVMs and certificates.  Levels are 1-based in JSON.  Output
// uses ordered_json so field order is fixed by the writers below.

#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "locdil/applications.hpp"
#include "locdil/core.hpp"
#include "locdil/dilation.hpp"
#include "locdil/local_operator.hpp"
#include "locdil/pd_kernel.hpp"
#include "locdil/star_semigroup.hpp"
#include "locdil/tower.hpp"

namespace locdil::io {

  using json = nlohmann::ordered_json;

  // Malformed document; the message names the offending field.
  class SchemaError : public StructuralError {
   public:
    using StructuralError::StructuralError;
  };

  namespace detail {

    inline json const& field(json const& j, char const* key, std::string const& where) {
      if (!j.is_object()) {
        throw SchemaError(where + ": expected an object");
      }
      auto it = j.find(key);
      if (it == j.end()) {
        throw SchemaError(where + ": missing field '" + key + "'");
      }
      return *it;
    }

    inline std::size_t to_size(json const& j, std::string const& where) {
      if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw SchemaError(where + ": expected a non-negative integer");
      }
      return j.get<std::size_t>();
    }

    inline double to_double(json const& j, std::string const& where) {
      if (!j.is_number()) {
        throw SchemaError(where + ": expected a number");
      }
      return j.get<double>();
    }

    inline std::vector<double> to_doubles(json const& j, std::string const& where) {
      if (!j.is_array()) {
        throw SchemaError(where + ": expected an array of numbers");
      }
      std::vector<double> out;
      for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(to_double(j[i], where + "[" + std::to_string(i) + "]"));
      }
      return out;
    }

  }  // namespace detail

  ////////////////////////////////////////////////////////////////////////
  // Tower / vectors / matrices
  ////////////////////////////////////////////////////////////////////////

  inline json to_json(Tower const& t) {
    return json{{"dims", t.dims()}};
  }

  // {"dims": [...]} or the bare array
  inline Tower tower_from_json(json const& j, std::string const& where = "tower") {
    json const& d = j.is_array() ? j : detail::field(j, "dims", where);
    if (!d.is_array()) {
      throw SchemaError(where + ".dims: expected an array");
    }
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < d.size(); ++i) {
      dims.push_back(detail::to_size(d[i], where + ".dims[" + std::to_string(i) + "]"));
    }
    try {
      return Tower(std::move(dims));
    } catch (StructuralError const& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }

  inline json to_json(Vector const& v, std::size_t level) {
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      re.push_back(v(i).real());
      im.push_back(v(i).imag());
    }
    return json{{"level", level + 1}, {"re", re}, {"im", im}};
  }

  inline json to_json(LocalVector const& v) {
    return to_json(v.coords, v.level);
  }

  inline LocalVector vector_from_json(json const& j, std::string const& where = "vector") {
    std::size_t const level = detail::to_size(detail::field(j, "level", where), where + ".level");
    if (level == 0) {
      throw SchemaError(where + ".level: levels are numbered from 1");
    }
    auto const re = detail::to_doubles(detail::field(j, "re", where), where + ".re");
    std::vector<double> im(re.size(), 0.0);
    if (j.contains("im")) {
      im = detail::to_doubles(j["im"], where + ".im");
      if (im.size() != re.size()) {
        throw SchemaError(where + ": 're' and 'im' lengths differ");
      }
    }
    LocalVector v{level - 1, Vector(static_cast<Eigen::Index>(re.size()))};
    for (std::size_t i = 0; i < re.size(); ++i) {
      v.coords(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
    }
    return v;
  }

  inline json to_json(Matrix const& m) {
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json rr = json::array();
      json ri = json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        rr.push_back(m(i, k).real());
        ri.push_back(m(i, k).imag());
      }
      re.push_back(std::move(rr));
      im.push_back(std::move(ri));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
  }

  inline Matrix matrix_from_json(json const& j, std::string const& where = "matrix") {
    std::size_t const rows = detail::to_size(detail::field(j, "rows", where), where + ".rows");
    std::size_t const cols = detail::to_size(detail::field(j, "cols", where), where + ".cols");
    json const&       re   = detail::field(j, "re", where);
    auto              read = [&](json const& part, std::string const& name) {
      if (!part.is_array() || part.size() != rows) {
        throw SchemaError(where + "." + name + ": expected " + std::to_string(rows)
                          + " rows");
      }
      Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      for (std::size_t i = 0; i < rows; ++i) {
        auto const row = detail::to_doubles(
            part[i], where + "." + name + "[" + std::to_string(i) + "]");
        if (row.size() != cols) {
          throw SchemaError(where + "." + name + "[" + std::to_string(i)
                            + "]: expected " + std::to_string(cols) + " entries");
        }
        for (std::size_t k = 0; k < cols; ++k) {
          out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
        }
      }
      return out;
    };
    Eigen::MatrixXd const real = read(re, "re");
    Eigen::MatrixXd       imag = Eigen::MatrixXd::Zero(real.rows(), real.cols());
    if (j.contains("im")) {
      imag = read(j["im"], "im");
    }
    Matrix m(real.rows(), real.cols());
    m.real() = real;
    m.imag() = imag;
    return m;
  }

  ////////////////////////////////////////////////////////////////////////
  // Operators
  ////////////////////////////////////////////////////////////////////////

  inline json to_json(LocalOperator const& t) {
    json blocks = json::array();
    for (auto const& b : t.blocks()) {
      blocks.push_back(to_json(b));
    }
    return json{{"source", to_json(t.source())},
                {"target", to_json(t.target())},
                {"blocks", blocks}};
  }

  // Accepts {"source","target"} or a single {"tower"}, and either "blocks"
  // (increment blocks) or "levels" (a level system, checked for
  // compatibility).
  inline LocalOperator operator_from_json(json const&        j,
                                          std::string const& where = "operator",
                                          double tol_struct = default_tolerances.structural) {
    Tower source;
    Tower target;
    if (j.is_object() && j.contains("tower")) {
      source = target = tower_from_json(j["tower"], where + ".tower");
    } else {
      source = tower_from_json(detail::field(j, "source", where), where + ".source");
      target = tower_from_json(detail::field(j, "target", where), where + ".target");
    }
    auto read_list = [&](json const& arr, std::string const& name) {
      if (!arr.is_array()) {
        throw SchemaError(where + "." + name + ": expected an array of matrices");
      }
      std::vector<Matrix> out;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        out.push_back(matrix_from_json(arr[i], where + "." + name + "["
                                                   + std::to_string(i) + "]"));
      }
      return out;
    };
    if (j.contains("blocks")) {
      return LocalOperator(source, target, read_list(j["blocks"], "blocks"));
    }
    if (j.contains("levels")) {
      return LocalOperator::from_levels(source, target, read_list(j["levels"], "levels"),
                                        tol_struct);
    }
    throw SchemaError(where + ": expected 'blocks' or 'levels'");
  }

  ////////////////////////////////////////////////////////////////////////
  // Semigroups, kernels, functions
  ////////////////////////////////////////////////////////////////////////

  inline json to_json(StarSemigroup const& sg) {
    return json{{"n", sg.size()},
                {"mul", sg.table()},
                {"star", sg.involution()},
                {"e", sg.neutral()}};
  }

  inline StarSemigroup semigroup_from_json(json const& j, std::string const& where = "semigroup") {
    if (j.is_object() && j.contains("builtin")) {
      json const&       b    = j["builtin"];
      json const&       kind = detail::field(b, "kind", where + ".builtin");
      if (!kind.is_string()) {
        throw SchemaError(where + ".builtin.kind: expected a string");
      }
      json const& p = detail::field(b, "params", where + ".builtin");
      std::size_t param = 0;
      if (p.is_number_integer()) {
        param = detail::to_size(p, where + ".builtin.params");
      } else if (p.is_array() && p.size() == 1) {
        param = detail::to_size(p[0], where + ".builtin.params[0]");
      } else if (p.is_object() && p.size() == 1) {
        param = detail::to_size(p.begin().value(), where + ".builtin.params");
      } else {
        throw SchemaError(where + ".builtin.params: expected one integer");
      }
      return semigroups::builtin(kind.get<std::string>(), param);
    }
    std::size_t const n   = detail::to_size(detail::field(j, "n", where), where + ".n");
    json const&       mul = detail::field(j, "mul", where);
    json const&       st  = detail::field(j, "star", where);
    std::vector<std::vector<std::size_t>> table;
    if (!mul.is_array() || mul.size() != n) {
      throw SchemaError(where + ".mul: expected " + std::to_string(n) + " rows");
    }
    for (std::size_t a = 0; a < n; ++a) {
      if (!mul[a].is_array()) {
        throw SchemaError(where + ".mul[" + std::to_string(a) + "]: expected an array");
      }
      std::vector<std::size_t> row;
      for (std::size_t b = 0; b < mul[a].size(); ++b) {
        row.push_back(detail::to_size(mul[a][b], where + ".mul[" + std::to_string(a)
                                                     + "][" + std::to_string(b) + "]"));
      }
      table.push_back(std::move(row));
    }
    if (!st.is_array()) {
      throw SchemaError(where + ".star: expected an array");
    }
    std::vector<std::size_t> star;
    for (std::size_t a = 0; a < st.size(); ++a) {
      star.push_back(detail::to_size(st[a], where + ".star[" + std::to_string(a) + "]"));
    }
    std::size_t const e = detail::to_size(detail::field(j, "e", where), where + ".e");
    return StarSemigroup(std::move(table), std::move(star), e);
  }

  struct KernelDocument {
    OperatorKernel kernel;
    json           points = json::array();
  };

  inline json to_json(OperatorKernel const& g, json const& points) {
    json entries = json::array();
    for (std::size_t s = 0; s < g.size(); ++s) {
      for (std::size_t t = 0; t < g.size(); ++t) {
        entries.push_back(json{{"s", points[s]}, {"t", points[t]}, {"op", to_json(g(s, t))}});
      }
    }
    return json{{"points", points}, {"tower", to_json(g.tower())}, {"entries", entries}};
  }

  // Entries refer to points by value; every (s, t) pair must appear once.
  inline KernelDocument kernel_from_json(json const& j, std::string const& where = "kernel") {
    KernelDocument doc;
    json const&    pts = detail::field(j, "points", where);
    if (!pts.is_array() || pts.empty()) {
      throw SchemaError(where + ".points: expected a non-empty array");
    }
    doc.points        = pts;
    Tower const tower = tower_from_json(detail::field(j, "tower", where), where + ".tower");
    std::size_t const n = pts.size();
    auto index_of = [&](json const& p, std::string const& w) {
      for (std::size_t i = 0; i < n; ++i) {
        if (pts[i] == p) {
          return i;
        }
      }
      throw SchemaError(w + ": unknown point " + p.dump());
    };
    json const& entries = detail::field(j, "entries", where);
    if (!entries.is_array()) {
      throw SchemaError(where + ".entries: expected an array");
    }
    std::vector<std::optional<LocalOperator>> vals(n * n);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      std::string const w = where + ".entries[" + std::to_string(i) + "]";
      std::size_t const s = index_of(detail::field(entries[i], "s", w), w + ".s");
      std::size_t const t = index_of(detail::field(entries[i], "t", w), w + ".t");
      if (vals[s * n + t]) {
        throw SchemaError(w + ": duplicate entry");
      }
      auto op = operator_from_json(detail::field(entries[i], "op", w), w + ".op");
      if (op.source() != tower || op.target() != tower) {
        throw SchemaError(w + ".op: operator does not act on the kernel tower");
      }
      vals[s * n + t] = std::move(op);
    }
    std::vector<LocalOperator> values;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < n; ++t) {
        if (!vals[s * n + t]) {
          throw SchemaError(where + ": missing entry for (s, t) = (" + pts[s].dump()
                            + ", " + pts[t].dump() + ")");
        }
        values.push_back(std::move(*vals[s * n + t]));
      }
    }
    doc.kernel = OperatorKernel(tower, n, std::move(values));
    return doc;
  }

  inline json to_json(OperatorFunction const& f) {
    json values = json::array();
    for (auto const& v : f.values) {
      values.push_back(to_json(v));
    }
    return json{{"semigroup", to_json(f.semigroup)},
                {"tower", to_json(f.tower)},
                {"values", values}};
  }

  inline OperatorFunction function_from_json(json const& j, std::string const& where = "function") {
    StarSemigroup sg = semigroup_from_json(detail::field(j, "semigroup", where),
                                           where + ".semigroup");
    if (auto v = validate(sg)) {
      throw SchemaError(where + ".semigroup: " + v->describe());
    }
    Tower const tower = tower_from_json(detail::field(j, "tower", where), where + ".tower");
    json const& vals  = detail::field(j, "values", where);
    if (!vals.is_array()) {
      throw SchemaError(where + ".values: expected an array");
    }
    std::vector<LocalOperator> values;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      values.push_back(operator_from_json(vals[i], where + ".values[" + std::to_string(i) + "]"));
    }
    return OperatorFunction(std::move(sg), tower, std::move(values));
  }

  inline json to_json(LocalPovm const& p) {
    json atoms = json::array();
    for (auto const& a : p.atoms) {
      atoms.push_back(to_json(a));
    }
    return json{{"tower", to_json(p.tower)}, {"atoms", atoms}};
  }

  inline LocalPovm povm_from_json(json const& j, std::string const& where = "povm") {
    json const& atoms = detail::field(j, "atoms", where);
    if (!atoms.is_array() || atoms.empty()) {
      throw SchemaError(where + ".atoms: expected a non-empty array");
    }
    LocalPovm p;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      p.atoms.push_back(operator_from_json(atoms[i], where + ".atoms[" + std::to_string(i) + "]"));
    }
    p.tower = j.contains("tower") ? tower_from_json(j["tower"], where + ".tower")
                                  : p.atoms.front().source();
    return p;
  }

  ////////////////////////////////////////////////////////////////////////
  // Certificates and constructions
  ////////////////////////////////////////////////////////////////////////

  inline json to_json(Tolerances const& t) {
    return json{{"structural", t.structural},
                {"psd", t.psd},
                {"rank", t.rank},
                {"flag", t.flag},
                {"construction", t.construction}};
  }

  inline json to_json(Classification const& c) {
    json flags = json::array();
    for (auto f : c.flags()) {
      flags.push_back(std::string(to_string(f)));
    }
    return flags;
  }

  inline json to_json(KernelCertificate const& c, bool per_level = true) {
    json reports = json::array();
    for (std::size_t i = 0; i < c.reports.size(); ++i) {
      auto const& r = c.reports[i];
      reports.push_back(json{{per_level ? "level" : "increment", i + 1},
                             {"min_eig", r.min_eig},
                             {"max_abs_eig", r.max_abs_eig},
                             {"tolerance", r.tolerance},
                             {"ok", r.ok}});
    }
    json out{{"status", std::string(to_string(c.status))},
             {"ok", c.ok()},
             {"hermitian_residual", c.hermitian_residual},
             {"levels", reports}};
    if (c.witness) {
      json fam = json::array();
      for (auto const& h : c.witness->family) {
        fam.push_back(to_json(h, c.witness->level));
      }
      out["witness"] = json{{"level", c.witness->level + 1},
                            {"value", c.witness->value},
                            {"family", fam}};
    }
    return out;
  }

  inline json to_json(LbcTable const& t) {
    return t.constants;
  }

  inline json to_json(DilationCertificate const& c, Tower const& k) {
    json out{{"dims_K", k.dims()},
             {"residuals",
              json{{"dilation", c.dilation_residual},
                   {"representation", c.representation_residual},
                   {"isometry", c.isometry_residual},
                   {"shift", c.shift_residual},
                   {"reproducing", c.reproducing_residual}}},
             {"lbc_excess", c.lbc_excess},
             {"minimal", c.minimal},
             {"minimal_ranks", c.minimal_ranks},
             {"verified", c.verified},
             {"tolerance", c.tolerance}};
    if (c.unitary) {
      json u = json::array();
      for (bool b : *c.unitary) {
        u.push_back(b);
      }
      out["unitary"] = u;
    }
    return out;
  }

  inline json to_json(DilationResult const& d, OperatorFunction const& phi) {
    json cert   = to_json(d.certificate, d.dilation_tower());
    cert["lbc"] = to_json(d.lbc);
    json reps   = json::array();
    for (auto const& p : d.representation) {
      reps.push_back(to_json(p));
    }
    return json{{"kind", "dilation"},
                {"certificate", cert},
                {"function", to_json(phi)},
                {"embedding", to_json(d.embedding)},
                {"representation",
                 json{{"semigroup", to_json(phi.semigroup)},
                      {"tower", to_json(d.dilation_tower())},
                      {"values", reps}}}};
  }

  inline json to_json(Rklhs const& r, json const& points) {
    json maps = json::array();
    for (auto const& g : r.point_maps) {
      maps.push_back(to_json(g));
    }
    return json{{"kind", "rklhs"},
                {"certificate",
                 json{{"dims_K", r.dilation_tower.dims()},
                      {"residuals", json{{"reproducing", r.reproducing_residual}}}}},
                {"kernel", to_json(r.kernel, points)},
                {"point_maps", maps}};
  }

  inline json to_json(SpectralDilation const& s, LocalPovm const& p) {
    json proj = json::array();
    for (auto const& f : s.projections) {
      proj.push_back(to_json(f));
    }
    return json{{"kind", "spectral_dilation"},
                {"certificate",
                 json{{"dims_K", s.dilation_tower.dims()},
                      {"residuals",
                       json{{"compression", s.compression_residual},
                            {"orthogonality", s.orthogonality_residual},
                            {"isometry", s.isometry_residual}}},
                      {"minimal_ranks", s.minimal_ranks}}},
                {"povm", to_json(p)},
                {"embedding", to_json(s.embedding)},
                {"projections", proj}};
  }

  inline json to_json(UnitaryDilation const& u, LocalOperator const& t) {
    return json{{"kind", "unitary_dilation"},
                {"certificate",
                 json{{"dims_K", u.dilation_tower.dims()},
                      {"horizon", u.horizon},
                      {"residuals",
                       json{{"unitary", u.unitary_residual},
                            {"isometry", u.isometry_residual},
                            {"compression", u.compression_residual}}},
                      {"minimal_ranks", u.minimal_ranks}}},
                {"contraction", to_json(t)},
                {"unitary", to_json(u.unitary)},
                {"embedding", to_json(u.embedding)}};
  }

  inline json to_json(RhoCertificate const& c) {
    json out{{"verdict", std::string(to_string(c.verdict))},
             {"rho", c.rho},
             {"window", c.window},
             {"window_min_eig", c.window_min_eig},
             {"polynomials_tested", c.polynomials_tested}};
    if (c.window_witness) {
      auto const& w   = *c.window_witness;
      json        fam = json::array();
      for (auto const& h : w.family) {
        fam.push_back(to_json(h, w.level));
      }
      out["window_witness"]
          = json{{"level", w.level + 1}, {"window", w.window}, {"value", w.value}, {"family", fam}};
    }
    if (c.polynomial_witness) {
      auto const& p  = *c.polynomial_witness;
      json        re = json::array();
      json        im = json::array();
      for (auto const& x : p.coefficients) {
        re.push_back(x.real());
        im.push_back(x.imag());
      }
      out["polynomial_witness"] = json{{"level", p.level + 1},
                                       {"coefficients", json{{"re", re}, {"im", im}}},
                                       {"norm", p.norm},
                                       {"bound", p.bound}};
    }
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // Files
  ////////////////////////////////////////////////////////////////////////

  // Parse errors carry nlohmann's line/column diagnostics.
  inline json read_file(std::string const& path) {
    std::ifstream in(path);
    if (!in) {
      throw SchemaError("cannot open '" + path + "'");
    }
    try {
      return json::parse(in);
    } catch (json::parse_error const& e) {
      throw SchemaError(path + ": " + e.what());
    }
  }

  inline std::string dump(json const& j) {
    return j.dump(2) + "\n";
  }

}  // namespace locdil::io
