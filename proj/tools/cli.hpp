// locdil - dilation theory on locally Hilbert spaces
//
// The locdilate command line front end.  Kept in a header so the test
// suites can drive it in-process.
//
// Exit status: 0 check passed / construction succeeded, 1 certified
// negative (the JSON output carries the witness), 2 input or structural
// error.

#pragma once

#include <exception>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "locdil/io.hpp"
#include "locdil/locdil.hpp"

namespace locdil::cli {

  using io::json;

  inline constexpr int exit_ok       = 0;
  inline constexpr int exit_negative = 1;
  inline constexpr int exit_error    = 2;

  struct Options {
    std::string input;
    std::string output;
    std::string format  = "json";
    double      tol_psd    = default_tolerances.psd;
    double      tol_struct = default_tolerances.structural;
    std::size_t horizon    = 8;
    double      rho        = 1.0;
    bool        defect_atom = false;

    Tolerances tolerances() const {
      Tolerances t;
      t.psd        = tol_psd;
      t.structural = tol_struct;
      return t;
    }
  };

  struct Outcome {
    int         code = exit_ok;
    json        doc;
    std::string summary;
  };

  namespace detail {

    inline std::string fmt(double x) {
      std::ostringstream s;
      s.precision(3);
      s << std::scientific << x;
      return s.str();
    }

    inline json stamp(json doc, std::string const& verb, Tolerances const& tol) {
      json out{{"verb", verb}, {"tolerances", io::to_json(tol)}};
      for (auto& [k, v] : doc.items()) {
        out[k] = v;
      }
      return out;
    }

    inline Outcome check_operator(json const& in, Options const& o) {
      auto const tol  = o.tolerances();
      std::string const kind = in.value("kind", "");
      Outcome out;
      if (kind == "unitary_dilation") {
        auto const u = io::operator_from_json(io::detail::field(in, "unitary", "document"),
                                              "unitary", tol.structural);
        auto const j = io::operator_from_json(io::detail::field(in, "embedding", "document"),
                                              "embedding", tol.structural);
        auto const t = io::operator_from_json(io::detail::field(in, "contraction", "document"),
                                              "contraction", tol.structural);
        std::size_t const n = io::detail::to_size(
            io::detail::field(io::detail::field(in, "certificate", "document"), "horizon",
                              "certificate"),
            "certificate.horizon");
        if (u.source() != u.target() || j.target() != u.source() || j.source() != t.source()) {
          throw StructuralError("unitary dilation document has mismatched towers");
        }
        double const eps = tol.construction * (1.0 + t.norm());
        auto const   id  = LocalOperator::identity(u.source());
        double const ur  = std::max(distance(adjoint(u) * u, id), distance(u * adjoint(u), id));
        double const jr  = distance(adjoint(j) * j, LocalOperator::identity(j.source()));
        double       cr  = 0.0;
        LocalOperator un = u;
        LocalOperator tn = t;
        for (std::size_t p = 1; p <= n; ++p) {
          cr = std::max(cr, distance(adjoint(j) * un * j, tn));
          un = un * u;
          tn = tn * t;
        }
        bool const ok = ur <= eps && jr <= eps && cr <= eps;
        out.doc = json{{"kind", kind},
                       {"ok", ok},
                       {"residuals", json{{"unitary", ur}, {"isometry", jr}, {"compression", cr}}},
                       {"flags", io::to_json(classify(u, tol.flag))}};
        out.code    = ok ? exit_ok : exit_negative;
        out.summary = std::string("unitary dilation: ") + (ok ? "valid" : "INVALID")
                      + " (unitary " + fmt(ur) + ", compression " + fmt(cr) + ")";
        return out;
      }
      if (kind == "spectral_dilation") {
        auto const j = io::operator_from_json(io::detail::field(in, "embedding", "document"),
                                              "embedding", tol.structural);
        auto const p = io::povm_from_json(io::detail::field(in, "povm", "document"));
        json const& arr = io::detail::field(in, "projections", "document");
        std::vector<LocalOperator> f;
        for (std::size_t i = 0; i < arr.size(); ++i) {
          f.push_back(io::operator_from_json(arr[i], "projections[" + std::to_string(i) + "]",
                                             tol.structural));
        }
        if (f.size() != p.atoms.size()) {
          throw StructuralError("one projection per POVM atom expected");
        }
        double const eps  = tol.construction;
        Tower const& K    = j.target();
        auto         sum  = LocalOperator::zero(K, K);
        bool         proj = true;
        double       orth = 0.0;
        double       comp = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
          if (f[i].source() != K || f[i].target() != K) {
            throw StructuralError("projection " + std::to_string(i) + " not on the dilation tower");
          }
          proj = proj && has_flag(f[i], Flag::projection, tol.flag);
          sum += f[i];
          comp = std::max(comp, distance(p.atoms[i], adjoint(j) * f[i] * j));
          for (std::size_t k = 0; k < f.size(); ++k) {
            if (k != i) {
              orth = std::max(orth, (f[i] * f[k]).norm());
            }
          }
        }
        double const sr = distance(sum, LocalOperator::identity(K));
        double const jr = distance(adjoint(j) * j, LocalOperator::identity(j.source()));
        bool const   ok = proj && orth <= eps && sr <= eps && jr <= eps && comp <= eps;
        out.doc = json{{"kind", kind},
                       {"ok", ok},
                       {"projections", proj},
                       {"residuals",
                        json{{"orthogonality", orth},
                             {"sum", sr},
                             {"isometry", jr},
                             {"compression", comp}}}};
        out.code    = ok ? exit_ok : exit_negative;
        out.summary = std::string("spectral dilation: ") + (ok ? "valid" : "INVALID")
                      + " (compression " + fmt(comp) + ", orthogonality " + fmt(orth) + ")";
        return out;
      }
      auto const t = io::operator_from_json(in, "operator", tol.structural);
      auto const c = classify(t, tol.flag);
      out.doc      = json{{"kind", "operator"},
                          {"ok", true},
                          {"flags", io::to_json(c)},
                          {"seminorms", t.seminorms()}};
      out.summary  = "flags:";
      for (auto f : c.flags()) {
        out.summary += " " + std::string(to_string(f));
      }
      return out;
    }

    inline Outcome check_kernel(json const& in, Options const& o) {
      auto const doc  = io::kernel_from_json(in);
      auto const cert = is_lpdk(doc.kernel, o.tolerances());
      Outcome    out;
      out.doc     = json{{"kind", "kernel_certificate"}, {"certificate", io::to_json(cert)}};
      out.code    = cert.ok() ? exit_ok : exit_negative;
      out.summary = "kernel: " + std::string(to_string(cert.status));
      if (cert.witness) {
        out.summary += " (witness at level " + std::to_string(cert.witness->level + 1)
                       + ", value " + fmt(cert.witness->value) + ")";
      }
      return out;
    }

    // A representation document re-validated: axioms, LPD kernel, isometric
    // embedding and compression onto the stored function.
    inline Outcome check_dilation_document(json const& in, Options const& o) {
      auto const tol = o.tolerances();
      auto const phi = io::function_from_json(io::detail::field(in, "function", "document"),
                                              "function");
      auto const pi  = io::function_from_json(
          io::detail::field(in, "representation", "document"), "representation");
      auto const j   = io::operator_from_json(io::detail::field(in, "embedding", "document"),
                                              "embedding", tol.structural);
      if (!(pi.semigroup == phi.semigroup) || j.source() != phi.tower || j.target() != pi.tower) {
        throw StructuralError("dilation document has mismatched semigroups or towers");
      }
      auto const& sg = pi.semigroup;
      double      scale = 0.0;
      for (auto const& v : phi.values) {
        scale = std::max(scale, v.norm());
      }
      double const eps = tol.construction * (1.0 + scale);
      double       rep = distance(pi(sg.neutral()), LocalOperator::identity(pi.tower));
      for (std::size_t s = 0; s < sg.size(); ++s) {
        rep = std::max(rep, distance(pi(sg.star(s)), adjoint(pi(s))));
        for (std::size_t t = 0; t < sg.size(); ++t) {
          rep = std::max(rep, distance(pi(sg.mul(s, t)), pi(s) * pi(t)));
        }
      }
      double dil = 0.0;
      for (std::size_t s = 0; s < sg.size(); ++s) {
        dil = std::max(dil, distance(phi(s), adjoint(j) * pi(s) * j));
      }
      double const iso  = distance(adjoint(j) * j, LocalOperator::identity(phi.tower));
      auto const   cert = is_lpdf(pi, tol);
      bool const   ok   = cert.ok() && rep <= eps && dil <= eps && iso <= eps;
      Outcome      out;
      out.doc     = json{{"kind", "dilation_check"},
                         {"ok", ok},
                         {"residuals",
                          json{{"representation", rep}, {"dilation", dil}, {"isometry", iso}}},
                         {"representation_kernel", io::to_json(cert)}};
      out.code    = ok ? exit_ok : exit_negative;
      out.summary = std::string("dilation: ") + (ok ? "valid" : "INVALID") + " (representation "
                    + fmt(rep) + ", dilation " + fmt(dil) + ")";
      return out;
    }

    inline Outcome check_lpdf(json const& in, Options const& o) {
      if (in.value("kind", "") == "dilation") {
        return check_dilation_document(in, o);
      }
      auto const phi  = io::function_from_json(in);
      auto const cert = is_lpdf(phi, o.tolerances());
      Outcome    out;
      out.doc     = json{{"kind", "function_certificate"}, {"certificate", io::to_json(cert)}};
      out.code    = cert.ok() ? exit_ok : exit_negative;
      out.summary = "function: " + std::string(to_string(cert.status));
      return out;
    }

    inline Outcome indefinite(IndefiniteKernel const& e) {
      Outcome out;
      out.code    = exit_negative;
      out.doc     = json{{"kind", "rejected"},
                         {"reason", e.what()},
                         {"certificate", io::to_json(e.certificate())}};
      out.summary = std::string("rejected: ") + e.what();
      return out;
    }

    inline Outcome build_rklhs_verb(json const& in, Options const& o) {
      auto const doc = io::kernel_from_json(in);
      try {
        auto const r = build_rklhs(doc.kernel, o.tolerances());
        Outcome    out;
        out.doc     = io::to_json(r, doc.points);
        out.summary = "RKLHS built, dilation dims";
        for (auto d : r.dilation_tower.dims()) {
          out.summary += " " + std::to_string(d);
        }
        return out;
      } catch (IndefiniteKernel const& e) {
        return indefinite(e);
      }
    }

    inline Outcome lbc_failure(LbcViolation const& e) {
      Outcome out;
      out.code    = exit_negative;
      out.doc     = json{{"kind", "rejected"},
                         {"reason", e.what()},
                         {"lbc_violation", json{{"element", e.element()}, {"level", e.level() + 1}}}};
      out.summary = std::string("rejected: ") + e.what();
      return out;
    }

    inline std::string dilation_summary(DilationResult const& d) {
      std::string s = "dilation dims";
      for (auto x : d.dilation_tower().dims()) {
        s += " " + std::to_string(x);
      }
      s += ", residual " + fmt(d.certificate.dilation_residual);
      s += d.certificate.minimal ? ", minimal" : ", NOT minimal";
      return s;
    }

    inline Outcome dilate_verb(json const& in, Options const& o) {
      auto const phi = io::function_from_json(in);
      try {
        auto const d = dilate(phi, o.tolerances());
        Outcome    out;
        out.doc     = io::to_json(d, phi);
        out.code    = d.certificate.verified ? exit_ok : exit_negative;
        out.summary = dilation_summary(d);
        return out;
      } catch (IndefiniteKernel const& e) {
        return indefinite(e);
      } catch (LbcViolation const& e) {
        return lbc_failure(e);
      }
    }

    inline Outcome rho_dilate_verb(json const& in, Options const& o) {
      auto const psi = io::function_from_json(in);
      try {
        auto const r   = rho_dilate(psi, o.rho, o.tolerances());
        auto const phi = rho_normalized(psi, o.rho);
        Outcome    out;
        out.doc = json{{"kind", "rho_dilation"},
                       {"rho", o.rho},
                       {"rho_residual", r.rho_residual},
                       {"rho_lpd", io::to_json(r.rho_lpd)},
                       {"dilation", io::to_json(r.dilation, phi)}};
        bool const ok = r.dilation.certificate.verified
                        && r.rho_residual <= o.tolerances().construction * (1.0 + o.rho);
        out.code    = ok ? exit_ok : exit_negative;
        out.summary = "ρ = " + fmt(o.rho) + ": " + dilation_summary(r.dilation);
        return out;
      } catch (IndefiniteKernel const& e) {
        return indefinite(e);
      } catch (LbcViolation const& e) {
        return lbc_failure(e);
      }
    }

    inline Outcome naimark_verb(json const& in, Options const& o) {
      auto p = io::povm_from_json(in);
      Outcome out;
      try {
        if (o.defect_atom) {
          p = with_defect_atom(std::move(p), o.tol_psd);
        }
        auto const s = naimark(p, o.tolerances());
        out.doc      = io::to_json(s, p);
        out.summary  = "Naimark dilation dims";
        for (auto d : s.dilation_tower.dims()) {
          out.summary += " " + std::to_string(d);
        }
        out.summary += ", compression residual " + fmt(s.compression_residual);
      } catch (PreconditionError const& e) {
        out.code    = exit_negative;
        out.doc     = json{{"kind", "rejected"}, {"reason", e.what()}};
        out.summary = std::string("rejected: ") + e.what();
      }
      return out;
    }

    inline Outcome unitary_dilate_verb(json const& in, Options const& o) {
      auto const t = io::operator_from_json(in, "operator", o.tol_struct);
      Outcome    out;
      try {
        auto const u = unitary_dilation(t, o.horizon, o.tolerances());
        out.doc      = io::to_json(u, t);
        out.summary  = "unitary dilation, horizon " + std::to_string(o.horizon)
                      + ", compression residual " + fmt(u.compression_residual);
      } catch (PreconditionError const& e) {
        out.code    = exit_negative;
        out.doc     = json{{"kind", "rejected"}, {"reason", e.what()}};
        out.summary = std::string("rejected: ") + e.what();
      }
      return out;
    }

    inline Outcome rho_check_verb(json const& in, Options const& o) {
      auto const t    = io::operator_from_json(in, "operator", o.tol_struct);
      auto const cert = rho_contraction_check(t, o.rho, o.horizon, o.tolerances());
      Outcome    out;
      out.doc     = json{{"kind", "rho_certificate"}, {"certificate", io::to_json(cert)}};
      out.code    = cert.verdict == RhoVerdict::no_with_witness ? exit_negative : exit_ok;
      out.summary = "ρ = " + fmt(o.rho) + ", window " + std::to_string(o.horizon) + ": "
                    + std::string(to_string(cert.verdict));
      return out;
    }

  }  // namespace detail

  inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"locdilate: dilations on locally Hilbert spaces", "locdilate"};
    app.require_subcommand(1);
    Options o;

    struct Verb {
      char const* name;
      char const* help;
      Outcome (*fn)(json const&, Options const&);
    };
    std::vector<Verb> const verbs{
        {"check-operator", "classify a local operator or re-validate a unitary/spectral dilation",
         detail::check_operator},
        {"check-kernel", "locally positive definiteness of an operator kernel", detail::check_kernel},
        {"check-lpdf", "locally positive definiteness of a function, or re-validate a dilation",
         detail::check_lpdf},
        {"build-rklhs", "reproducing kernel locally Hilbert space of a kernel",
         detail::build_rklhs_verb},
        {"dilate", "minimal dilation of a locally positive definite function", detail::dilate_verb},
        {"rho-dilate", "ρ-dilation of a function", detail::rho_dilate_verb},
        {"naimark", "Naimark dilation of a discrete operator-valued measure", detail::naimark_verb},
        {"unitary-dilate", "finite-horizon unitary dilation of a locally contraction",
         detail::unitary_dilate_verb},
        {"rho-check", "windowed ρ-contraction test", detail::rho_check_verb},
    };

    std::string chosen;
    for (auto const& v : verbs) {
      auto* sub = app.add_subcommand(v.name, v.help);
      sub->add_option("input", o.input, "input JSON file")->required();
      sub->add_option("--output", o.output, "write the JSON result to PATH");
      sub->add_option("--format", o.format, "stdout format")
          ->check(CLI::IsMember({"json", "text"}));
      sub->add_option("--tol-psd", o.tol_psd, "relative PSD slack")
          ->check(CLI::PositiveNumber);
      sub->add_option("--tol-struct", o.tol_struct, "relative structural tolerance")
          ->check(CLI::PositiveNumber);
      std::string const name = v.name;
      if (name == "unitary-dilate" || name == "rho-check") {
        sub->add_option("--horizon", o.horizon, "horizon / window N")->check(CLI::PositiveNumber);
      }
      if (name == "rho-dilate" || name == "rho-check") {
        sub->add_option("--rho", o.rho, "ρ > 0")->check(CLI::PositiveNumber);
      }
      if (name == "naimark") {
        sub->add_flag("--defect-atom", o.defect_atom, "append I - ΣE as an extra atom");
      }
      sub->callback([&chosen, name] { chosen = name; });
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      app.parse(rev);
    } catch (CLI::CallForHelp const&) {
      out << app.help();
      return exit_ok;
    } catch (CLI::ParseError const& e) {
      err << "locdilate: " << e.what() << "\n";
      return exit_error;
    }

    set_max_threads_from_env();
    Outcome res;
    try {
      json const in = io::read_file(o.input);
      for (auto const& v : verbs) {
        if (chosen == v.name) {
          res = v.fn(in, o);
        }
      }
    } catch (Error const& e) {
      err << "locdilate: " << e.what() << "\n";
      return exit_error;
    } catch (std::exception const& e) {
      err << "locdilate: " << e.what() << "\n";
      return exit_error;
    }

    std::string const text = io::dump(detail::stamp(res.doc, chosen, o.tolerances()));
    if (!o.output.empty()) {
      std::ofstream f(o.output, std::ios::binary);
      if (!f) {
        err << "locdilate: cannot write '" << o.output << "'\n";
        return exit_error;
      }
      f << text;
    }
    if (o.format == "text") {
      out << chosen << ": " << res.summary << "\n";
    } else if (o.output.empty()) {
      out << text;
    }
    return res.code;
  }

  inline int run(int argc, char const* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
      args.emplace_back(argv[i]);
    }
    return run(std::move(args), out, err);
  }

}  // namespace locdil::cli
