// locdil - dilation theory on locally Hilbert spaces
//
// L(ℍ)-valued kernels Γ: S×S → L(ℍ) and functions φ: S → L(ℍ) on a finite
// *-semigroup, with certificates for locally positive definiteness and the
// boundedness constants needed by the dilation theorem.
//
// Assembled matrices use one fixed ordering: block row t, block column s
// holds Γ(s,t), so that  Σ_{s,t} <Γ(s,t) h_s, h_t> = h* M h  for the
// stacked vector h = (h_0, h_1, ...).

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "locdil/core.hpp"
#include "locdil/local_operator.hpp"
#include "locdil/star_semigroup.hpp"
#include "locdil/tower.hpp"

namespace locdil {

  ////////////////////////////////////////////////////////////////////////
  // Kernel and function types
  ////////////////////////////////////////////////////////////////////////

  class OperatorKernel {
   public:
    OperatorKernel() = default;

    // values[s * n + t] = Γ(s, t); every value must be an operator on tower.
    OperatorKernel(Tower tower, std::size_t n, std::vector<LocalOperator> values)
        : _tower(std::move(tower)), _n(n), _values(std::move(values)) {
      if (_n == 0) {
        throw StructuralError("kernel needs at least one point");
      }
      if (_values.size() != _n * _n) {
        throw StructuralError("kernel on " + std::to_string(_n)
                              + " points needs " + std::to_string(_n * _n)
                              + " values, got "
                              + std::to_string(_values.size()));
      }
      for (auto const& v : _values) {
        if (v.source() != _tower || v.target() != _tower) {
          throw StructuralError("kernel values must all act on the kernel's "
                                "tower");
        }
      }
    }

    Tower const& tower() const noexcept {
      return _tower;
    }

    std::size_t size() const noexcept {
      return _n;
    }

    LocalOperator const& operator()(std::size_t s, std::size_t t) const {
      return _values.at(s * _n + t);
    }

    std::vector<LocalOperator> const& values() const noexcept {
      return _values;
    }

    OperatorKernel scaled(double c) const {
      std::vector<LocalOperator> v(_values);
      for (auto& x : v) {
        x *= c;
      }
      return OperatorKernel(_tower, _n, std::move(v));
    }

   private:
    Tower                      _tower;
    std::size_t                _n = 0;
    std::vector<LocalOperator> _values;
  };

  struct OperatorFunction {
    StarSemigroup              semigroup;
    Tower                      tower;
    std::vector<LocalOperator> values;  // indexed by element

    OperatorFunction() = default;

    OperatorFunction(StarSemigroup sg, Tower t, std::vector<LocalOperator> v)
        : semigroup(std::move(sg)), tower(std::move(t)), values(std::move(v)) {
      if (values.size() != semigroup.size()) {
        throw StructuralError("function needs one value per semigroup "
                              "element ("
                              + std::to_string(semigroup.size()) + "), got "
                              + std::to_string(values.size()));
      }
      for (auto const& x : values) {
        if (x.source() != tower || x.target() != tower) {
          throw StructuralError("function values must all act on the "
                                "function's tower");
        }
      }
    }

    LocalOperator const& operator()(std::size_t s) const {
      return values.at(s);
    }
  };

  // Γ_φ(s, t) = φ(t* s)
  inline OperatorKernel kernel_of_function(OperatorFunction const& phi) {
    auto const&                sg = phi.semigroup;
    std::size_t const          n  = sg.size();
    std::vector<LocalOperator> v;
    v.reserve(n * n);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < n; ++t) {
        v.push_back(phi(sg.mul(sg.star(t), s)));
      }
    }
    return OperatorKernel(phi.tower, n, std::move(v));
  }

  // Kernel of the (ρLPD) form: ρ I where t* s = e, ψ(t* s) elsewhere.
  inline OperatorKernel rho_kernel(OperatorFunction const& psi, double rho) {
    auto const&                sg = psi.semigroup;
    std::size_t const          n  = sg.size();
    LocalOperator const        rho_id = Complex(rho) * LocalOperator::identity(psi.tower);
    std::vector<LocalOperator> v;
    v.reserve(n * n);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < n; ++t) {
        auto const ts = sg.mul(sg.star(t), s);
        v.push_back(ts == sg.neutral() ? rho_id : psi(ts));
      }
    }
    return OperatorKernel(psi.tower, n, std::move(v));
  }

  ////////////////////////////////////////////////////////////////////////
  // Assembly
  ////////////////////////////////////////////////////////////////////////

  // Assembled n·d_λ square matrix for level λ.
  inline Matrix assemble_level(OperatorKernel const& g, std::size_t lambda) {
    auto const  d = static_cast<Eigen::Index>(g.tower().dim(lambda));
    auto const  n = static_cast<Eigen::Index>(g.size());
    Matrix      m(n * d, n * d);
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index t = 0; t < n; ++t) {
        m.block(t * d, s * d, d, d) = g(static_cast<std::size_t>(s),
                                        static_cast<std::size_t>(t))
                                          .level(lambda);
      }
    }
    return m;
  }

  // Assembled n·δ_k square matrix for increment k.
  inline Matrix assemble_increment(OperatorKernel const& g, std::size_t k) {
    auto const d = static_cast<Eigen::Index>(g.tower().increment(k));
    auto const n = static_cast<Eigen::Index>(g.size());
    Matrix     m(n * d, n * d);
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index t = 0; t < n; ++t) {
        m.block(t * d, s * d, d, d) = g(static_cast<std::size_t>(s),
                                        static_cast<std::size_t>(t))
                                          .block(k);
      }
    }
    return m;
  }

  ////////////////////////////////////////////////////////////////////////
  // Certificates
  ////////////////////////////////////////////////////////////////////////

  enum class KernelStatus { positive, indefinite, not_hermitian };

  inline constexpr std::string_view to_string(KernelStatus s) noexcept {
    switch (s) {
      case KernelStatus::positive:
        return "positive";
      case KernelStatus::indefinite:
        return "indefinite";
      case KernelStatus::not_hermitian:
        return "not_hermitian";
    }
    return "?";
  }

  // One assembled matrix: a level or an increment block.
  struct SpectrumReport {
    double min_eig     = 0.0;
    double max_abs_eig = 0.0;
    double tolerance   = 0.0;
    bool   ok          = true;
  };

  // Family (h_s) with Σ <Γ(s,t) h_s, h_t> = eigenvalue < 0, given at the
  // witness level.
  struct KernelWitness {
    std::size_t         level = 0;
    double              value = 0.0;
    std::vector<Vector> family;
  };

  struct KernelCertificate {
    KernelStatus                 status = KernelStatus::positive;
    double                       hermitian_residual = 0.0;
    std::vector<SpectrumReport>  reports;  // per level or per increment
    std::optional<KernelWitness> witness;

    bool ok() const noexcept {
      return status == KernelStatus::positive;
    }
  };

  class IndefiniteKernel : public PreconditionError {
   public:
    IndefiniteKernel(std::string const& what, KernelCertificate cert)
        : PreconditionError(what), _cert(std::move(cert)) {}

    KernelCertificate const& certificate() const noexcept {
      return _cert;
    }

   private:
    KernelCertificate _cert;
  };

  namespace detail {

    inline double hermitian_residual(OperatorKernel const& g) {
      double r = 0.0;
      for (std::size_t s = 0; s < g.size(); ++s) {
        for (std::size_t t = s; t < g.size(); ++t) {
          r = std::max(r, distance(g(s, t), adjoint(g(t, s))));
        }
      }
      return r;
    }

    inline double kernel_scale(OperatorKernel const& g) {
      double sc = 0.0;
      for (auto const& v : g.values()) {
        sc = std::max(sc, v.norm());
      }
      return sc;
    }

    inline SpectrumReport spectrum(Matrix const& m,
                                   double        tol,
                                   Vector*       witness) {
      SpectrumReport r;
      if (m.rows() == 0) {
        return r;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::hermitian_part(m));
      auto const& ev = es.eigenvalues();
      r.min_eig      = ev(0);
      r.max_abs_eig  = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
      r.tolerance    = tol * r.max_abs_eig;
      r.ok           = r.min_eig >= -r.tolerance;
      if (!r.ok && witness != nullptr) {
        *witness = es.eigenvectors().col(0);
      }
      return r;
    }

    // Matrix i is level level_of(i) when per_level, else increment i.
    template <typename Assemble, typename LevelOf>
    KernelCertificate certify(OperatorKernel const& g,
                              std::size_t           count,
                              Assemble&&            assemble,
                              bool                  per_level,
                              LevelOf&&             level_of,
                              Tolerances const&     tol) {
      KernelCertificate cert;
      cert.hermitian_residual = hermitian_residual(g);
      if (cert.hermitian_residual
          > tol.psd * (1.0 + kernel_scale(g))) {
        cert.status = KernelStatus::not_hermitian;
        return cert;
      }
      for (std::size_t i = 0; i < count; ++i) {
        Vector     w;
        auto const rep = spectrum(assemble(i), tol.psd, &w);
        cert.reports.push_back(rep);
        if (!rep.ok && !cert.witness) {
          cert.status = KernelStatus::indefinite;
          // split the stacked eigenvector into the family (h_s)
          KernelWitness kw;
          kw.value                = rep.min_eig;
          auto const         n    = static_cast<Eigen::Index>(g.size());
          Eigen::Index const d    = w.size() / n;
          std::size_t const  lvl  = per_level ? level_of(i) : g.tower().levels() - 1;
          kw.level                = lvl;
          auto const   dl         = static_cast<Eigen::Index>(g.tower().dim(lvl));
          Eigen::Index off        = per_level ? 0 : static_cast<Eigen::Index>(g.tower().offset(i));
          for (Eigen::Index s = 0; s < n; ++s) {
            Vector h                  = Vector::Zero(dl);
            h.segment(off, d)         = w.segment(s * d, d);
            kw.family.push_back(std::move(h));
          }
          cert.witness = std::move(kw);
        }
      }
      return cert;
    }

  }  // namespace detail

  // Locally positive definite kernel check: every level's assembled matrix
  // is Hermitian and has min eigenvalue ≥ -tol.psd · max|eigenvalue|.
  // One report per level.
  inline KernelCertificate is_lpdk(OperatorKernel const& g,
                                   Tolerances const&     tol = {}) {
    return detail::certify(
        g,
        g.tower().levels(),
        [&](std::size_t l) { return assemble_level(g, l); },
        true,
        [](std::size_t l) { return l; },
        tol);
  }

  // Same decision from the top level alone (one report).
  inline KernelCertificate is_lpdk_top_level(OperatorKernel const& g,
                                             Tolerances const&     tol = {}) {
    std::size_t const top = g.tower().levels() - 1;
    return detail::certify(
        g,
        1,
        [&](std::size_t) { return assemble_level(g, top); },
        true,
        [&](std::size_t) { return top; },
        tol);
  }

  // Same decision from the increment blocks (one report per increment).
  inline KernelCertificate is_lpdk_by_increment(OperatorKernel const& g,
                                                Tolerances const& tol = {}) {
    return detail::certify(
        g,
        g.tower().levels(),
        [&](std::size_t k) { return assemble_increment(g, k); },
        false,
        [](std::size_t k) { return k; },
        tol);
  }

  inline KernelCertificate is_lpdf(OperatorFunction const& phi,
                                   Tolerances const&       tol = {}) {
    return is_lpdk(kernel_of_function(phi), tol);
  }

  ////////////////////////////////////////////////////////////////////////
  // Boundedness constants
  ////////////////////////////////////////////////////////////////////////

  // Range of M_u^λ not contained in the range of M^λ.
  class LbcViolation : public PreconditionError {
   public:
    LbcViolation(std::size_t u, std::size_t level, double residual)
        : PreconditionError("boundedness condition fails for u = "
                            + std::to_string(u) + " at level "
                            + std::to_string(level + 1)
                            + " (range residual " + std::to_string(residual)
                            + ")"),
          _u(u),
          _level(level) {}

    std::size_t element() const noexcept {
      return _u;
    }

    std::size_t level() const noexcept {
      return _level;
    }

   private:
    std::size_t _u;
    std::size_t _level;
  };

  // constants[u][λ] = smallest C with M_u^λ ⪯ C² M^λ.
  struct LbcTable {
    std::vector<std::vector<double>> constants;

    double operator()(std::size_t u, std::size_t level) const {
      return constants.at(u).at(level);
    }
  };

  // M_u for increment k: block (t, s) = φ(t* u* u s).
  inline Matrix assemble_shifted_increment(OperatorFunction const& phi,
                                           std::size_t             u,
                                           std::size_t             k) {
    auto const& sg = phi.semigroup;
    auto const  d  = static_cast<Eigen::Index>(phi.tower.increment(k));
    auto const  n  = static_cast<Eigen::Index>(sg.size());
    auto const  uu = sg.mul(sg.star(u), u);
    Matrix      m(n * d, n * d);
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index t = 0; t < n; ++t) {
        auto const x = sg.mul(sg.star(static_cast<std::size_t>(t)),
                              sg.mul(uu, static_cast<std::size_t>(s)));
        m.block(t * d, s * d, d, d) = phi(x).block(k);
      }
    }
    return m;
  }

  // Optimal boundedness constants via the largest generalized Rayleigh
  // quotient of (M_u, M) on range(M), computed per increment and maximized
  // over increments up to each level.  Throws IndefiniteKernel if φ is not
  // an LPDF and LbcViolation if some range inclusion fails.
  inline LbcTable lbc_constants(OperatorFunction const& phi,
                                Tolerances const&       tol = {}) {
    auto const cert = is_lpdf(phi, tol);
    if (!cert.ok()) {
      throw IndefiniteKernel("function is not locally positive definite",
                             cert);
    }
    auto const       kernel = kernel_of_function(phi);
    std::size_t const n     = phi.semigroup.size();
    std::size_t const L     = phi.tower.levels();
    LbcTable          out;
    out.constants.assign(n, std::vector<double>(L, 0.0));
    for (std::size_t k = 0; k < L; ++k) {
      if (phi.tower.increment(k) == 0) {
        for (std::size_t u = 0; u < n; ++u) {
          out.constants[u][k] = k == 0 ? 0.0 : out.constants[u][k - 1];
        }
        continue;
      }
      Matrix const m   = assemble_increment(kernel, k);
      auto const   eig = linalg::eig_descending(m);
      double const top = eig.values.size() > 0 ? std::max(eig.values(0), 0.0) : 0.0;
      Eigen::Index r   = 0;
      while (r < eig.values.size() && top > 0.0
             && eig.values(r) > tol.rank * top) {
        ++r;
      }
      Matrix const q = eig.vectors.leftCols(r);
      // whitening map on range(M)
      Matrix w = q;
      for (Eigen::Index i = 0; i < r; ++i) {
        w.col(i) /= std::sqrt(eig.values(i));
      }
      Matrix const p = q * q.adjoint();
      for (std::size_t u = 0; u < n; ++u) {
        Matrix const mu     = assemble_shifted_increment(phi, u, k);
        double const mu_nrm = linalg::op_norm(mu);
        Matrix const outside = mu - p * mu;
        double const resid   = linalg::op_norm(outside);
        if (resid > tol.construction * (1.0 + mu_nrm)) {
          throw LbcViolation(u, k, resid);
        }
        double c2 = 0.0;
        if (r > 0) {
          c2 = std::max(0.0,
                        linalg::eig_descending(w.adjoint() * mu * w).values(0));
        }
        double const c      = std::sqrt(c2);
        double const below  = k == 0 ? 0.0 : out.constants[u][k - 1];
        out.constants[u][k] = std::max(below, c);
      }
    }
    return out;
  }

}  // namespace locdil
