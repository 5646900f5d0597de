// locdil - dilation theory on locally Hilbert spaces
//
// Reproducing kernel locally Hilbert spaces and minimal dilations.
//
// build_rklhs factors every increment's assembled Gram matrix M_k = V_k* V_k
// (Kolmogorov decomposition).  The columns of V_k, grouped by point, are the
// increment blocks of the point maps Γ_s : ℍ → 𝕂, and the rank r_k becomes the
// k-th increment of the dilation tower.  dilate() then realizes
// J = Γ_e and π(u) Γ_s = Γ_{us} on that space.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "locdil/core.hpp"
#include "locdil/local_operator.hpp"
#include "locdil/parallel.hpp"
#include "locdil/pd_kernel.hpp"
#include "locdil/star_semigroup.hpp"
#include "locdil/tower.hpp"

namespace locdil {

  // Choice of orthonormal basis inside each dilation increment.  Any choice
  // gives a dilation; different choices are related by a locally unitary.
  struct FactorOptions {
    enum class Order { descending, ascending };
    Order order = Order::descending;
    // if set, the factor is rotated by a seeded random unitary
    std::optional<std::uint64_t> basis_seed;
  };

  // Factor data of one increment: V (r × n·δ) with V* V = M_k, and its
  // pseudo-inverse (n·δ × r).
  struct IncrementFactor {
    Matrix factor;
    Matrix pseudo_inverse;
  };

  struct Rklhs {
    Tower                        base_tower;
    Tower                        dilation_tower;
    std::vector<LocalOperator>   point_maps;  // Γ_s ∈ L(ℍ, 𝕂)
    OperatorKernel               kernel;
    std::vector<IncrementFactor> factors;
    double                       reproducing_residual = 0.0;

    // k(s) = Γ_s* k for k ∈ 𝕂
    LocalVector evaluate(LocalVector const& k, std::size_t s) const {
      return adjoint(point_maps.at(s)).apply(k);
    }
  };

  namespace detail {

    inline IncrementFactor factor_psd(Matrix const&        m,
                                      double               rank_tol,
                                      FactorOptions const& opts,
                                      std::size_t          increment) {
      auto const   eig = linalg::eig_descending(m);
      double const top
          = eig.values.size() > 0 ? std::max(eig.values(0), 0.0) : 0.0;
      Eigen::Index r = 0;
      while (r < eig.values.size() && top > 0.0
             && eig.values(r) > rank_tol * top) {
        ++r;
      }
      IncrementFactor f;
      Matrix          q = eig.vectors.leftCols(r);
      RealVector      root(r);
      for (Eigen::Index i = 0; i < r; ++i) {
        root(i) = std::sqrt(eig.values(i));
      }
      if (opts.order == FactorOptions::Order::ascending) {
        q    = q.rowwise().reverse().eval();
        root = root.reverse().eval();
      }
      // V = Λ^{1/2} Q*,  V^+ = Q Λ^{-1/2}
      f.factor         = root.cast<Complex>().asDiagonal() * q.adjoint();
      f.pseudo_inverse = q * root.cwiseInverse().cast<Complex>().asDiagonal();
      if (opts.basis_seed) {
        std::mt19937_64 rng(*opts.basis_seed + 0x9e3779b97f4a7c15ULL * increment);
        Matrix const    rot = linalg::random_unitary(r, rng);
        f.factor            = rot * f.factor;
        f.pseudo_inverse    = f.pseudo_inverse * rot.adjoint();
      }
      return f;
    }

  }  // namespace detail

  // Reproducing kernel locally Hilbert space of an LPDK.  Throws
  // IndefiniteKernel (carrying the certificate) if Γ is not LPD.
  inline Rklhs build_rklhs(OperatorKernel const& g,
                           Tolerances const&     tol  = {},
                           FactorOptions const&  opts = {}) {
    auto const cert = is_lpdk(g, tol);
    if (!cert.ok()) {
      throw IndefiniteKernel("kernel is not locally positive definite ("
                                 + std::string(to_string(cert.status)) + ")",
                             cert);
    }
    Tower const&      h = g.tower();
    std::size_t const L = h.levels();
    std::size_t const n = g.size();

    Rklhs out;
    out.base_tower = h;
    out.kernel     = g;
    out.factors.resize(L);
    parallel_for(L, [&](std::size_t k) {
      out.factors[k]
          = detail::factor_psd(assemble_increment(g, k), tol.rank, opts, k);
    });

    std::vector<std::size_t> dims;
    std::size_t              acc = 0;
    for (auto const& f : out.factors) {
      acc += static_cast<std::size_t>(f.factor.rows());
      dims.push_back(acc);
    }
    if (dims.front() == 0) {
      throw PreconditionError("kernel vanishes on the first level; the "
                              "reproducing kernel space would be trivial "
                              "there");
    }
    out.dilation_tower = Tower(dims);

    for (std::size_t s = 0; s < n; ++s) {
      std::vector<Matrix> blocks;
      for (std::size_t k = 0; k < L; ++k) {
        auto const d = static_cast<Eigen::Index>(h.increment(k));
        blocks.push_back(out.factors[k].factor.middleCols(
            static_cast<Eigen::Index>(s) * d, d));
      }
      out.point_maps.emplace_back(h, out.dilation_tower, std::move(blocks));
    }

    // Γ_s* Γ_t = Γ(t, s)
    double r = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      auto const gs = adjoint(out.point_maps[s]);
      for (std::size_t t = 0; t < n; ++t) {
        r = std::max(r, distance(gs * out.point_maps[t], g(t, s)));
      }
    }
    out.reproducing_residual = r;
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // Dilation of an LPDF
  ////////////////////////////////////////////////////////////////////////

  struct DilationCertificate {
    double                   dilation_residual       = 0.0;  // φ(s) vs J*π(s)J
    double                   representation_residual = 0.0;
    double                   isometry_residual       = 0.0;  // J*J vs I
    double                   shift_residual          = 0.0;  // π(u)Γ_s vs Γ_us
    double                   reproducing_residual    = 0.0;
    double                   lbc_excess              = 0.0;  // ‖π(u)‖_λ - C_u^λ
    std::vector<std::size_t> minimal_ranks;                   // per increment
    bool                     minimal  = false;
    bool                     verified = false;
    // filled for groups with s* = s^{-1}
    std::optional<std::vector<bool>> unitary;
    double                           tolerance = 0.0;
  };

  struct DilationResult {
    Rklhs                      rklhs;
    LocalOperator              embedding;       // J ∈ L(ℍ, 𝕂)
    std::vector<LocalOperator> representation;  // π(s) ∈ L(𝕂)
    LbcTable                   lbc;
    DilationCertificate        certificate;

    Tower const& dilation_tower() const noexcept {
      return rklhs.dilation_tower;
    }
  };

  // Minimal dilation of an LPDF with φ(e) = I.  Throws IndefiniteKernel for
  // a non-LPDF, LbcViolation when the boundedness condition fails and
  // PreconditionError when φ(e) ≠ I (J could not be isometric).
  inline DilationResult dilate(OperatorFunction const& phi,
                               Tolerances const&       tol  = {},
                               FactorOptions const&    opts = {}) {
    auto const&       sg = phi.semigroup;
    std::size_t const n  = sg.size();
    std::size_t const L  = phi.tower.levels();

    double scale = 0.0;
    for (auto const& v : phi.values) {
      scale = std::max(scale, v.norm());
    }
    double const eps = tol.construction * (1.0 + scale);

    double const unit_gap
        = distance(phi(sg.neutral()), LocalOperator::identity(phi.tower));
    if (unit_gap > eps) {
      throw PreconditionError("φ(e) must be the identity for the embedding to "
                              "be isometric (‖φ(e) - I‖ = "
                              + std::to_string(unit_gap) + ")");
    }

    DilationResult out;
    out.lbc   = lbc_constants(phi, tol);
    out.rklhs = build_rklhs(kernel_of_function(phi), tol, opts);
    Tower const& K = out.rklhs.dilation_tower;
    out.embedding  = out.rklhs.point_maps[sg.neutral()];

    // π(u) = W V^+ per increment, W = [Γ_{us}]_s
    std::vector<std::vector<Matrix>> blocks(n, std::vector<Matrix>(L));
    std::vector<std::vector<double>> shift(n, std::vector<double>(L, 0.0));
    parallel_for(L, [&](std::size_t k) {
      auto const&  f = out.rklhs.factors[k];
      auto const   d = static_cast<Eigen::Index>(phi.tower.increment(k));
      Eigen::Index r = f.factor.rows();
      for (std::size_t u = 0; u < n; ++u) {
        Matrix w(r, f.factor.cols());
        for (std::size_t s = 0; s < n; ++s) {
          w.middleCols(static_cast<Eigen::Index>(s) * d, d)
              = f.factor.middleCols(static_cast<Eigen::Index>(sg.mul(u, s)) * d, d);
        }
        blocks[u][k] = w * f.pseudo_inverse;
        shift[u][k]  = linalg::op_norm(blocks[u][k] * f.factor - w);
      }
    });
    auto& cert = out.certificate;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t k = 0; k < L; ++k) {
        cert.shift_residual = std::max(cert.shift_residual, shift[u][k]);
        if (shift[u][k] > eps) {
          throw LbcViolation(u, k, shift[u][k]);
        }
      }
      out.representation.emplace_back(K, K, std::move(blocks[u]));
    }

    auto const& pi = out.representation;
    auto const  j  = out.embedding;
    auto const  js = adjoint(j);

    cert.tolerance            = eps;
    cert.reproducing_residual = out.rklhs.reproducing_residual;
    cert.isometry_residual
        = distance(js * j, LocalOperator::identity(phi.tower));
    for (std::size_t s = 0; s < n; ++s) {
      cert.dilation_residual
          = std::max(cert.dilation_residual, distance(phi(s), js * pi[s] * j));
    }

    double rep = distance(pi[sg.neutral()], LocalOperator::identity(K));
    for (std::size_t s = 0; s < n; ++s) {
      rep = std::max(rep, distance(pi[sg.star(s)], adjoint(pi[s])));
      for (std::size_t t = 0; t < n; ++t) {
        rep = std::max(rep, distance(pi[sg.mul(s, t)], pi[s] * pi[t]));
      }
    }
    cert.representation_residual = rep;

    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < n; ++u) {
      auto const norms = pi[u].seminorms();
      for (std::size_t l = 0; l < L; ++l) {
        excess = std::max(excess, norms[l] - out.lbc(u, l));
      }
    }
    cert.lbc_excess = excess;

    // ⋁ π(s) J ℍ = 𝕂: the stacked columns [π(s)J]_s have full rank
    cert.minimal = true;
    for (std::size_t k = 0; k < L; ++k) {
      Eigen::Index const r = K.increment(k);
      auto const         d = static_cast<Eigen::Index>(phi.tower.increment(k));
      Matrix             cols(r, static_cast<Eigen::Index>(n) * d);
      for (std::size_t s = 0; s < n; ++s) {
        cols.middleCols(static_cast<Eigen::Index>(s) * d, d)
            = pi[s].block(k) * j.block(k);
      }
      // singular values of V_k are square roots of kept eigenvalues
      auto const rk = static_cast<std::size_t>(
          linalg::rank(cols, 0.1 * std::sqrt(tol.rank)));
      cert.minimal_ranks.push_back(rk);
      cert.minimal = cert.minimal && rk == static_cast<std::size_t>(r);
    }

    if (sg.is_group_with_inverse_star()) {
      std::vector<bool> u;
      for (auto const& p : pi) {
        u.push_back(has_flag(p, Flag::unitary, tol.construction));
      }
      cert.unitary = std::move(u);
    }

    double const lbc_scale = [&] {
      double m = 0.0;
      for (auto const& row : out.lbc.constants) {
        for (double c : row) {
          m = std::max(m, c);
        }
      }
      return m;
    }();
    cert.verified = cert.dilation_residual <= eps
                    && cert.representation_residual <= eps
                    && cert.isometry_residual <= eps
                    && cert.reproducing_residual <= eps
                    && cert.lbc_excess <= tol.construction * (1.0 + lbc_scale)
                    && cert.minimal;
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // ρ-dilations
  ////////////////////////////////////////////////////////////////////////

  struct RhoDilationResult {
    double            rho = 1.0;
    KernelCertificate rho_lpd;
    DilationResult    dilation;
    // max_{s ≠ e} ‖ψ(s) - ρ J* π(s) J‖
    double rho_residual = 0.0;
  };

  // φ = ψ/ρ off e and I at e.
  inline OperatorFunction rho_normalized(OperatorFunction const& psi,
                                         double                  rho) {
    if (!(rho > 0.0)) {
      throw PreconditionError("ρ must be positive");
    }
    std::vector<LocalOperator> v;
    for (std::size_t s = 0; s < psi.semigroup.size(); ++s) {
      if (s == psi.semigroup.neutral()) {
        v.push_back(LocalOperator::identity(psi.tower));
      } else {
        v.push_back(Complex(1.0 / rho) * psi(s));
      }
    }
    return OperatorFunction(psi.semigroup, psi.tower, std::move(v));
  }

  // Throws IndefiniteKernel with a witness if (ρLPD) fails, LbcViolation if
  // (ρLBC) fails.
  inline RhoDilationResult rho_dilate(OperatorFunction const& psi,
                                      double                  rho,
                                      Tolerances const&       tol  = {},
                                      FactorOptions const&    opts = {}) {
    if (!(rho > 0.0)) {
      throw PreconditionError("ρ must be positive");
    }
    RhoDilationResult out;
    out.rho     = rho;
    out.rho_lpd = is_lpdk(rho_kernel(psi, rho), tol);
    if (!out.rho_lpd.ok()) {
      throw IndefiniteKernel("ρ-positivity condition fails for ρ = "
                                 + std::to_string(rho),
                             out.rho_lpd);
    }
    out.dilation = dilate(rho_normalized(psi, rho), tol, opts);
    auto const& j  = out.dilation.embedding;
    auto const  js = adjoint(j);
    for (std::size_t s = 0; s < psi.semigroup.size(); ++s) {
      if (s == psi.semigroup.neutral()) {
        continue;
      }
      out.rho_residual
          = std::max(out.rho_residual,
                     distance(psi(s),
                              Complex(rho) * (js * out.dilation.representation[s] * j)));
    }
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // Uniqueness up to locally unitary equivalence
  ////////////////////////////////////////////////////////////////////////

  // W with W Γ_s = Γ'_s for two minimal Kolmogorov factorizations of the same
  // kernel, built increment-wise as V' V^+.
  inline LocalOperator intertwiner(std::vector<LocalOperator> const& from,
                                   std::vector<LocalOperator> const& to) {
    if (from.empty() || from.size() != to.size()) {
      throw StructuralError("intertwiner needs matching non-empty families");
    }
    Tower const&      h = from.front().source();
    std::size_t const n = from.size();
    std::vector<Matrix> blocks;
    for (std::size_t k = 0; k < h.levels(); ++k) {
      auto const   d  = static_cast<Eigen::Index>(h.increment(k));
      Eigen::Index r1 = from.front().block(k).rows();
      Eigen::Index r2 = to.front().block(k).rows();
      Matrix       v1(r1, static_cast<Eigen::Index>(n) * d);
      Matrix       v2(r2, static_cast<Eigen::Index>(n) * d);
      for (std::size_t s = 0; s < n; ++s) {
        v1.middleCols(static_cast<Eigen::Index>(s) * d, d) = from[s].block(k);
        v2.middleCols(static_cast<Eigen::Index>(s) * d, d) = to[s].block(k);
      }
      if (v1.size() == 0 || v2.size() == 0) {
        blocks.push_back(Matrix::Zero(r2, r1));
        continue;
      }
      blocks.push_back(v2 * v1.completeOrthogonalDecomposition().pseudoInverse());
    }
    return LocalOperator(from.front().target(), to.front().target(), std::move(blocks));
  }

  struct Equivalence {
    LocalOperator map;  // W : 𝕂 → 𝕂'
    double        unitary_residual      = 0.0;
    double        embedding_residual    = 0.0;  // ‖W J - J'‖
    double        intertwining_residual = 0.0;  // max_s ‖W π(s) - π'(s) W‖
    bool          unitary               = false;
  };

  inline Equivalence unitary_equivalence(DilationResult const& a,
                                         DilationResult const& b,
                                         double tol = default_tolerances.construction) {
    Equivalence e;
    e.map = intertwiner(a.rklhs.point_maps, b.rklhs.point_maps);
    auto const ws = adjoint(e.map);
    e.unitary_residual = std::max(
        distance(ws * e.map, LocalOperator::identity(a.dilation_tower())),
        distance(e.map * ws, LocalOperator::identity(b.dilation_tower())));
    e.unitary            = has_flag(e.map, Flag::unitary, tol);
    e.embedding_residual = distance(e.map * a.embedding, b.embedding);
    for (std::size_t s = 0; s < a.representation.size(); ++s) {
      e.intertwining_residual
          = std::max(e.intertwining_residual,
                     distance(e.map * a.representation[s],
                              b.representation[s] * e.map));
    }
    return e;
  }

}  // namespace locdil
