// locdil - dilation theory on locally Hilbert spaces
//
// Concrete dilations: Naimark dilation of a discrete operator-valued
// measure, the finite-horizon unitary dilation of a locally contraction and
// the windowed ρ-contraction test.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "locdil/core.hpp"
#include "locdil/local_operator.hpp"
#include "locdil/tower.hpp"

namespace locdil {

  ////////////////////////////////////////////////////////////////////////
  // Square root
  ////////////////////////////////////////////////////////////////////////

  // Blockwise Hermitian square root of a locally positive operator.
  // Eigenvalues down to -tol·(1 + ‖A‖) are clamped to zero.
  inline LocalOperator square_root(LocalOperator const& a,
                                   double tol = default_tolerances.psd) {
    if (!a.is_square()) {
      throw StructuralError("square root needs an operator on a single tower");
    }
    if (!has_flag(a, Flag::self_adjoint, tol)) {
      throw PreconditionError("square root of a non-self-adjoint operator");
    }
    double const        clamp = tol * (1.0 + a.norm());
    std::vector<Matrix> b;
    for (std::size_t k = 0; k < a.levels(); ++k) {
      try {
        b.push_back(linalg::psd_sqrt(a.block(k), clamp));
      } catch (PreconditionError const& e) {
        throw PreconditionError("operator is not locally positive at level "
                                + std::to_string(k + 1) + ": " + e.what());
      }
    }
    return LocalOperator(a.source(), a.target(), std::move(b));
  }

  ////////////////////////////////////////////////////////////////////////
  // Naimark dilation
  ////////////////////////////////////////////////////////////////////////

  // A discrete locally positive operator-valued measure: effects E_i with
  // 0 ⪯ E_i ⪯ I and Σ E_i = I.
  struct LocalPovm {
    Tower                      tower;
    std::vector<LocalOperator> atoms;
  };

  // Checks positivity of each atom and Σ E_i = I, naming the first failure.
  inline void validate(LocalPovm const& p, double tol = default_tolerances.psd) {
    if (p.atoms.empty()) {
      throw StructuralError("POVM needs at least one atom");
    }
    LocalOperator sum = LocalOperator::zero(p.tower, p.tower);
    for (std::size_t i = 0; i < p.atoms.size(); ++i) {
      auto const& e = p.atoms[i];
      if (e.source() != p.tower || e.target() != p.tower) {
        throw StructuralError("atom " + std::to_string(i)
                              + " does not act on the POVM tower");
      }
      if (!has_flag(e, Flag::self_adjoint, tol)) {
        throw PreconditionError("atom " + std::to_string(i)
                                + " is not self-adjoint");
      }
      for (std::size_t k = 0; k < e.levels(); ++k) {
        double const m = linalg::min_eigenvalue(e.block(k));
        if (m < -tol * (1.0 + e.norm())) {
          throw PreconditionError("atom " + std::to_string(i)
                                  + " is not positive at level "
                                  + std::to_string(k + 1) + " (eigenvalue "
                                  + std::to_string(m) + ")");
        }
      }
      sum += e;
    }
    auto const id  = LocalOperator::identity(p.tower);
    double const gap = distance(sum, id);
    if (gap > tol * static_cast<double>(p.atoms.size())) {
      double worst = 0.0;
      std::size_t lvl = 0;
      for (std::size_t k = 0; k < sum.levels(); ++k) {
        Matrix const diff = sum.block(k) - id.block(k);
        double const m    = linalg::op_norm(diff);
        if (m > worst) {
          worst = m;
          lvl   = k;
        }
      }
      throw PreconditionError("atoms do not sum to the identity (defect "
                              + std::to_string(worst) + " at level "
                              + std::to_string(lvl + 1) + ")");
    }
  }

  // Appends I - Σ E_i as an extra atom; rejects if that defect is not
  // positive.
  inline LocalPovm with_defect_atom(LocalPovm p,
                                    double tol = default_tolerances.psd) {
    LocalOperator defect = LocalOperator::identity(p.tower);
    for (auto const& e : p.atoms) {
      defect -= e;
    }
    for (std::size_t k = 0; k < defect.levels(); ++k) {
      double const m = linalg::min_eigenvalue(defect.block(k));
      if (m < -tol * (1.0 + defect.norm())) {
        throw PreconditionError("defect atom I - ΣE is not positive at level "
                                + std::to_string(k + 1) + " (eigenvalue "
                                + std::to_string(m) + ")");
      }
    }
    p.atoms.push_back(std::move(defect));
    return p;
  }

  struct SpectralDilation {
    Tower                      dilation_tower;
    LocalOperator              embedding;    // J ∈ L(ℍ, 𝕂)
    std::vector<LocalOperator> projections;  // F_i ∈ L(𝕂)

    double compression_residual   = 0.0;  // max_i ‖E_i - J* F_i J‖
    double orthogonality_residual = 0.0;  // max_{i≠j} ‖F_i F_j‖
    double isometry_residual      = 0.0;  // ‖J* J - I‖
    std::vector<std::size_t> minimal_ranks;  // rank of [F_i J]_i per increment
  };

  // J h = (Q_i* E_i^{1/2} h)_i where Q_i spans range(E_i); the F_i are the
  // coordinate projections onto the slots.  The slots are already the
  // minimal invariant subspace ⊕_i range(E_i).
  inline SpectralDilation naimark(LocalPovm const&  p,
                                  Tolerances const& tol = {}) {
    validate(p, tol.psd);
    std::size_t const m = p.atoms.size();
    std::size_t const L = p.tower.levels();

    // slot sizes per increment
    std::vector<std::vector<Matrix>> pieces(L);  // Q_i* E_i^{1/2}
    std::vector<std::size_t>         dims;
    std::size_t                      acc = 0;
    for (std::size_t k = 0; k < L; ++k) {
      for (std::size_t i = 0; i < m; ++i) {
        Matrix const& e = p.atoms[i].block(k);
        if (e.size() == 0) {
          pieces[k].emplace_back(0, 0);
          continue;
        }
        Matrix const root = linalg::psd_sqrt(e, tol.psd * (1.0 + p.atoms[i].norm()));
        Matrix const q    = linalg::psd_range(e, tol.rank);
        pieces[k].push_back(q.adjoint() * root);
        acc += static_cast<std::size_t>(q.cols());
      }
      dims.push_back(acc);
    }
    SpectralDilation out;
    if (dims.front() == 0) {
      throw PreconditionError("all atoms vanish on the first level");
    }
    out.dilation_tower = Tower(dims);
    Tower const& K     = out.dilation_tower;

    std::vector<Matrix> jb;
    std::vector<std::vector<Matrix>> fb(m);
    for (std::size_t k = 0; k < L; ++k) {
      auto const r = static_cast<Eigen::Index>(K.increment(k));
      auto const d = static_cast<Eigen::Index>(p.tower.increment(k));
      Matrix     j(r, d);
      Eigen::Index row = 0;
      std::vector<std::pair<Eigen::Index, Eigen::Index>> slot;
      for (std::size_t i = 0; i < m; ++i) {
        Eigen::Index const ri = pieces[k][i].rows();
        if (ri > 0) {
          j.middleRows(row, ri) = pieces[k][i];
        }
        slot.emplace_back(row, ri);
        row += ri;
      }
      jb.push_back(std::move(j));
      for (std::size_t i = 0; i < m; ++i) {
        Matrix f = Matrix::Zero(r, r);
        f.block(slot[i].first, slot[i].first, slot[i].second, slot[i].second)
            .setIdentity();
        fb[i].push_back(std::move(f));
      }
    }
    out.embedding = LocalOperator(p.tower, K, std::move(jb));
    for (std::size_t i = 0; i < m; ++i) {
      out.projections.emplace_back(K, K, std::move(fb[i]));
    }

    auto const js = adjoint(out.embedding);
    out.isometry_residual
        = distance(js * out.embedding, LocalOperator::identity(p.tower));
    for (std::size_t i = 0; i < m; ++i) {
      out.compression_residual
          = std::max(out.compression_residual,
                     distance(p.atoms[i], js * out.projections[i] * out.embedding));
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) {
          out.orthogonality_residual
              = std::max(out.orthogonality_residual,
                         (out.projections[i] * out.projections[j]).norm());
        }
      }
    }
    for (std::size_t k = 0; k < L; ++k) {
      auto const r = static_cast<Eigen::Index>(K.increment(k));
      auto const d = static_cast<Eigen::Index>(p.tower.increment(k));
      Matrix     cols(r, static_cast<Eigen::Index>(m) * d);
      for (std::size_t i = 0; i < m; ++i) {
        cols.middleCols(static_cast<Eigen::Index>(i) * d, d)
            = out.projections[i].block(k) * out.embedding.block(k);
      }
      out.minimal_ranks.push_back(
          static_cast<std::size_t>(linalg::rank(cols, 0.1 * std::sqrt(tol.rank))));
    }
    return out;
  }

  // F(ω) = Σ_{i ∈ ω} F_i for a subset given as bitmask.
  inline LocalOperator spectral_measure(SpectralDilation const& d,
                                        std::size_t             mask) {
    LocalOperator f = LocalOperator::zero(d.dilation_tower, d.dilation_tower);
    for (std::size_t i = 0; i < d.projections.size(); ++i) {
      if ((mask >> i) & 1U) {
        f += d.projections[i];
      }
    }
    return f;
  }

  ////////////////////////////////////////////////////////////////////////
  // Finite-horizon unitary dilation
  ////////////////////////////////////////////////////////////////////////

  struct UnitaryDilation {
    std::size_t   horizon = 0;
    Tower         dilation_tower;
    LocalOperator unitary;    // U ∈ L(𝕂)
    LocalOperator embedding;  // J ∈ L(ℍ, 𝕂), first slot

    double unitary_residual     = 0.0;  // max(‖U*U - I‖, ‖UU* - I‖)
    double isometry_residual    = 0.0;
    double compression_residual = 0.0;  // max_{1≤n≤N} ‖J* Uⁿ J - Tⁿ‖
    std::vector<std::size_t> minimal_ranks;  // rank of [UⁿJ]_{|n|≤N}
  };

  // Throws PreconditionError naming the level and eigenvalue if I - T*T is
  // not locally positive.
  inline void require_contraction(LocalOperator const& t,
                                  double tol = default_tolerances.psd) {
    if (!t.is_square()) {
      throw StructuralError("contraction must act on a single tower");
    }
    for (std::size_t k = 0; k < t.levels(); ++k) {
      Matrix const& b = t.block(k);
      if (b.size() == 0) {
        continue;
      }
      double const m = linalg::min_eigenvalue(
          Matrix::Identity(b.cols(), b.cols()) - b.adjoint() * b);
      if (m < -tol) {
        throw PreconditionError("operator is not a locally contraction: "
                                "I - T*T has eigenvalue "
                                + std::to_string(m) + " at level "
                                + std::to_string(k + 1));
      }
    }
  }

  // Egerváry-type block unitary on 𝕂 = ℍ^{N+1}: per increment
  //
  //   [ T    0 ... 0   D_{T*} ]
  //   [ D_T  0 ... 0   -T*    ]
  //   [ 0    I         0      ]
  //   [        ...            ]
  //   [ 0        I     0      ]
  //
  // so that J* Uⁿ J = Tⁿ for 0 ≤ n ≤ N.
  inline UnitaryDilation unitary_dilation(LocalOperator const& t,
                                          std::size_t          horizon,
                                          Tolerances const&    tol = {}) {
    if (horizon == 0) {
      throw PreconditionError("horizon must be at least 1");
    }
    require_contraction(t, tol.psd);
    Tower const&      h = t.source();
    std::size_t const L = h.levels();
    auto const        slots = static_cast<Eigen::Index>(horizon + 1);

    std::vector<std::size_t> dims;
    for (auto d : h.dims()) {
      dims.push_back(d * (horizon + 1));
    }
    UnitaryDilation out;
    out.horizon        = horizon;
    out.dilation_tower = Tower(dims);

    std::vector<Matrix> ub;
    std::vector<Matrix> jb;
    for (std::size_t k = 0; k < L; ++k) {
      Matrix const&      b = t.block(k);
      Eigen::Index const d = b.rows();
      Matrix const       id = Matrix::Identity(d, d);
      double const       clamp = tol.psd;
      Matrix const       dt  = linalg::psd_sqrt(id - b.adjoint() * b, clamp);
      Matrix const       dts = linalg::psd_sqrt(id - b * b.adjoint(), clamp);
      Matrix             u   = Matrix::Zero(slots * d, slots * d);
      Eigen::Index const last = (slots - 1) * d;
      u.block(0, 0, d, d)       = b;
      u.block(0, last, d, d)    = dts;
      u.block(d, 0, d, d)       = dt;
      u.block(d, last, d, d)    = -b.adjoint();
      for (Eigen::Index row = 2; row < slots; ++row) {
        u.block(row * d, (row - 1) * d, d, d) = id;
      }
      ub.push_back(std::move(u));
      jb.push_back(Matrix::Identity(slots * d, d));
    }
    out.unitary   = LocalOperator(out.dilation_tower, out.dilation_tower, std::move(ub));
    out.embedding = LocalOperator(h, out.dilation_tower, std::move(jb));

    auto const& u  = out.unitary;
    auto const  us = adjoint(u);
    auto const  id = LocalOperator::identity(out.dilation_tower);
    out.unitary_residual
        = std::max(distance(us * u, id), distance(u * us, id));
    auto const js = adjoint(out.embedding);
    out.isometry_residual
        = distance(js * out.embedding, LocalOperator::identity(h));

    LocalOperator un = u;
    LocalOperator tn = t;
    for (std::size_t n = 1; n <= horizon; ++n) {
      out.compression_residual
          = std::max(out.compression_residual, distance(js * un * out.embedding, tn));
      un = un * u;
      tn = tn * t;
    }

    // span of Uⁿ J ℍ for |n| ≤ N
    for (std::size_t k = 0; k < L; ++k) {
      Matrix const&      ublk = u.block(k);
      Matrix const&      jblk = out.embedding.block(k);
      Eigen::Index const d    = jblk.cols();
      Eigen::Index const r    = jblk.rows();
      Matrix             cols(r, (2 * slots - 1) * d);
      Matrix             fwd = jblk;
      Matrix             bwd = jblk;
      cols.leftCols(d)       = jblk;
      for (Eigen::Index n = 1; n < slots; ++n) {
        fwd                                = ublk * fwd;
        bwd                                = ublk.adjoint() * bwd;
        cols.middleCols((2 * n - 1) * d, d) = fwd;
        cols.middleCols(2 * n * d, d)       = bwd;
      }
      out.minimal_ranks.push_back(
          static_cast<std::size_t>(linalg::rank(cols, 1e-9)));
    }
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // ρ-contractions
  ////////////////////////////////////////////////////////////////////////

  // T^{(n)} = Tⁿ for n ≥ 0, (T*)^{-n} for n < 0, on one matrix.
  inline Matrix signed_power(Matrix const& t, long n) {
    Matrix const base = n >= 0 ? t : Matrix(t.adjoint());
    Matrix       acc  = Matrix::Identity(t.rows(), t.cols());
    for (long i = 0; i < std::abs(n); ++i) {
      acc = acc * base;
    }
    return acc;
  }

  // (w+1) square block Toeplitz matrix with ρ I on the diagonal and
  // T^{(s-t)} in block (t, s).
  inline Matrix rho_window_matrix(Matrix const& t, double rho, std::size_t w) {
    Eigen::Index const d = t.rows();
    auto const         n = static_cast<Eigen::Index>(w + 1);
    std::vector<Matrix> pw(2 * static_cast<std::size_t>(n) - 1);
    for (long k = -(n - 1); k <= n - 1; ++k) {
      pw[static_cast<std::size_t>(k + n - 1)] = signed_power(t, k);
    }
    Matrix m(n * d, n * d);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index s = 0; s < n; ++s) {
        if (r == s) {
          m.block(r * d, s * d, d, d) = rho * Matrix::Identity(d, d);
        } else {
          m.block(r * d, s * d, d, d)
              = pw[static_cast<std::size_t>(s - r + n - 1)];
        }
      }
    }
    return m;
  }

  enum class RhoVerdict { no_with_witness, consistent_at_window };

  inline constexpr std::string_view to_string(RhoVerdict v) noexcept {
    return v == RhoVerdict::no_with_witness ? "no_with_witness"
                                            : "consistent_at_window_N";
  }

  // Negative direction of a window matrix: Σ <T^{(s-t)} h_s, h_t> + ρ Σ‖h_s‖²
  // = value < 0.
  struct WindowWitness {
    std::size_t         level  = 0;
    std::size_t         window = 0;
    double              value  = 0.0;
    std::vector<Vector> family;  // h_0..h_window at the witness level
  };

  // Polynomial p with ‖p(T_λ)‖ above the estimated circle supremum of
  // |ρ p(z) + (1 - ρ) p(0)|.
  struct PolynomialWitness {
    std::size_t          level = 0;
    std::vector<Complex> coefficients;  // p(z) = Σ c_k z^k
    double               norm  = 0.0;
    double               bound = 0.0;
  };

  struct RhoCertificate {
    RhoVerdict  verdict = RhoVerdict::consistent_at_window;
    double      rho     = 1.0;
    std::size_t window  = 0;
    // min eigenvalue of the largest window matrix, per level
    std::vector<double>              window_min_eig;
    std::optional<WindowWitness>     window_witness;
    std::optional<PolynomialWitness> polynomial_witness;
    std::size_t                      polynomials_tested = 0;
  };

  struct RhoCheckOptions {
    std::size_t   grid       = 1024;
    std::size_t   samples    = 64;
    std::uint64_t seed       = 0x5eed;
  };

  namespace detail {

    inline Matrix eval_poly(std::vector<Complex> const& c, Matrix const& t) {
      Matrix acc = Matrix::Zero(t.rows(), t.cols());
      for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * t;
        acc.diagonal().array() += *it;
      }
      return acc;
    }

    // Grid supremum of |ρ p(z) + (1-ρ) p(0)| on |z| = 1 plus Lipschitz slack
    // (max |q'| · half the grid spacing), an upper bound of the true sup.
    inline double circle_bound(std::vector<Complex> const& c,
                               double                      rho,
                               std::size_t                 grid) {
      std::vector<Complex> q(c.size());
      for (std::size_t k = 0; k < c.size(); ++k) {
        q[k] = rho * c[k];
      }
      q[0] += (1.0 - rho) * c[0];
      double sup = 0.0;
      for (std::size_t g = 0; g < grid; ++g) {
        double const  theta = 2.0 * std::numbers::pi * static_cast<double>(g)
                             / static_cast<double>(grid);
        Complex const z     = std::polar(1.0, theta);
        Complex       v     = 0.0;
        for (auto it = q.rbegin(); it != q.rend(); ++it) {
          v = v * z + *it;
        }
        sup = std::max(sup, std::abs(v));
      }
      double lip = 0.0;
      for (std::size_t k = 1; k < q.size(); ++k) {
        lip += static_cast<double>(k) * std::abs(q[k]);
      }
      return sup + lip * std::numbers::pi / static_cast<double>(grid);
    }

  }  // namespace detail

  // Two semi-decisions for "T has a unitary ρ-dilation":
  //  (a) the ρ-positivity condition restricted to windows 1..N, per level;
  //      an indefinite window certifies NO;
  //  (b) sampled polynomial inequalities ‖p(T_λ)‖ ≤ sup |ρ p + (1-ρ) p(0)|;
  //      a violation beyond the grid slack certifies NO.
  // Passing both only means "consistent at window N".
  inline RhoCertificate rho_contraction_check(LocalOperator const&    t,
                                              double                  rho,
                                              std::size_t             window,
                                              Tolerances const&       tol  = {},
                                              RhoCheckOptions const&  opts = {}) {
    if (!t.is_square()) {
      throw StructuralError("ρ-contraction check needs an operator on a single "
                            "tower");
    }
    if (!(rho > 0.0)) {
      throw PreconditionError("ρ must be positive");
    }
    if (window == 0) {
      throw PreconditionError("window must be at least 1");
    }
    RhoCertificate cert;
    cert.rho    = rho;
    cert.window = window;
    std::size_t const L = t.levels();

    // (a) increments decouple, so level λ's min eigenvalue is the min over
    // increments k ≤ λ.
    std::vector<double> inc_min(L, 0.0);
    for (std::size_t k = 0; k < L; ++k) {
      Matrix const& b = t.block(k);
      if (b.size() == 0) {
        continue;
      }
      auto indefinite = [&](linalg::HermitianEig const& eig) {
        double const lo = eig.values(eig.values.size() - 1);
        double const hi = std::max(std::abs(lo), std::abs(eig.values(0)));
        return lo < -tol.psd * hi;
      };
      auto const full = linalg::eig_descending(rho_window_matrix(b, rho, window));
      inc_min[k]      = full.values(full.values.size() - 1);
      if (!indefinite(full)) {
        continue;
      }
      // smallest failing window; earlier increments win ties
      for (std::size_t w = 1; w <= window; ++w) {
        if (cert.window_witness && cert.window_witness->window <= w) {
          break;
        }
        auto const eig = w == window
                             ? full
                             : linalg::eig_descending(rho_window_matrix(b, rho, w));
        if (!indefinite(eig)) {
          continue;
        }
        WindowWitness ww;
        ww.level       = k;
        ww.window      = w;
        ww.value       = eig.values(eig.values.size() - 1);
        Vector const v = eig.vectors.col(eig.vectors.cols() - 1);
        auto const   d   = b.rows();
        auto const   dl  = static_cast<Eigen::Index>(t.source().dim(k));
        auto const   off = static_cast<Eigen::Index>(t.source().offset(k));
        for (std::size_t s = 0; s <= w; ++s) {
          Vector h          = Vector::Zero(dl);
          h.segment(off, d) = v.segment(static_cast<Eigen::Index>(s) * d, d);
          ww.family.push_back(std::move(h));
        }
        cert.window_witness = std::move(ww);
        break;
      }
    }
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < L; ++k) {
      if (t.block(k).size() != 0) {
        running = std::min(running, inc_min[k]);
      }
      cert.window_min_eig.push_back(std::isinf(running) ? 0.0 : running);
    }

    // (b) monomials first, then seeded random polynomials of degree ≤ N
    std::vector<std::vector<Complex>> polys;
    for (std::size_t n = 1; n <= window; ++n) {
      std::vector<Complex> c(n + 1, 0.0);
      c[n] = 1.0;
      polys.push_back(std::move(c));
    }
    std::mt19937_64                       rng(opts.seed);
    std::normal_distribution<double>      nd(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> deg(1, window);
    for (std::size_t i = 0; i < opts.samples; ++i) {
      std::vector<Complex> c(deg(rng) + 1);
      for (auto& x : c) {
        double const re = nd(rng);
        double const im = nd(rng);
        x               = Complex(re, im);
      }
      polys.push_back(std::move(c));
    }
    for (auto const& c : polys) {
      double const bound = detail::circle_bound(c, rho, opts.grid);
      for (std::size_t k = 0; k < L && !cert.polynomial_witness; ++k) {
        if (t.block(k).size() == 0) {
          continue;
        }
        double const nrm = linalg::op_norm(detail::eval_poly(c, t.block(k)));
        if (nrm > bound * (1.0 + tol.psd) + tol.psd) {
          cert.polynomial_witness = PolynomialWitness{k, c, nrm, bound};
        }
      }
      ++cert.polynomials_tested;
    }

    cert.verdict = (cert.window_witness || cert.polynomial_witness)
                       ? RhoVerdict::no_with_witness
                       : RhoVerdict::consistent_at_window;
    return cert;
  }

}  // namespace locdil
