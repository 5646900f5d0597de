// locdil - dilation theory on locally Hilbert spaces
//
// Operators between locally Hilbert spaces.  A compatible level system
// {T_λ} over coordinate towers is block diagonal over the dimension
// increments, so a LocalOperator stores exactly one block per increment and
// every level matrix, seminorm and predicate is derived from those blocks.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "locdil/core.hpp"
#include "locdil/tower.hpp"

namespace locdil {

  class LocalOperator {
   public:
    LocalOperator() = default;

    // blocks[k] has shape increment_target(k) x increment_source(k).
    LocalOperator(Tower source, Tower target, std::vector<Matrix> blocks)
        : _source(std::move(source)),
          _target(std::move(target)),
          _blocks(std::move(blocks)) {
      if (_source.levels() != _target.levels()) {
        throw StructuralError(
            "source and target towers must share the index chain ("
            + std::to_string(_source.levels()) + " vs "
            + std::to_string(_target.levels()) + " levels)");
      }
      if (_blocks.size() != _source.levels()) {
        throw StructuralError("expected " + std::to_string(_source.levels())
                              + " increment blocks, got "
                              + std::to_string(_blocks.size()));
      }
      for (std::size_t k = 0; k < _blocks.size(); ++k) {
        auto const r = static_cast<Eigen::Index>(_target.increment(k));
        auto const c = static_cast<Eigen::Index>(_source.increment(k));
        if (_blocks[k].rows() != r || _blocks[k].cols() != c) {
          throw StructuralError(
              "increment block " + std::to_string(k + 1) + " has shape "
              + std::to_string(_blocks[k].rows()) + "x"
              + std::to_string(_blocks[k].cols()) + ", expected "
              + std::to_string(r) + "x" + std::to_string(c));
        }
      }
    }

    static LocalOperator identity(Tower const& tower) {
      std::vector<Matrix> b;
      for (std::size_t k = 0; k < tower.levels(); ++k) {
        auto const n = static_cast<Eigen::Index>(tower.increment(k));
        b.push_back(Matrix::Identity(n, n));
      }
      return LocalOperator(tower, tower, std::move(b));
    }

    static LocalOperator zero(Tower const& source, Tower const& target) {
      if (source.levels() != target.levels()) {
        throw StructuralError("towers must share the index chain");
      }
      std::vector<Matrix> b;
      for (std::size_t k = 0; k < source.levels(); ++k) {
        b.push_back(
            Matrix::Zero(static_cast<Eigen::Index>(target.increment(k)),
                         static_cast<Eigen::Index>(source.increment(k))));
      }
      return LocalOperator(source, target, std::move(b));
    }

    // The embedding J_λ of H_λ (as the truncated tower) into the tower.
    static LocalOperator embedding(Tower const& tower, std::size_t level) {
      Tower const         small = tower.truncated(level);
      std::vector<Matrix> b;
      for (std::size_t k = 0; k < tower.levels(); ++k) {
        auto const r = static_cast<Eigen::Index>(tower.increment(k));
        auto const c = static_cast<Eigen::Index>(small.increment(k));
        b.push_back(Matrix::Identity(r, c));
      }
      return LocalOperator(small, tower, std::move(b));
    }

    // Build from a level system T_λ (shape d²_λ x d¹_λ).  Rejects systems
    // violating T_μ J¹_λμ = J²_λμ T_λ or T_μ P¹_λμ = P²_λμ T_μ beyond
    // tol * (1 + |T|), naming the first offending pair.
    static LocalOperator from_levels(Tower const&               source,
                                     Tower const&               target,
                                     std::vector<Matrix> const& levels,
                                     double tol = default_tolerances.structural);

    Tower const& source() const noexcept {
      return _source;
    }

    Tower const& target() const noexcept {
      return _target;
    }

    std::size_t levels() const noexcept {
      return _blocks.size();
    }

    std::vector<Matrix> const& blocks() const noexcept {
      return _blocks;
    }

    Matrix const& block(std::size_t k) const {
      _source.check_level(k);
      return _blocks[k];
    }

    bool is_square() const noexcept {
      return _source == _target;
    }

    // T_λ = blockdiag(B_0, ..., B_λ)
    Matrix level(std::size_t lambda) const {
      _source.check_level(lambda);
      Matrix m = Matrix::Zero(static_cast<Eigen::Index>(_target.dim(lambda)),
                              static_cast<Eigen::Index>(_source.dim(lambda)));
      for (std::size_t k = 0; k <= lambda; ++k) {
        m.block(static_cast<Eigen::Index>(_target.offset(k)),
                static_cast<Eigen::Index>(_source.offset(k)),
                _blocks[k].rows(),
                _blocks[k].cols())
            = _blocks[k];
      }
      return m;
    }

    std::vector<Matrix> to_levels() const {
      std::vector<Matrix> out;
      for (std::size_t l = 0; l < levels(); ++l) {
        out.push_back(level(l));
      }
      return out;
    }

    // ‖T‖_λ = max_{k ≤ λ} ‖B_k‖
    double seminorm(std::size_t lambda) const {
      _source.check_level(lambda);
      double n = 0.0;
      for (std::size_t k = 0; k <= lambda; ++k) {
        n = std::max(n, linalg::op_norm(_blocks[k]));
      }
      return n;
    }

    std::vector<double> seminorms() const {
      std::vector<double> out;
      double              n = 0.0;
      for (auto const& b : _blocks) {
        n = std::max(n, linalg::op_norm(b));
        out.push_back(n);
      }
      return out;
    }

    // ‖T‖ at the top level, i.e. the largest seminorm.
    double norm() const {
      return _blocks.empty() ? 0.0 : seminorm(levels() - 1);
    }

    LocalVector apply(LocalVector const& h) const {
      validate(_source, h);
      Matrix const m = level(h.level);
      return LocalVector{h.level, m * h.coords};
    }

    LocalOperator& operator+=(LocalOperator const& that) {
      check_same_shape(that);
      for (std::size_t k = 0; k < _blocks.size(); ++k) {
        _blocks[k] += that._blocks[k];
      }
      return *this;
    }

    LocalOperator& operator-=(LocalOperator const& that) {
      check_same_shape(that);
      for (std::size_t k = 0; k < _blocks.size(); ++k) {
        _blocks[k] -= that._blocks[k];
      }
      return *this;
    }

    LocalOperator& operator*=(Complex c) {
      for (auto& b : _blocks) {
        b *= c;
      }
      return *this;
    }

    friend LocalOperator operator+(LocalOperator a, LocalOperator const& b) {
      a += b;
      return a;
    }

    friend LocalOperator operator-(LocalOperator a, LocalOperator const& b) {
      a -= b;
      return a;
    }

    friend LocalOperator operator*(Complex c, LocalOperator a) {
      a *= c;
      return a;
    }

    void check_same_shape(LocalOperator const& that) const {
      if (_source != that._source || _target != that._target) {
        throw StructuralError("local operators act between different towers");
      }
    }

   private:
    Tower               _source;
    Tower               _target;
    std::vector<Matrix> _blocks;
  };

  inline LocalOperator
  LocalOperator::from_levels(Tower const&               source,
                             Tower const&               target,
                             std::vector<Matrix> const& levels,
                             double                     tol) {
    if (source.levels() != target.levels()) {
      throw StructuralError("source and target towers must share the index "
                            "chain");
    }
    if (levels.size() != source.levels()) {
      throw StructuralError("expected " + std::to_string(source.levels())
                            + " level matrices, got "
                            + std::to_string(levels.size()));
    }
    std::size_t const L = levels.size();
    for (std::size_t l = 0; l < L; ++l) {
      if (levels[l].rows() != static_cast<Eigen::Index>(target.dim(l))
          || levels[l].cols() != static_cast<Eigen::Index>(source.dim(l))) {
        throw StructuralError("level " + std::to_string(l + 1)
                              + " matrix has shape "
                              + std::to_string(levels[l].rows()) + "x"
                              + std::to_string(levels[l].cols())
                              + ", expected " + std::to_string(target.dim(l))
                              + "x" + std::to_string(source.dim(l)));
      }
    }
    double const scale = 1.0 + linalg::op_norm(levels.back());
    for (std::size_t lam = 0; lam < L; ++lam) {
      auto const d1 = static_cast<Eigen::Index>(source.dim(lam));
      auto const d2 = static_cast<Eigen::Index>(target.dim(lam));
      for (std::size_t mu = lam + 1; mu < L; ++mu) {
        Matrix const& tm = levels[mu];
        // T_μ J¹ - J² T_λ: first d1 columns of T_μ against T_λ padded
        Matrix lhs = tm.leftCols(d1);
        lhs.topRows(d2) -= levels[lam];
        // T_μ P¹ - P² T_μ: only the off-diagonal corners survive
        double const r21 = linalg::op_norm(lhs);
        double const r22 = std::max(
            linalg::op_norm(tm.bottomLeftCorner(tm.rows() - d2, d1)),
            linalg::op_norm(tm.topRightCorner(d2, tm.cols() - d1)));
        double const off = std::max(r21, r22);
        if (off > tol * scale) {
          throw StructuralError(
              "level system is not compatible at (λ, μ) = ("
              + std::to_string(lam + 1) + ", " + std::to_string(mu + 1)
              + "): off-block norm " + std::to_string(off)
              + (r22 >= r21 ? " (T_μ P_λμ ≠ P_λμ T_μ)" : " (T_μ J_λμ ≠ J_λμ T_λ)"));
        }
      }
    }
    std::vector<Matrix> blocks;
    for (std::size_t k = 0; k < L; ++k) {
      blocks.push_back(levels[k].block(static_cast<Eigen::Index>(target.offset(k)),
                                       static_cast<Eigen::Index>(source.offset(k)),
                                       static_cast<Eigen::Index>(target.increment(k)),
                                       static_cast<Eigen::Index>(source.increment(k))));
    }
    return LocalOperator(source, target, std::move(blocks));
  }

  ////////////////////////////////////////////////////////////////////////
  // Algebra
  ////////////////////////////////////////////////////////////////////////

  inline LocalOperator adjoint(LocalOperator const& t) {
    std::vector<Matrix> b;
    for (auto const& m : t.blocks()) {
      b.push_back(m.adjoint());
    }
    return LocalOperator(t.target(), t.source(), std::move(b));
  }

  // S ∘ T
  inline LocalOperator compose(LocalOperator const& s, LocalOperator const& t) {
    if (t.target() != s.source()) {
      throw StructuralError("cannot compose: target tower of the right factor "
                            "differs from the source tower of the left factor");
    }
    std::vector<Matrix> b;
    for (std::size_t k = 0; k < t.levels(); ++k) {
      b.push_back(s.block(k) * t.block(k));
    }
    return LocalOperator(t.source(), s.target(), std::move(b));
  }

  inline LocalOperator operator*(LocalOperator const& s, LocalOperator const& t) {
    return compose(s, t);
  }

  inline LocalOperator power(LocalOperator const& t, std::size_t n) {
    if (!t.is_square()) {
      throw StructuralError("powers need an operator on a single tower");
    }
    std::vector<Matrix> b;
    for (auto const& m : t.blocks()) {
      Matrix acc = Matrix::Identity(m.rows(), m.cols());
      for (std::size_t i = 0; i < n; ++i) {
        acc = acc * m;
      }
      b.push_back(std::move(acc));
    }
    return LocalOperator(t.source(), t.target(), std::move(b));
  }

  // Blockwise inverse; throws PreconditionError on a singular block.
  inline LocalOperator inverse(LocalOperator const& t,
                               double tol = default_tolerances.flag) {
    std::vector<Matrix> b;
    for (std::size_t k = 0; k < t.levels(); ++k) {
      Matrix const& m = t.block(k);
      if (m.rows() != m.cols()) {
        throw StructuralError("increment block " + std::to_string(k + 1)
                              + " is not square");
      }
      if (m.size() != 0
          && linalg::min_singular_value(m) <= tol * (1.0 + linalg::op_norm(m))) {
        throw PreconditionError("increment block " + std::to_string(k + 1)
                                + " is singular");
      }
      b.push_back(m.size() == 0 ? m : Matrix(m.inverse()));
    }
    return LocalOperator(t.target(), t.source(), std::move(b));
  }

  // max_λ ‖A - B‖_λ
  inline double distance(LocalOperator const& a, LocalOperator const& b) {
    return (a - b).norm();
  }

  ////////////////////////////////////////////////////////////////////////
  // Classification
  ////////////////////////////////////////////////////////////////////////

  enum class Flag : std::uint8_t {
    self_adjoint,
    positive,
    projection,
    normal,
    isometry,
    coisometry,
    partial_isometry,
    unitary,
    invertible,
    contraction,
  };

  inline constexpr std::array<Flag, 10> all_flags{Flag::self_adjoint,
                                                  Flag::positive,
                                                  Flag::projection,
                                                  Flag::normal,
                                                  Flag::isometry,
                                                  Flag::coisometry,
                                                  Flag::partial_isometry,
                                                  Flag::unitary,
                                                  Flag::invertible,
                                                  Flag::contraction};

  inline constexpr std::string_view to_string(Flag f) noexcept {
    switch (f) {
      case Flag::self_adjoint:
        return "self_adjoint";
      case Flag::positive:
        return "positive";
      case Flag::projection:
        return "projection";
      case Flag::normal:
        return "normal";
      case Flag::isometry:
        return "isometry";
      case Flag::coisometry:
        return "coisometry";
      case Flag::partial_isometry:
        return "partial_isometry";
      case Flag::unitary:
        return "unitary";
      case Flag::invertible:
        return "invertible";
      case Flag::contraction:
        return "contraction";
    }
    return "?";
  }

  // Flags that only make sense for T ∈ L(ℍ).
  inline constexpr bool needs_single_tower(Flag f) noexcept {
    return f == Flag::self_adjoint || f == Flag::positive
           || f == Flag::projection || f == Flag::normal;
  }

  class Classification {
   public:
    bool has(Flag f) const noexcept {
      return (_bits >> static_cast<unsigned>(f)) & 1U;
    }

    void set(Flag f, bool v = true) noexcept {
      auto const bit = static_cast<std::uint16_t>(1U << static_cast<unsigned>(f));
      _bits          = v ? static_cast<std::uint16_t>(_bits | bit)
                         : static_cast<std::uint16_t>(_bits & ~bit);
    }

    std::vector<Flag> flags() const {
      std::vector<Flag> out;
      for (auto f : all_flags) {
        if (has(f)) {
          out.push_back(f);
        }
      }
      return out;
    }

    bool operator==(Classification const&) const = default;

   private:
    std::uint16_t _bits = 0;
  };

  namespace detail {

    // Per-matrix predicate.  Tolerance is tol * (1 + ‖B‖²) for the algebraic
    // identities and tol * (1 + ‖B‖) for the spectral ones.
    inline bool matrix_has(Matrix const& b, Flag f, double tol) {
      if (b.size() == 0) {
        return true;
      }
      double const nb  = linalg::op_norm(b);
      double const eps = tol * (1.0 + nb * nb);
      bool const   sq  = b.rows() == b.cols();
      auto id_close    = [&](Matrix const& m) {
        return linalg::op_norm(m - Matrix::Identity(m.rows(), m.cols())) <= eps;
      };
      switch (f) {
        case Flag::self_adjoint:
          return sq && linalg::op_norm(b - b.adjoint()) <= eps;
        case Flag::positive:
          return matrix_has(b, Flag::self_adjoint, tol)
                 && linalg::min_eigenvalue(b) >= -tol * (1.0 + nb);
        case Flag::projection:
          return matrix_has(b, Flag::self_adjoint, tol)
                 && linalg::op_norm(b * b - b) <= eps;
        case Flag::normal:
          return sq && linalg::op_norm(b * b.adjoint() - b.adjoint() * b) <= eps;
        case Flag::isometry:
          return id_close(b.adjoint() * b);
        case Flag::coisometry:
          return id_close(b * b.adjoint());
        case Flag::partial_isometry: {
          Matrix const p = b.adjoint() * b;
          return linalg::op_norm(p * p - p) <= eps;
        }
        case Flag::unitary:
          return sq && id_close(b.adjoint() * b) && id_close(b * b.adjoint());
        case Flag::invertible:
          return sq && linalg::min_singular_value(b) > tol * (1.0 + nb);
        case Flag::contraction:
          return nb <= 1.0 + tol;
      }
      return false;
    }

  }  // namespace detail

  // Does T have property f?  Holds iff every increment block has it, which is
  // equivalent to every level T_λ having it.  Square-only flags on an
  // operator between different towers throw StructuralError.
  inline bool has_flag(LocalOperator const& t,
                       Flag                 f,
                       double               tol = default_tolerances.flag) {
    if (needs_single_tower(f) && !t.is_square()) {
      throw StructuralError(std::string("flag '") + std::string(to_string(f))
                            + "' requires an operator on a single tower");
    }
    for (auto const& b : t.blocks()) {
      if ((f == Flag::unitary || f == Flag::invertible) && b.rows() != b.cols()) {
        return false;
      }
      if (!detail::matrix_has(b, f, tol)) {
        return false;
      }
    }
    return true;
  }

  // All applicable flags; square-only flags are left unset for operators
  // between different towers.
  inline Classification classify(LocalOperator const& t,
                                 double tol = default_tolerances.flag) {
    Classification c;
    for (auto f : all_flags) {
      if (needs_single_tower(f) && !t.is_square()) {
        continue;
      }
      c.set(f, has_flag(t, f, tol));
    }
    return c;
  }

  // ‖S N1* - N2* S‖ for normal N1, N2.  By Fuglede-Putnam this is small
  // whenever ‖S N1 - N2 S‖ is.
  inline double fuglede_putnam_residual(LocalOperator const& n1,
                                        LocalOperator const& n2,
                                        LocalOperator const& s,
                                        double tol = default_tolerances.flag) {
    if (!n1.is_square() || !n2.is_square()) {
      throw StructuralError("normal operators must act on a single tower");
    }
    if (s.source() != n1.source() || s.target() != n2.source()) {
      throw StructuralError("intertwiner must map the first tower to the "
                            "second");
    }
    if (!has_flag(n1, Flag::normal, tol)) {
      throw PreconditionError("first operator is not locally normal");
    }
    if (!has_flag(n2, Flag::normal, tol)) {
      throw PreconditionError("second operator is not locally normal");
    }
    return (s * adjoint(n1) - adjoint(n2) * s).norm();
  }

}  // namespace locdil
