// Random instance generators shared by the unit and acceptance suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "locdil/locdil.hpp"

namespace gen {

  using locdil::Complex;
  using locdil::Flag;
  using locdil::LocalOperator;
  using locdil::Matrix;
  using locdil::OperatorFunction;
  using locdil::StarSemigroup;
  using locdil::Tower;
  using Rng = std::mt19937_64;

  inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }

  inline double real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }

  inline bool coin(Rng& rng) {
    return uniform(rng, 0, 1) == 1;
  }

  inline Matrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    return locdil::linalg::random_gaussian(rows, cols, rng);
  }

  inline Matrix unitary(Rng& rng, Eigen::Index n) {
    return locdil::linalg::random_unitary(n, rng);
  }

  // Non-decreasing dims with 1 ≤ d_1, d_L ≤ max_dim, L ≤ max_levels.
  inline Tower tower(Rng& rng, std::size_t max_levels, std::size_t max_dim) {
    std::size_t const        L = uniform(rng, 1, max_levels);
    std::vector<std::size_t> dims;
    std::size_t              d = 0;
    for (std::size_t k = 0; k < L; ++k) {
      d = uniform(rng, std::max<std::size_t>(d, 1), std::max<std::size_t>(d, max_dim * (k + 1) / L));
      dims.push_back(d);
    }
    return Tower(dims);
  }

  // dims bounded componentwise by `caps`, non-decreasing, d_1 ≥ 1.
  inline Tower tower_within(Rng& rng, std::vector<std::size_t> const& caps) {
    std::vector<std::size_t> dims;
    std::size_t              d = 1;
    for (auto c : caps) {
      d = uniform(rng, d, std::max(d, c));
      dims.push_back(d);
    }
    return Tower(dims);
  }

  // Gaussian blocks scaled to O(1) norm.
  inline LocalOperator op(Rng& rng, Tower const& source, Tower const& target) {
    std::vector<Matrix> b;
    for (std::size_t k = 0; k < source.levels(); ++k) {
      auto const r = static_cast<Eigen::Index>(target.increment(k));
      auto const c = static_cast<Eigen::Index>(source.increment(k));
      double const s = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, r + c)));
      b.push_back(s * gaussian(rng, r, c));
    }
    return LocalOperator(source, target, std::move(b));
  }

  inline LocalOperator op(Rng& rng, Tower const& t) {
    return op(rng, t, t);
  }

  inline Matrix diagonal(std::vector<Complex> const& d) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
    }
    return m;
  }

  // An n×n matrix with property f, built from unitaries and spectra.
  inline Matrix block_with(Rng& rng, Flag f, Eigen::Index n) {
    if (n == 0) {
      return Matrix(0, 0);
    }
    Matrix const        u = unitary(rng, n);
    Matrix const        w = unitary(rng, n);
    std::vector<Complex> d(static_cast<std::size_t>(n));
    switch (f) {
      case Flag::self_adjoint:
        for (auto& x : d) x = real(rng, -2, 2);
        return u * diagonal(d) * u.adjoint();
      case Flag::positive:
        for (auto& x : d) x = coin(rng) ? real(rng, 0, 2) : 0.0;
        return u * diagonal(d) * u.adjoint();
      case Flag::projection:
        for (auto& x : d) x = coin(rng) ? 1.0 : 0.0;
        return u * diagonal(d) * u.adjoint();
      case Flag::normal:
        for (auto& x : d) x = Complex(real(rng, -2, 2), real(rng, -2, 2));
        return u * diagonal(d) * u.adjoint();
      case Flag::isometry:
      case Flag::coisometry:
      case Flag::unitary:
        return u;
      case Flag::partial_isometry:
        for (auto& x : d) x = coin(rng) ? 1.0 : 0.0;
        return u * diagonal(d) * w;
      case Flag::invertible:
        for (auto& x : d) x = real(rng, 0.2, 3.0);
        return u * diagonal(d) * w;
      case Flag::contraction:
        for (auto& x : d) x = real(rng, 0.0, 1.0);
        return u * diagonal(d) * w;
    }
    return u;
  }

  // An n×n matrix lacking f by an O(1) margin.  Returns false when no such
  // matrix exists at this size (1×1 matrices are always normal).
  inline bool block_without(Rng& rng, Flag f, Eigen::Index n, Matrix& out) {
    if (n == 0 || (f == Flag::normal && n < 2)) {
      return false;
    }
    Matrix const u = unitary(rng, n);
    Matrix const w = unitary(rng, n);
    std::vector<Complex> d(static_cast<std::size_t>(n));
    switch (f) {
      case Flag::invertible:
        for (auto& x : d) x = real(rng, 0.5, 2.0);
        d[uniform(rng, 0, d.size() - 1)] = 0.0;
        out = u * diagonal(d) * w;
        return true;
      case Flag::contraction:
      case Flag::isometry:
      case Flag::coisometry:
      case Flag::unitary:
      case Flag::partial_isometry:
      case Flag::projection:
        // a singular value of 2
        for (auto& x : d) x = real(rng, 0.0, 1.0);
        d[uniform(rng, 0, d.size() - 1)] = 2.0;
        out = u * diagonal(d) * (f == Flag::projection ? u.adjoint() : w);
        return true;
      case Flag::positive:
        for (auto& x : d) x = real(rng, 0.0, 1.0);
        d[uniform(rng, 0, d.size() - 1)] = -1.0;
        out = u * diagonal(d) * u.adjoint();
        return true;
      case Flag::self_adjoint:
        for (auto& x : d) x = real(rng, -1.0, 1.0);
        d[uniform(rng, 0, d.size() - 1)] = Complex(0.0, 1.0);
        out = u * diagonal(d) * u.adjoint();
        return true;
      case Flag::normal: {
        // upper triangular with a unit super-diagonal entry
        Matrix t = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          t(i, i) = Complex(real(rng, -1, 1), real(rng, -1, 1));
        }
        t(0, 1) = 1.0;
        out     = u * t * u.adjoint();
        return true;
      }
    }
    return false;
  }

  inline Matrix psd(Rng& rng, Eigen::Index n, Eigen::Index rank) {
    Matrix const g = gaussian(rng, rank, n);
    return g.adjoint() * g;
  }

  // *-characters of the built-in semigroups, as functions element → ℂ.
  inline std::vector<std::vector<Complex>> characters(StarSemigroup const& sg,
                                                      std::string const&   kind) {
    std::size_t const                 n = sg.size();
    std::vector<std::vector<Complex>> out;
    if (kind == "cyclic_group") {
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<Complex> chi(n);
        for (std::size_t k = 0; k < n; ++k) {
          chi[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j * k)
                                       / static_cast<double>(n));
        }
        out.push_back(chi);
      }
    } else if (kind == "powerset_intersection") {
      for (std::size_t a = 0; a < n; ++a) {
        std::vector<Complex> chi(n);
        for (std::size_t w = 0; w < n; ++w) {
          chi[w] = (a & w) == a ? 1.0 : 0.0;
        }
        out.push_back(chi);
      }
    } else {  // truncated naturals: x^k with x ∈ {0, 1}
      for (int x = 0; x < 2; ++x) {
        std::vector<Complex> chi(n);
        for (std::size_t k = 0; k < n; ++k) {
          chi[k] = (k == 0 || x == 1) ? 1.0 : 0.0;
        }
        out.push_back(chi);
      }
    }
    return out;
  }

  // φ(s) = Σ_χ χ(s) E_χ with positive E_χ summing to I per increment: an
  // LPDF with φ(e) = I.
  inline OperatorFunction lpdf(Rng& rng, StarSemigroup const& sg, std::string const& kind,
                               Tower const& tower) {
    auto const                       chars = characters(sg, kind);
    std::size_t const                m     = chars.size();
    std::vector<std::vector<Matrix>> e(m);  // e[χ][k]
    for (std::size_t k = 0; k < tower.levels(); ++k) {
      auto const d = static_cast<Eigen::Index>(tower.increment(k));
      std::vector<Matrix> raw;
      Matrix              sum = Matrix::Zero(d, d);
      for (std::size_t c = 0; c < m; ++c) {
        raw.push_back(d == 0 ? Matrix(0, 0)
                             : psd(rng, d, static_cast<Eigen::Index>(uniform(rng, 0, d))));
        sum += raw.back();
      }
      sum += 1e-3 * Matrix::Identity(d, d);
      raw.back() += 1e-3 * Matrix::Identity(d, d);
      Matrix const isq = d == 0 ? Matrix(0, 0) : Matrix(locdil::linalg::psd_sqrt(sum, 0.0).inverse());
      for (std::size_t c = 0; c < m; ++c) {
        Matrix x = isq * raw[c] * isq;
        e[c].push_back(locdil::linalg::hermitian_part(x));
      }
    }
    std::vector<LocalOperator> values;
    for (std::size_t s = 0; s < sg.size(); ++s) {
      std::vector<Matrix> b;
      for (std::size_t k = 0; k < tower.levels(); ++k) {
        auto const d   = static_cast<Eigen::Index>(tower.increment(k));
        Matrix     acc = Matrix::Zero(d, d);
        for (std::size_t c = 0; c < m; ++c) {
          acc += chars[c][s] * e[c][k];
        }
        b.push_back(acc);
      }
      values.emplace_back(tower, tower, std::move(b));
    }
    return OperatorFunction(sg, tower, std::move(values));
  }

  // A positive operator-valued measure with m atoms summing to I.
  inline locdil::LocalPovm povm(Rng& rng, std::size_t m, Tower const& tower) {
    std::vector<std::vector<Matrix>> e(m);
    for (std::size_t k = 0; k < tower.levels(); ++k) {
      auto const          d = static_cast<Eigen::Index>(tower.increment(k));
      std::vector<Matrix> raw;
      Matrix              sum = Matrix::Identity(d, d) * 1e-3;
      for (std::size_t i = 0; i < m; ++i) {
        raw.push_back(d == 0 ? Matrix(0, 0)
                             : psd(rng, d, static_cast<Eigen::Index>(uniform(rng, 0, d))));
        sum += raw.back();
      }
      raw.front() += Matrix::Identity(d, d) * 1e-3;
      Matrix const isq = d == 0 ? Matrix(0, 0) : Matrix(locdil::linalg::psd_sqrt(sum, 0.0).inverse());
      for (std::size_t i = 0; i < m; ++i) {
        Matrix x = isq * raw[i] * isq;
        e[i].push_back(locdil::linalg::hermitian_part(x));
      }
    }
    locdil::LocalPovm p;
    p.tower = tower;
    for (std::size_t i = 0; i < m; ++i) {
      p.atoms.emplace_back(tower, tower, e[i]);
    }
    return p;
  }

  // Locally contraction with every block norm in [0, 1).
  inline LocalOperator contraction(Rng& rng, Tower const& tower) {
    std::vector<Matrix> b;
    for (std::size_t k = 0; k < tower.levels(); ++k) {
      auto const d = static_cast<Eigen::Index>(tower.increment(k));
      b.push_back(block_with(rng, Flag::contraction, d));
    }
    return LocalOperator(tower, tower, std::move(b));
  }

}  // namespace gen
