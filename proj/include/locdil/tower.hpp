// locdil - dilation theory on locally Hilbert spaces
//
// A locally Hilbert space realized as a finite chain H_0 ⊂ H_1 ⊂ ... of
// coordinate subspaces of C^{d_top}.  Levels are 0-based in the C++ API;
// the JSON layer (io.hpp) uses 1-based levels.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "locdil/core.hpp"

namespace locdil {

  class Tower {
   public:
    Tower() = default;

    // dims must be non-empty, non-decreasing and start with a positive
    // dimension.
    explicit Tower(std::vector<std::size_t> dims) : _dims(std::move(dims)) {
      if (_dims.empty()) {
        throw StructuralError("tower must have at least one level");
      }
      if (_dims.front() == 0) {
        throw StructuralError("tower level 1 must have positive dimension");
      }
      for (std::size_t i = 1; i < _dims.size(); ++i) {
        if (_dims[i] < _dims[i - 1]) {
          throw StructuralError("tower dimensions must be non-decreasing, got "
                                + std::to_string(_dims[i - 1]) + " then "
                                + std::to_string(_dims[i]) + " at level "
                                + std::to_string(i + 1));
        }
      }
    }

    std::size_t levels() const noexcept {
      return _dims.size();
    }

    std::size_t dim(std::size_t level) const {
      check_level(level);
      return _dims[level];
    }

    std::size_t top_dim() const noexcept {
      return _dims.empty() ? 0 : _dims.back();
    }

    // d_{k} - d_{k-1} with d_{-1} = 0
    std::size_t increment(std::size_t k) const {
      check_level(k);
      return k == 0 ? _dims[0] : _dims[k] - _dims[k - 1];
    }

    // first coordinate of the k-th increment
    std::size_t offset(std::size_t k) const {
      check_level(k);
      return k == 0 ? 0 : _dims[k - 1];
    }

    std::vector<std::size_t> const& dims() const noexcept {
      return _dims;
    }

    // The tower of H_level seen as a locally Hilbert space over the same
    // chain: dimensions are capped at d_level.
    Tower truncated(std::size_t level) const {
      check_level(level);
      std::vector<std::size_t> d(_dims);
      for (std::size_t k = level + 1; k < d.size(); ++k) {
        d[k] = _dims[level];
      }
      return Tower(std::move(d));
    }

    void check_level(std::size_t level) const {
      if (level >= _dims.size()) {
        throw InvalidLevel("level " + std::to_string(level + 1)
                           + " out of range for a tower with "
                           + std::to_string(_dims.size()) + " levels");
      }
    }

    bool operator==(Tower const&) const = default;

   private:
    std::vector<std::size_t> _dims;
  };

  // An element h of H_level.
  struct LocalVector {
    std::size_t level = 0;
    Vector      coords;
  };

  inline void validate(Tower const& tower, LocalVector const& h) {
    tower.check_level(h.level);
    if (static_cast<std::size_t>(h.coords.size()) != tower.dim(h.level)) {
      throw StructuralError("vector at level " + std::to_string(h.level + 1)
                            + " has " + std::to_string(h.coords.size())
                            + " coordinates, expected "
                            + std::to_string(tower.dim(h.level)));
    }
  }

  // The isometric inclusion H_level(h) -> H_mu (zero padding).
  inline LocalVector promote(Tower const&       tower,
                             LocalVector const& h,
                             std::size_t        mu) {
    validate(tower, h);
    tower.check_level(mu);
    if (mu < h.level) {
      throw InvalidLevel("cannot promote a level " + std::to_string(h.level + 1)
                         + " vector to lower level " + std::to_string(mu + 1));
    }
    LocalVector out{mu, Vector::Zero(static_cast<Eigen::Index>(tower.dim(mu)))};
    out.coords.head(h.coords.size()) = h.coords;
    return out;
  }

  // Orthogonal projection onto H_lambda (truncation).
  inline LocalVector project(Tower const&       tower,
                             LocalVector const& h,
                             std::size_t        lambda) {
    validate(tower, h);
    tower.check_level(lambda);
    if (lambda > h.level) {
      throw InvalidLevel("cannot project a level " + std::to_string(h.level + 1)
                         + " vector onto higher level "
                         + std::to_string(lambda + 1));
    }
    return LocalVector{
        lambda, h.coords.head(static_cast<Eigen::Index>(tower.dim(lambda)))};
  }

  // <h, k>, linear in h and conjugate-linear in k, evaluated at the larger of
  // the two levels.  Independent of the level used since promotion is an
  // isometry.
  inline Complex inner_product(Tower const&       tower,
                               LocalVector const& h,
                               LocalVector const& k) {
    validate(tower, h);
    validate(tower, k);
    std::size_t const n = std::min(h.coords.size(), k.coords.size());
    // padding contributes zeros, so the common prefix suffices
    return k.coords.head(n).dot(h.coords.head(n));
  }

  inline double norm(Tower const& tower, LocalVector const& h) {
    validate(tower, h);
    return h.coords.norm();
  }

}  // namespace locdil
