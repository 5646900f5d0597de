// locdil - dilation theory on locally Hilbert spaces
//
// Finite abelian *-semigroups with neutral element, given by a
// multiplication table over the element indices 0..n-1.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "locdil/core.hpp"

namespace locdil {

  class StarSemigroup {
   public:
    using element = std::size_t;

    StarSemigroup() = default;

    // Only checks that the table sizes and entries are in range; the
    // algebraic laws are checked by validate().
    StarSemigroup(std::vector<std::vector<element>> mul,
                  std::vector<element>              star,
                  element                           e)
        : _mul(std::move(mul)), _star(std::move(star)), _e(e) {
      std::size_t const n = _mul.size();
      if (n == 0) {
        throw StructuralError("semigroup must have at least one element");
      }
      for (std::size_t a = 0; a < n; ++a) {
        if (_mul[a].size() != n) {
          throw StructuralError("multiplication table row "
                                + std::to_string(a) + " has "
                                + std::to_string(_mul[a].size())
                                + " entries, expected " + std::to_string(n));
        }
        for (auto x : _mul[a]) {
          if (x >= n) {
            throw StructuralError("multiplication table entry "
                                  + std::to_string(x) + " out of range");
          }
        }
      }
      if (_star.size() != n) {
        throw StructuralError("involution has " + std::to_string(_star.size())
                              + " entries, expected " + std::to_string(n));
      }
      for (auto x : _star) {
        if (x >= n) {
          throw StructuralError("involution entry " + std::to_string(x)
                                + " out of range");
        }
      }
      if (_e >= n) {
        throw StructuralError("neutral element index out of range");
      }
    }

    std::size_t size() const noexcept {
      return _mul.size();
    }

    element mul(element a, element b) const {
      return _mul.at(a).at(b);
    }

    element star(element a) const {
      return _star.at(a);
    }

    element neutral() const noexcept {
      return _e;
    }

    std::vector<std::vector<element>> const& table() const noexcept {
      return _mul;
    }

    std::vector<element> const& involution() const noexcept {
      return _star;
    }

    // s* s = e for every s, i.e. S is a group with s* = s^{-1}.
    bool is_group_with_inverse_star() const {
      for (element s = 0; s < size(); ++s) {
        if (mul(star(s), s) != _e) {
          return false;
        }
      }
      return true;
    }

    bool operator==(StarSemigroup const&) const = default;

   private:
    std::vector<std::vector<element>> _mul;
    std::vector<element>              _star;
    element                           _e = 0;
  };

  // First law found broken by an exhaustive check; elements refers to the
  // counterexample (one, two or three indices).
  struct SemigroupViolation {
    std::string          law;
    std::vector<std::size_t> elements;

    std::string describe() const {
      std::string s = law + " fails at (";
      for (std::size_t i = 0; i < elements.size(); ++i) {
        s += (i ? ", " : "") + std::to_string(elements[i]);
      }
      return s + ")";
    }
  };

  // Exhaustive check of associativity, commutativity, neutrality, the
  // involution law s** = s and (st)* = s*t*.  Returns the first violation.
  inline std::optional<SemigroupViolation> validate(StarSemigroup const& sg) {
    std::size_t const n = sg.size();
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (sg.mul(a, b) != sg.mul(b, a)) {
          return SemigroupViolation{"commutativity", {a, b}};
        }
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t c = 0; c < n; ++c) {
          if (sg.mul(sg.mul(a, b), c) != sg.mul(a, sg.mul(b, c))) {
            return SemigroupViolation{"associativity", {a, b, c}};
          }
        }
      }
    }
    auto const e = sg.neutral();
    for (std::size_t a = 0; a < n; ++a) {
      if (sg.mul(e, a) != a || sg.mul(a, e) != a) {
        return SemigroupViolation{"neutral element", {a}};
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      if (sg.star(sg.star(a)) != a) {
        return SemigroupViolation{"involution", {a}};
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (sg.star(sg.mul(a, b)) != sg.mul(sg.star(a), sg.star(b))) {
          return SemigroupViolation{"star anti-homomorphism", {a, b}};
        }
      }
    }
    return std::nullopt;
  }

  inline void require_valid(StarSemigroup const& sg) {
    if (auto v = validate(sg)) {
      throw StructuralError("not an abelian *-semigroup with neutral "
                            "element: "
                            + v->describe());
    }
  }

  namespace semigroups {

    // Subsets of {0..m-1} as bitmasks under intersection, star = identity,
    // neutral element the full set.  Element index = bitmask.
    inline StarSemigroup powerset_intersection(std::size_t m) {
      if (m > 12) {
        throw StructuralError("powerset_intersection: at most 12 atoms");
      }
      std::size_t const                 n = std::size_t{1} << m;
      std::vector<std::vector<std::size_t>> mul(n, std::vector<std::size_t>(n));
      std::vector<std::size_t>          star(n);
      for (std::size_t a = 0; a < n; ++a) {
        star[a] = a;
        for (std::size_t b = 0; b < n; ++b) {
          mul[a][b] = a & b;
        }
      }
      StarSemigroup sg(std::move(mul), std::move(star), n - 1);
      require_valid(sg);
      return sg;
    }

    // Z_n with star(k) = -k.
    inline StarSemigroup cyclic_group(std::size_t n) {
      if (n == 0) {
        throw StructuralError("cyclic_group: order must be positive");
      }
      std::vector<std::vector<std::size_t>> mul(n, std::vector<std::size_t>(n));
      std::vector<std::size_t>          star(n);
      for (std::size_t a = 0; a < n; ++a) {
        star[a] = (n - a) % n;
        for (std::size_t b = 0; b < n; ++b) {
          mul[a][b] = (a + b) % n;
        }
      }
      StarSemigroup sg(std::move(mul), std::move(star), 0);
      require_valid(sg);
      return sg;
    }

    // {0..N} with saturating addition min(a + b, N), star = identity.
    inline StarSemigroup truncated_naturals(std::size_t cap) {
      std::size_t const                 n = cap + 1;
      std::vector<std::vector<std::size_t>> mul(n, std::vector<std::size_t>(n));
      std::vector<std::size_t>          star(n);
      for (std::size_t a = 0; a < n; ++a) {
        star[a] = a;
        for (std::size_t b = 0; b < n; ++b) {
          mul[a][b] = std::min(a + b, cap);
        }
      }
      StarSemigroup sg(std::move(mul), std::move(star), 0);
      require_valid(sg);
      return sg;
    }

    // Dispatch by name, as used by the JSON "builtin" form.
    inline StarSemigroup builtin(std::string const& kind, std::size_t param) {
      if (kind == "powerset_intersection") {
        return powerset_intersection(param);
      }
      if (kind == "cyclic_group") {
        return cyclic_group(param);
      }
      if (kind == "truncated_naturals") {
        return truncated_naturals(param);
      }
      throw StructuralError("unsupported builtin semigroup kind '" + kind + "'");
    }

  }  // namespace semigroups

}  // namespace locdil
