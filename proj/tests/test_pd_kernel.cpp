#include "catch_amalgamated.hpp"

#include "locdil/pd_kernel.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace locdil;
using Catch::Matchers::WithinAbs;

namespace {

  LocalOperator scalar_op(Tower const& t, Complex c) {
    auto op = LocalOperator::identity(t);
    op *= c;
    return op;
  }

  OperatorFunction constant_identity(StarSemigroup const& sg, Tower const& t) {
    return OperatorFunction(sg, t, std::vector<LocalOperator>(sg.size(), LocalOperator::identity(t)));
  }

  // Γ(s, t) = c_{st} I from a scalar matrix c.
  OperatorKernel scalar_kernel(Tower const& t, Matrix const& c) {
    std::vector<LocalOperator> v;
    for (Eigen::Index s = 0; s < c.rows(); ++s) {
      for (Eigen::Index u = 0; u < c.cols(); ++u) {
        v.push_back(scalar_op(t, c(s, u)));
      }
    }
    return OperatorKernel(t, static_cast<std::size_t>(c.rows()), v);
  }

  // Kernel given by one Hermitian matrix per increment, read in the
  // assembled layout: block row t, block column s holds Γ(s, t).
  OperatorKernel kernel_from_increments(Tower const& tower, std::size_t n,
                                        std::vector<Matrix> const& g) {
    std::vector<LocalOperator> v;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < n; ++t) {
        std::vector<Matrix> b;
        for (std::size_t k = 0; k < tower.levels(); ++k) {
          auto const d = static_cast<Eigen::Index>(tower.increment(k));
          b.push_back(g[k].block(static_cast<Eigen::Index>(t) * d, static_cast<Eigen::Index>(s) * d, d, d));
        }
        v.emplace_back(tower, tower, b);
      }
    }
    return OperatorKernel(tower, n, v);
  }

}  // namespace

TEST_CASE("kernel of a function", "[kernel]") {
  Tower const t({1, 2});
  auto const  z2  = semigroups::cyclic_group(2);
  auto const  one = kernel_of_function(constant_identity(z2, t));
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t u = 0; u < 2; ++u) {
      CHECK(distance(one(s, u), LocalOperator::identity(t)) == 0.0);
    }
  }

  OperatorFunction phi(z2, t, {LocalOperator::identity(t), LocalOperator::zero(t, t)});
  auto const       g = kernel_of_function(phi);
  CHECK(distance(g(1, 1), LocalOperator::identity(t)) == 0.0);
  CHECK(distance(g(0, 1), LocalOperator::zero(t, t)) == 0.0);

  gen::Rng   rng(3);
  auto const sg  = semigroups::truncated_naturals(3);
  auto const psi = gen::lpdf(rng, sg, "truncated_naturals", t);
  auto const k   = kernel_of_function(psi);
  for (std::size_t s = 0; s < sg.size(); ++s) {
    CHECK(distance(k(s, s), psi(sg.mul(sg.star(s), s))) == 0.0);
  }
}

TEST_CASE("positive definiteness of explicit kernels", "[kernel]") {
  Tower const t({1, 3});
  CHECK(is_lpdk(scalar_kernel(t, Matrix::Ones(3, 3))).ok());

  gen::Rng     rng(17);
  Matrix const x = gen::gaussian(rng, 4, 5);
  Matrix const gram = x.adjoint() * x;  // gram(t, s) = <x_s, x_t>
  CHECK(is_lpdk(scalar_kernel(t, gram.transpose())).ok());

  Matrix c(2, 2);
  c << 1.0, 2.0, 2.0, 1.0;
  auto const g    = scalar_kernel(Tower({1}), c);
  auto const cert = is_lpdk(g);
  CHECK(cert.status == KernelStatus::indefinite);
  REQUIRE(cert.witness);
  CHECK_THAT(cert.witness->value, WithinAbs(-1.0, 1e-12));
  CHECK_THAT(cert.reports[0].min_eig, WithinAbs(-1.0, 1e-12));

  // Σ <Γ(s,t) h_s, h_t> reproduces the witness value
  Complex q = 0.0;
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t u = 0; u < 2; ++u) {
      Vector const gh = oracle::level_matrix(g(s, u), 0) * cert.witness->family[s];
      q += cert.witness->family[u].dot(gh);
    }
  }
  CHECK_THAT(q.real(), WithinAbs(-1.0, 1e-12));

  Matrix h(2, 2);
  h << 1.0, 2.0, 0.0, 1.0;
  CHECK(is_lpdk(scalar_kernel(Tower({1}), h)).status == KernelStatus::not_hermitian);
}

TEST_CASE("positive definiteness of functions", "[kernel]") {
  Tower const t({1, 2});
  for (auto const& sg : {semigroups::cyclic_group(3), semigroups::powerset_intersection(2),
                         semigroups::truncated_naturals(2)}) {
    CHECK(is_lpdf(constant_identity(sg, t)).ok());
  }

  // φ(ω) = Σ_{i ∈ ω} E_i for a two-atom POVM
  auto const p2 = semigroups::powerset_intersection(2);
  std::vector<LocalOperator> vals;
  for (std::size_t w = 0; w < 4; ++w) {
    double const x = ((w & 1U) ? 0.3 : 0.0) + ((w & 2U) ? 0.7 : 0.0);
    vals.push_back(scalar_op(Tower({1}), x));
  }
  OperatorFunction phi(p2, Tower({1}), vals);
  CHECK(is_lpdf(phi).ok());
  CHECK(oracle::min_eig(oracle::gram(phi, 0)) >= -1e-12);

  auto const       z2 = semigroups::cyclic_group(2);
  OperatorFunction bad(z2, Tower({1}), {scalar_op(Tower({1}), 1.0), scalar_op(Tower({1}), 2.0)});
  auto const       cert = is_lpdf(bad);
  CHECK_FALSE(cert.ok());
  CHECK_THAT(cert.reports[0].min_eig, WithinAbs(-1.0, 1e-12));
}

TEST_CASE("whole, per-level and per-increment checks agree", "[kernel][property]") {
  gen::Rng rng(23);
  int      definite = 0;
  for (int it = 0; it < 120; ++it) {
    Tower const         tower = gen::tower(rng, 4, 6);
    std::size_t const   n     = gen::uniform(rng, 1, 4);
    bool const          make_bad = gen::coin(rng);
    std::size_t const   bad_k    = gen::uniform(rng, 0, tower.levels() - 1);
    std::vector<Matrix> g;
    bool                expect = true;
    for (std::size_t k = 0; k < tower.levels(); ++k) {
      auto const d = static_cast<Eigen::Index>(n * tower.increment(k));
      Matrix     m = gen::psd(rng, d, static_cast<Eigen::Index>(gen::uniform(rng, 0, d)));
      if (make_bad && k == bad_k && d > 0) {
        Vector const v = gen::gaussian(rng, d, 1).col(0).normalized();
        m -= (0.5 + m.norm()) * v * v.adjoint();
      }
      if (oracle::min_eig(m) < -1e-8 * (1.0 + oracle::norm(m))) {
        expect = false;
      }
      g.push_back(locdil::linalg::hermitian_part(m));
    }
    auto const gamma = kernel_from_increments(tower, n, g);
    auto const top   = is_lpdk_top_level(gamma);
    bool const whole = top.ok();
    if (top.witness) {
      CHECK(top.witness->level == tower.levels() - 1);
      for (auto const& h : top.witness->family) {
        CHECK(static_cast<std::size_t>(h.size()) == tower.top_dim());
      }
    }
    bool const level = is_lpdk(gamma).ok();
    bool const inc   = is_lpdk_by_increment(gamma).ok();
    CHECK(whole == expect);
    CHECK(level == expect);
    CHECK(inc == expect);
    definite += expect ? 1 : 0;
  }
  CHECK(definite > 20);
  CHECK(definite < 100);
}

TEST_CASE("boundedness constants", "[kernel][lbc]") {
  Tower const t({1, 2});
  auto const  z3  = semigroups::cyclic_group(3);
  auto const  one = lbc_constants(constant_identity(z3, t));
  for (std::size_t u = 0; u < 3; ++u) {
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK_THAT(one(u, l), WithinAbs(1.0, 1e-9));
    }
  }

  gen::Rng rng(29);
  for (int it = 0; it < 20; ++it) {
    Tower const tower = gen::tower_within(rng, {2, 4});
    auto const  sg    = semigroups::powerset_intersection(gen::uniform(rng, 1, 3));
    auto const  phi   = gen::lpdf(rng, sg, "powerset_intersection", tower);
    auto const  c     = lbc_constants(phi);
    for (std::size_t l = 0; l < tower.levels(); ++l) {
      CHECK_THAT(c(sg.neutral(), l), WithinAbs(1.0, 1e-9));
      Matrix const m = oracle::gram(phi, l);
      for (std::size_t u = 0; u < sg.size(); ++u) {
        double const ref = oracle::lbc_constant(m, oracle::gram(phi, l, u));
        INFO("u = " << u << ", level = " << l);
        CHECK_THAT(c(u, l), WithinAbs(ref, 1e-6 * (1.0 + ref)));
      }
    }
  }

  auto const       z2 = semigroups::cyclic_group(2);
  OperatorFunction bad(z2, Tower({1}), {scalar_op(Tower({1}), 1.0), scalar_op(Tower({1}), 2.0)});
  CHECK_THROWS_AS(lbc_constants(bad), IndefiniteKernel);
}

TEST_CASE("kernel shape errors", "[kernel]") {
  Tower const t({1});
  CHECK_THROWS_AS(OperatorKernel(t, 2, {LocalOperator::identity(t)}), StructuralError);
  CHECK_THROWS_AS(OperatorKernel(t, 1, {LocalOperator::identity(Tower({2}))}), StructuralError);
  CHECK_THROWS_AS(OperatorFunction(semigroups::cyclic_group(2), t, {LocalOperator::identity(t)}),
                  StructuralError);
}

TEST_CASE("positive kernels are positive against operator families", "[kernel][property]") {
  gen::Rng rng(31);
  for (int it = 0; it < 40; ++it) {
    Tower const tower = gen::tower(rng, 3, 5);
    auto const  sg    = semigroups::cyclic_group(gen::uniform(rng, 1, 4));
    auto const  g     = kernel_of_function(gen::lpdf(rng, sg, "cyclic_group", tower));
    std::vector<LocalOperator> t;
    for (std::size_t s = 0; s < g.size(); ++s) {
      t.push_back(gen::op(rng, tower));
    }
    // Σ_{s,t} T_t* Γ(s,t) T_s
    auto acc = LocalOperator::zero(tower, tower);
    for (std::size_t s = 0; s < g.size(); ++s) {
      for (std::size_t u = 0; u < g.size(); ++u) {
        acc += adjoint(t[u]) * g(s, u) * t[s];
      }
    }
    for (std::size_t l = 0; l < tower.levels(); ++l) {
      CHECK(oracle::min_eig(oracle::level_matrix(acc, l)) >= -1e-10 * (1.0 + acc.norm()));
    }
    CHECK(has_flag(acc, Flag::positive));
  }
}
