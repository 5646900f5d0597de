#include "catch_amalgamated.hpp"

#include "locdil/applications.hpp"
#include "locdil/dilation.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace locdil;
using Catch::Matchers::WithinAbs;

namespace {

  LocalOperator diag_op(std::vector<Complex> const& xs) {
    Tower       t({xs.size()});
    Matrix      m = gen::diagonal(xs);
    return LocalOperator(t, t, {m});
  }

  LocalOperator scalar_op(Tower const& t, Complex c) {
    auto op = LocalOperator::identity(t);
    op *= c;
    return op;
  }

  OperatorFunction povm_function(LocalPovm const& p) {
    auto const                 sg = semigroups::powerset_intersection(p.atoms.size());
    std::vector<LocalOperator> vals;
    for (std::size_t w = 0; w < sg.size(); ++w) {
      auto acc = LocalOperator::zero(p.tower, p.tower);
      for (std::size_t i = 0; i < p.atoms.size(); ++i) {
        if ((w >> i) & 1U) {
          acc += p.atoms[i];
        }
      }
      vals.push_back(acc);
    }
    return OperatorFunction(sg, p.tower, vals);
  }

}  // namespace

TEST_CASE("square roots", "[sqrt]") {
  auto const id = LocalOperator::identity(Tower({1, 3}));
  CHECK(distance(square_root(id), id) <= 1e-14);
  CHECK(distance(square_root(diag_op({4.0, 9.0})), diag_op({2.0, 3.0})) <= 1e-14);

  gen::Rng rng(61);
  for (int it = 0; it < 30; ++it) {
    Tower const tower = gen::tower(rng, 3, 8);
    auto const  b     = gen::op(rng, tower);
    auto const  a     = adjoint(b) * b;
    auto const  r     = square_root(a);
    CHECK(distance(r * r, a) <= 1e-9 * (1.0 + a.norm()));
    CHECK(has_flag(r, Flag::positive));
  }
  CHECK_THROWS_AS(square_root(diag_op({1.0, -1.0})), PreconditionError);
}

TEST_CASE("Naimark dilation of explicit measures", "[naimark]") {
  Tower const t({1});
  LocalPovm   half{t, {scalar_op(t, 0.5), scalar_op(t, 0.5)}};
  auto const  s = naimark(half);
  CHECK(s.dilation_tower.dims() == std::vector<std::size_t>{2});
  Matrix const j = s.embedding.block(0);
  CHECK_THAT(std::abs(j(0, 0)), WithinAbs(1.0 / std::sqrt(2.0), 1e-14));
  CHECK_THAT(std::abs(j(1, 0)), WithinAbs(1.0 / std::sqrt(2.0), 1e-14));
  CHECK(s.projections[0].block(0) == gen::diagonal({1.0, 0.0}));
  CHECK(s.projections[1].block(0) == gen::diagonal({0.0, 1.0}));
  CHECK_THAT((adjoint(s.embedding) * s.projections[0] * s.embedding).block(0)(0, 0).real(),
             WithinAbs(0.5, 1e-14));

  Tower const t2({2, 3});
  LocalPovm   single{t2, {LocalOperator::identity(t2)}};
  auto const  one = naimark(single);
  CHECK(one.dilation_tower == t2);
  CHECK(distance(one.projections[0], LocalOperator::identity(t2)) <= 1e-14);

  LocalPovm short_sum{t, {scalar_op(t, 0.25), scalar_op(t, 0.5)}};
  CHECK_THROWS_AS(naimark(short_sum), PreconditionError);
  auto const completed = with_defect_atom(short_sum);
  REQUIRE(completed.atoms.size() == 3);
  CHECK_THAT(completed.atoms[2].block(0)(0, 0).real(), WithinAbs(0.25, 1e-15));
  CHECK_NOTHROW(naimark(completed));

  LocalPovm over{t, {scalar_op(t, 0.75), scalar_op(t, 0.5)}};
  CHECK_THROWS_AS(with_defect_atom(over), PreconditionError);
  LocalPovm negative{t, {scalar_op(t, 1.5), scalar_op(t, -0.5)}};
  CHECK_THROWS_AS(naimark(negative), PreconditionError);
}

TEST_CASE("random Naimark dilations", "[naimark][property]") {
  gen::Rng rng(67);
  for (int it = 0; it < 30; ++it) {
    std::size_t const m     = gen::uniform(rng, 1, 4);
    Tower const       tower = gen::tower_within(rng, {2, 4});
    auto const        p     = gen::povm(rng, m, tower);
    auto const        s     = naimark(p);
    auto const&       K     = s.dilation_tower;
    auto              sum   = LocalOperator::zero(K, K);
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(has_flag(s.projections[i], Flag::projection, 1e-10));
      CHECK(distance(adjoint(s.embedding) * s.projections[i] * s.embedding, p.atoms[i]) <= 1e-10);
      for (std::size_t k = 0; k < m; ++k) {
        if (k != i) {
          CHECK((s.projections[i] * s.projections[k]).norm() <= 1e-10);
        }
      }
      sum += s.projections[i];
    }
    CHECK(distance(sum, LocalOperator::identity(K)) <= 1e-10);
    CHECK(has_flag(s.embedding, Flag::isometry, 1e-10));

    auto const via_engine = dilate(povm_function(p));
    CHECK(via_engine.dilation_tower() == K);
    // the spectral measure on a set ω compresses to φ(ω)
    std::size_t const full = (std::size_t{1} << m) - 1;
    auto const        w    = gen::uniform(rng, 0, full);
    CHECK(distance(adjoint(s.embedding) * spectral_measure(s, w) * s.embedding,
                   povm_function(p)(w)) <= 1e-10);
  }
}

TEST_CASE("unitary dilation of contractions", "[unitary]") {
  auto const zero = unitary_dilation(diag_op({0.0}), 1);
  CHECK(zero.dilation_tower.dims() == std::vector<std::size_t>{2});
  CHECK((zero.unitary.block(0) - Matrix{{0.0, 1.0}, {1.0, 0.0}}).norm() <= 1e-15);

  auto const half = unitary_dilation(diag_op({0.5}), 1);
  Matrix     u(2, 2);
  u << 0.5, std::sqrt(0.75), std::sqrt(0.75), -0.5;
  CHECK((half.unitary.block(0) - u).norm() <= 1e-15);
  CHECK_THAT((adjoint(half.embedding) * half.unitary * half.embedding).block(0)(0, 0).real(),
             WithinAbs(0.5, 1e-15));

  gen::Rng    rng(71);
  Tower const tower({1, 2, 4});
  for (int it = 0; it < 10; ++it) {
    auto const t = gen::contraction(rng, tower);
    auto const d = unitary_dilation(t, 8);
    CHECK(d.dilation_tower.dims() == std::vector<std::size_t>{9, 18, 36});
    CHECK(has_flag(d.unitary, Flag::unitary, 1e-10));
    LocalOperator un = d.unitary;
    for (std::size_t n = 1; n <= 8; ++n) {
      for (std::size_t l = 0; l < 3; ++l) {
        Matrix const lhs = oracle::level_matrix(adjoint(d.embedding) * un * d.embedding, l);
        Matrix const tl  = oracle::level_matrix(t, l);
        Matrix       tn  = Matrix::Identity(tl.rows(), tl.cols());
        for (std::size_t i = 0; i < n; ++i) {
          tn = tn * tl;
        }
        CHECK(oracle::norm(lhs - tn) <= 1e-8);
      }
      un = un * d.unitary;
    }
    CHECK(d.compression_residual <= 1e-8);
  }
  CHECK_THROWS_AS(unitary_dilation(diag_op({1.5}), 4), PreconditionError);
  CHECK_THROWS_AS(unitary_dilation(diag_op({0.5}), 0), PreconditionError);
}

TEST_CASE("ρ-contraction checks", "[rho-check]") {
  Tower const   t({2});
  LocalOperator nil(t, t, {Matrix{{0.0, 2.0}, {0.0, 0.0}}});

  auto const no = rho_contraction_check(nil, 1.0, 1);
  CHECK(no.verdict == RhoVerdict::no_with_witness);
  REQUIRE(no.window_witness);
  CHECK(no.window_witness->window == 1);
  // replay the witness on the 2-window matrix [[I, T*], [T, I]]
  Matrix const w  = rho_window_matrix(nil.block(0), 1.0, 1);
  Vector       h(4);
  h << no.window_witness->family[0], no.window_witness->family[1];
  CHECK(h.dot(w * h).real() < -0.5);
  CHECK(oracle::min_eig(w) <= -0.999);

  for (std::size_t n = 1; n <= 8; ++n) {
    auto const ok = rho_contraction_check(nil, 2.0, n);
    INFO("window " << n);
    CHECK(ok.verdict == RhoVerdict::consistent_at_window);
    CHECK(oracle::min_eig(rho_window_matrix(nil.block(0), 2.0, n)) >= -1e-12);
  }

  gen::Rng rng(73);
  for (int it = 0; it < 10; ++it) {
    auto const c = gen::contraction(rng, Tower({1, 2, 4}));
    CHECK(rho_contraction_check(c, 1.0, 6).verdict == RhoVerdict::consistent_at_window);
  }

  CHECK_THROWS_AS(rho_contraction_check(nil, 0.0, 1), PreconditionError);
  CHECK_THROWS_AS(rho_contraction_check(nil, 1.0, 0), PreconditionError);
}

TEST_CASE("window matrices grow monotonically with ρ", "[rho-check][property]") {
  gen::Rng rng(79);
  for (int it = 0; it < 20; ++it) {
    Tower const  tower = gen::tower(rng, 2, 3);
    auto         t     = gen::op(rng, tower);
    t *= gen::real(rng, 0.5, 3.0);
    double       prev  = -1e300;
    bool         seen_consistent = false;
    for (double rho : {0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
      auto const c = rho_contraction_check(t, rho, 4);
      double     m = *std::min_element(c.window_min_eig.begin(), c.window_min_eig.end());
      CHECK(m >= prev - 1e-12);
      prev = m;
      bool const consistent = c.verdict == RhoVerdict::consistent_at_window;
      CHECK((consistent || !seen_consistent));
      seen_consistent = seen_consistent || consistent;
    }
  }
}
