// locdil - dilation theory on locally Hilbert spaces
//
// Scalar/matrix aliases, error types, tolerance policy and the small set of
// dense Hermitian linear-algebra kernels every other header builds on.

#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace locdil {

  using Complex    = std::complex<double>;
  using Matrix     = Eigen::MatrixXcd;
  using Vector     = Eigen::VectorXcd;
  using RealVector = Eigen::VectorXd;

  ////////////////////////////////////////////////////////////////////////
  // Errors
  ////////////////////////////////////////////////////////////////////////

  class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  // Shapes, towers or tables that do not fit together.
  class StructuralError : public Error {
   public:
    using Error::Error;
  };

  class InvalidLevel : public Error {
   public:
    using Error::Error;
  };

  // Input is well formed but violates a mathematical precondition of the
  // requested operation (not positive, not a contraction, ...).
  class PreconditionError : public Error {
   public:
    using Error::Error;
  };

  ////////////////////////////////////////////////////////////////////////
  // Tolerances
  ////////////////////////////////////////////////////////////////////////

  // All tolerances are relative; each consumer documents the scale it
  // multiplies them with.
  struct Tolerances {
    // compatibility of level systems: 1e-12 * (1 + |T|)
    double structural = 1e-12;
    // PSD slack: 1e-9 * scale (operator norm or largest |eigenvalue|)
    double psd = 1e-9;
    // eigenvalues <= rank * max eigenvalue are dropped by factorizations
    double rank = 1e-10;
    // classification predicates: 1e-9 * (1 + |B|^2)
    double flag = 1e-9;
    // post-construction verification of dilations
    double construction = 1e-8;
  };

  inline constexpr Tolerances default_tolerances{};

  ////////////////////////////////////////////////////////////////////////
  // Dense linear algebra helpers
  ////////////////////////////////////////////////////////////////////////

  namespace linalg {

    // Largest singular value; 0 for empty matrices.
    inline double op_norm(Matrix const& m) {
      if (m.size() == 0) {
        return 0.0;
      }
      if (m.rows() == 1 || m.cols() == 1) {
        return m.norm();
      }
      Eigen::JacobiSVD<Matrix> svd(m);
      return svd.singularValues()(0);
    }

    inline double min_singular_value(Matrix const& m) {
      if (m.size() == 0) {
        return 0.0;
      }
      Eigen::JacobiSVD<Matrix> svd(m);
      return svd.singularValues()(svd.singularValues().size() - 1);
    }

    inline Matrix hermitian_part(Matrix const& m) {
      return (m + m.adjoint()) / 2.0;
    }

    // Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
    // descending order.  Ties keep the solver's order, which is the first
    // index first after reversal of the ascending output.
    struct HermitianEig {
      RealVector values;
      Matrix     vectors;
    };

    inline HermitianEig eig_descending(Matrix const& h) {
      HermitianEig out;
      if (h.rows() == 0) {
        out.values  = RealVector(0);
        out.vectors = Matrix(0, 0);
        return out;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
      if (es.info() != Eigen::Success) {
        throw Error("Hermitian eigensolver failed to converge");
      }
      out.values  = es.eigenvalues().reverse();
      out.vectors = es.eigenvectors().rowwise().reverse();
      return out;
    }

    inline double min_eigenvalue(Matrix const& h) {
      if (h.rows() == 0) {
        return 0.0;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h),
                                               Eigen::EigenvaluesOnly);
      return es.eigenvalues()(0);
    }

    inline double max_abs_eigenvalue(Matrix const& h) {
      if (h.rows() == 0) {
        return 0.0;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h),
                                               Eigen::EigenvaluesOnly);
      auto const& v = es.eigenvalues();
      return std::max(std::abs(v(0)), std::abs(v(v.size() - 1)));
    }

    // Hermitian square root of a PSD matrix.  Eigenvalues in [-clamp, 0)
    // are treated as zero; anything more negative throws.
    inline Matrix psd_sqrt(Matrix const& a, double clamp) {
      if (a.rows() == 0) {
        return Matrix(0, 0);
      }
      auto const eig = eig_descending(a);
      RealVector root(eig.values.size());
      for (Eigen::Index i = 0; i < root.size(); ++i) {
        double const v = eig.values(i);
        if (v < -clamp) {
          throw PreconditionError("matrix is not positive semidefinite "
                                  "(eigenvalue "
                                  + std::to_string(v) + ")");
        }
        root(i) = std::sqrt(std::max(v, 0.0));
      }
      return eig.vectors * root.cast<Complex>().asDiagonal()
             * eig.vectors.adjoint();
    }

    // Numerical rank by singular values relative to the largest one.
    inline Eigen::Index rank(Matrix const& m, double rel) {
      if (m.size() == 0) {
        return 0;
      }
      Eigen::JacobiSVD<Matrix> svd(m);
      auto const& s = svd.singularValues();
      if (s(0) == 0.0) {
        return 0;
      }
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel * s(0)) {
          ++r;
        }
      }
      return r;
    }

    // Orthonormal basis (columns) of the range of a PSD matrix.
    inline Matrix psd_range(Matrix const& a, double rel) {
      auto const eig = eig_descending(a);
      Eigen::Index r = 0;
      double const top = eig.values.size() > 0 ? eig.values(0) : 0.0;
      while (r < eig.values.size() && top > 0.0
             && eig.values(r) > rel * top) {
        ++r;
      }
      return eig.vectors.leftCols(r);
    }

    inline Matrix random_gaussian(Eigen::Index rows,
                                  Eigen::Index cols,
                                  std::mt19937_64& rng) {
      std::normal_distribution<double> nd(0.0, 1.0);
      Matrix m(rows, cols);
      for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
          double const re = nd(rng);
          double const im = nd(rng);
          m(i, j)         = Complex(re, im);
        }
      }
      return m;
    }

    // Haar-ish random unitary from the QR factor of a Gaussian matrix, with
    // the phases of R's diagonal absorbed so the distribution is uniform.
    inline Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
      if (n == 0) {
        return Matrix(0, 0);
      }
      Matrix                        g = random_gaussian(n, n, rng);
      Eigen::HouseholderQR<Matrix> qr(g);
      Matrix q = qr.householderQ() * Matrix::Identity(n, n);
      Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (Eigen::Index i = 0; i < n; ++i) {
        Complex const d = r(i, i);
        if (std::abs(d) > 0.0) {
          q.col(i) *= d / std::abs(d);
        }
      }
      return q;
    }

  }  // namespace linalg

}  // namespace locdil
