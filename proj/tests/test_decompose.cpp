#include <doctest.h>

#include <cmath>

#include "qsemi/decompose.hpp"
#include "qsemi/error.hpp"
#include "qsemi/fixtures.hpp"
#include "qsemi/matfun.hpp"
#include "test_helpers.hpp"

using namespace qsemi;

namespace {

const cplx kI(0.0, 1.0);

RMatrix random_sym(std::mt19937& rng, int d) {
  const RMatrix a = qsemi::testing::random_real(rng, d, d);
  return 0.5 * (a + a.transpose());
}

QuadraticForm skew_graph_form() {
  RMatrix G(2, 2);
  G << 0.3, 0.8, -0.4, 0.1;
  RMatrix A(2, 4);
  A << -G, RMatrix::Identity(2, 2);
  return QuadraticForm::from_matrix(to_complex(RMatrix(A.transpose() * A)));
}

}  // namespace

TEST_CASE("weyl_exp_matrix is multiplicative for commuting symbols") {
  const CMatrix P = 0.3 * fixtures::heat(1).Q;
  CHECK((weyl_exp_matrix(P) * weyl_exp_matrix(P) - weyl_exp_matrix(CMatrix(2.0 * P))).norm() < 1e-14);
}

TEST_CASE("polar factors") {
  const double tol = 1e-9;
  SUBCASE("real q") {
    const QuadraticForm q = fixtures::harmonic(2);
    const PolarFactors pf = polar_factors(q, 0.05, tol);
    CHECK((pf.A - q.Q.real()).norm() < 1e-12);
    CHECK(pf.B.norm() < 1e-12);
  }
  SUBCASE("purely imaginary q") {
    std::mt19937 rng(83);
    const RMatrix W = random_sym(rng, 4);
    const QuadraticForm q = QuadraticForm::from_matrix(CMatrix(kI * to_complex(W)));
    const PolarFactors pf = polar_factors(q, 0.05, tol);
    CHECK(pf.A.norm() < 1e-12);
    CHECK((pf.B - W).norm() < 1e-11);
  }
  SUBCASE("kolmogorov") {
    const QuadraticForm q = fixtures::kolmogorov();
    const PolarFactors pf = polar_factors(q, 0.05, tol);
    CHECK(pf.reconstruction_residual < 1e-10);
    CHECK(psd_check(pf.A, 1e-12).psd);
    CHECK(isotropic_cone_check(pf.A, singular_space(q, tol)) < 1e-9);
  }
  SUBCASE("A vanishes on S for every fixture with a graph") {
    for (const char* name : {"heat", "harmonic", "kolmogorov", "fokker-planck", "shifted-diagonal", "x-squared"}) {
      const QuadraticForm q = fixtures::by_name(name);
      const PolarFactors pf = polar_factors(q, 0.05, tol);
      CHECK(isotropic_cone_check(pf.A, singular_space(q, tol)) < 1e-8);
    }
  }
  SUBCASE("random accretive forms") {
    std::mt19937 rng(89);
    std::uniform_real_distribution<double> ut(0.005, 0.05);
    for (int trial = 0; trial < 100; ++trial) {
      CMatrix Q = qsemi::testing::random_accretive(rng, 2, 1.0);
      Q /= std::max(1.0, op_norm(Q));
      const PolarFactors pf = polar_factors(QuadraticForm::from_matrix(Q), ut(rng), tol);
      CHECK(pf.reconstruction_residual < 1e-10);
      CHECK(psd_check(pf.A, 1e-10).psd);
    }
  }
  CHECK_THROWS_AS(polar_factors(fixtures::heat(1), 0.0, tol), Error);
}

TEST_CASE("unitary factorization") {
  const double t = 0.1;
  std::mt19937 rng(97);
  const RMatrix Wp = random_sym(rng, 2), Dp = random_sym(rng, 2);
  SUBCASE("position block") {
    RMatrix B = RMatrix::Zero(4, 4);
    B.topLeftCorner(2, 2) = Wp;
    const UnitaryFactors u = unitary_factorization(B, t);
    CHECK(u.D.norm() < 1e-12);
    CHECK(u.M.norm() < 1e-12);
    // e^{-tJ diag(W,0)} = e^{2tJB} forces W = -2W'
    CHECK((u.W + 2.0 * Wp).norm() < 1e-12);
  }
  SUBCASE("frequency block") {
    RMatrix B = RMatrix::Zero(4, 4);
    B.bottomRightCorner(2, 2) = Dp;
    const UnitaryFactors u = unitary_factorization(B, t);
    CHECK((u.D - Dp).norm() < 1e-12);
    CHECK(u.M.norm() < 1e-12);
    CHECK(u.W.norm() < 1e-12);
  }
  SUBCASE("random symmetric B") {
    for (int trial = 0; trial < 100; ++trial) {
      RMatrix B = random_sym(rng, 4);
      B *= 0.1 / (t * op_norm(B));
      const UnitaryFactors u = unitary_factorization(B, t);
      CHECK(u.iterations <= 8);
      CHECK(u.residual < 1e-12);
      CHECK((u.D - u.D.transpose()).norm() < 1e-15);
      CHECK((u.W - u.W.transpose()).norm() < 1e-15);
      const CMatrix target = mat_exp(2.0 * t * standard_J(2) * to_complex(B));
      CHECK((unitary_product(u, t) - target).norm() < 1e-10);
    }
  }
  SUBCASE("too large") {
    try {
      unitary_factorization(RMatrix::Identity(4, 4), 5.0);
      FAIL("expected TimeTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TimeTooLarge);
    }
  }
}

TEST_CASE("strang middle term") {
  std::mt19937 rng(101);
  const RMatrix A = 0.02 * RMatrix::Identity(4, 4) + 0.005 * random_sym(rng, 4);
  SUBCASE("B = 0") {
    CHECK((strang_middle(A, RMatrix::Zero(4, 4)).P - A).norm() < 1e-14);
  }
  SUBCASE("commuting scalars") {
    const RMatrix a = 0.03 * RMatrix::Identity(4, 4), b = 0.004 * RMatrix::Identity(4, 4);
    CHECK((strang_middle(a, b).P - (a - 2.0 * b)).norm() < 1e-14);
  }
  SUBCASE("odd") {
    for (int trial = 0; trial < 10; ++trial) {
      RMatrix a = random_sym(rng, 4), b = random_sym(rng, 4);
      a *= 0.08 / op_norm(a);
      b *= 0.05 / op_norm(b);
      const RMatrix p = strang_middle(a, b).P, m = strang_middle(RMatrix(-a), RMatrix(-b)).P;
      CHECK((p + m).norm() < 1e-11);
    }
  }
  SUBCASE("positivity on ordered pairs") {
    for (int trial = 0; trial < 50; ++trial) {
      const RMatrix X = qsemi::testing::random_real(rng, 4, 4);
      RMatrix a = X * X.transpose();
      a *= 0.03 / op_norm(a);
      const RMatrix Y = qsemi::testing::random_real(rng, 4, 4);
      RMatrix c = Y * Y.transpose();
      // 0 <= c <= a after scaling by the pencil top eigenvalue, then b = c/5
      Eigen::GeneralizedSelfAdjointEigenSolver<RMatrix> ge(c, RMatrix(a + 1e-14 * RMatrix::Identity(4, 4)));
      c /= ge.eigenvalues().maxCoeff();
      const RMatrix b = 0.2 * std::uniform_real_distribution<double>(0.1, 0.99)(rng) * c;
      const StrangResult r = strang_middle(a, b);
      CHECK(r.positivity_checked);
      CHECK(r.positivity_margin >= -1e-10);
      CHECK(r.reconstruction_residual < 1e-12);
    }
  }
  SUBCASE("radius") {
    try {
      strang_middle(RMatrix::Identity(2, 2), RMatrix::Zero(2, 2));
      FAIL("expected RadiusExceeded");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RadiusExceeded);
    }
  }
}

TEST_CASE("kolmogorov splitting at matrix level") {
  // eta^2 - i v xi at time t splits into t(eta - t xi/2)^2 + t^3 xi^2/12 followed by -i t v xi
  for (double t : {0.1, 1.0, 2.0}) {
    CMatrix P1 = CMatrix::Zero(4, 4), P2 = CMatrix::Zero(4, 4), P3 = CMatrix::Zero(4, 4);
    P1(3, 3) = t;
    P1(1, 2) = P1(2, 1) = -0.5 * kI * t;
    P2(3, 3) = t;
    P2(2, 3) = P2(3, 2) = -0.5 * t * t;
    P2(2, 2) = t * t * t / 4.0 + t * t * t / 12.0;
    P3(1, 2) = P3(2, 1) = -0.5 * kI * t;
    const CMatrix lhs = weyl_exp_matrix(P2) * weyl_exp_matrix(P3);
    CHECK((lhs - weyl_exp_matrix(P1)).norm() < 1e-12);
  }
}

TEST_CASE("gamma selection") {
  const double tol = 1e-9;
  SUBCASE("heat") {
    const QuadraticForm q = fixtures::heat(1);
    const SingularSpaceReport r = singular_space(q, tol);
    const GammaSelection g = select_gamma(q, r, *graph_condition(r, tol), TGrid{}, tol);
    CHECK(g.alpha == 1);
    for (double gt : g.gamma_t) CHECK(gt == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(g.gamma == doctest::Approx(0.09).epsilon(1e-9));
    CHECK(g.t0 == doctest::Approx(0.1));
  }
  SUBCASE("shifted diagonal") {
    const QuadraticForm q = fixtures::shifted_diagonal();
    const SingularSpaceReport r = singular_space(q, tol);
    CHECK(select_gamma(q, r, *graph_condition(r, tol), TGrid{}, tol).gamma > 0.0);
  }
  SUBCASE("kolmogorov") {
    const QuadraticForm q = fixtures::kolmogorov();
    const SingularSpaceReport r = singular_space(q, tol);
    const GammaSelection g = select_gamma(q, r, *graph_condition(r, tol), TGrid{}, tol);
    CHECK(g.alpha == 3);
    CHECK(g.gamma > 0.0);
    const auto [lo, hi] = std::minmax_element(g.gamma_t.begin(), g.gamma_t.end());
    CHECK(*hi / *lo < 10.0);
  }
  CHECK(TGrid{}.values().size() == 20);
  CHECK(TGrid{}.values().front() == doctest::Approx(1e-3));
  CHECK(TGrid{}.values().back() == doctest::Approx(0.1));
}

TEST_CASE("build and verify the decomposition") {
  const double tol = 1e-9;
  SUBCASE("heat collapses to twisted diffusions and a heat factor") {
    const DecompositionFactors f = build_decomposition(fixtures::heat(1), 0.1);
    CHECK(f.cert.G.norm() == 0.0);
    CHECK(f.cert.N.norm() == 0.0);
    CHECK(f.unitary.D.norm() < 1e-12);
    CHECK(f.unitary.M.norm() < 1e-12);
    CHECK(f.unitary.W.norm() < 1e-12);
    CHECK(f.c_t == doctest::Approx(1.0));
    const VerificationResult v = verify_decomposition(f, tol);
    CHECK(v.matrix_residual < 1e-11);
    CHECK(v.kernel_residual < 1e-11);
    CHECK(psd_check(RMatrix(f.Pt - 0.5 * f.polar.A), 1e-10).psd);
  }
  SUBCASE("shifted diagonal reduces to heat after the shear") {
    const DecompositionFactors f = build_decomposition(fixtures::shifted_diagonal(), 0.05);
    CHECK(f.cert.G(0, 0) == doctest::Approx(1.0));
    CHECK(f.cert.Gsym(0, 0) == doctest::Approx(1.0));
    CHECK(f.cert.N.norm() < 1e-12);
    CHECK((f.polar.A - fixtures::heat(1).Q.real()).norm() < 1e-12);
    for (double t : {0.01, 0.05}) CHECK(verify_decomposition(build_decomposition(fixtures::shifted_diagonal(), t), tol).kernel_residual < 1e-6);
  }
  SUBCASE("all fixtures with a graph") {
    for (const char* name : {"heat", "harmonic", "kolmogorov", "fokker-planck", "shifted-diagonal"}) {
      for (double t : {0.01, 0.02, 0.05}) {
        const DecompositionFactors f = build_decomposition(fixtures::by_name(name), t);
        const VerificationResult v = verify_decomposition(f, tol);
        CHECK(v.matrix_residual < 1e-9);
        CHECK(v.kernel_residual < 1e-6);
        CHECK(f.strang.positivity_margin >= -1e-10);
      }
    }
    CHECK(build_decomposition(fixtures::kolmogorov(), 0.05).alpha == 3);
  }
  SUBCASE("skew graph and random forms exercise every factor") {
    const DecompositionFactors g = build_decomposition(skew_graph_form(), 0.05);
    CHECK(g.cert.N.norm() > 0.1);
    CHECK(g.inverse.prefactor > 1.0);
    const VerificationResult vg = verify_decomposition(g, tol);
    CHECK(vg.matrix_residual < 1e-9);
    CHECK(vg.kernel_residual < 1e-6);

    std::mt19937 rng(103);
    for (int trial = 0; trial < 5; ++trial) {
      CMatrix Q = qsemi::testing::random_accretive(rng, 2, 1.0);
      Q.real() += 0.1 * RMatrix::Identity(4, 4);
      const DecompositionFactors f = build_decomposition(QuadraticForm::from_matrix(Q), 0.01);
      CHECK(f.unitary.iterations >= 1);
      CHECK(f.unitary.W.norm() > 0.0);
      const VerificationResult v = verify_decomposition(f, tol);
      CHECK(v.matrix_residual < 1e-9);
      CHECK(v.kernel_residual < 1e-6);
    }
  }
  SUBCASE("refusals") {
    try {
      build_decomposition(fixtures::x_squared(), 0.05);
      FAIL("expected GraphConditionFailed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GraphConditionFailed);
    }
    try {
      build_decomposition(fixtures::heat(1), 5.0);
      FAIL("expected TimeTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TimeTooLarge);
    }
  }
}
