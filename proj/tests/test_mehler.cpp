#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qsemi/error.hpp"
#include "qsemi/fixtures.hpp"
#include "qsemi/matfun.hpp"
#include "qsemi/mehler.hpp"
#include "qsemi/singular.hpp"
#include "test_helpers.hpp"

using namespace qsemi;
using std::numbers::pi;

namespace {

const cplx kI(0.0, 1.0);

GaussianKernel make_kernel(int n, cplx c, const CMatrix& K) {
  GaussianKernel g;
  g.n = n;
  g.c = c;
  g.K = K;
  return g;
}

// (4 pi t)^{-1/2} exp(-(x-y)^2 / 4t)
GaussianKernel heat_oracle(double t) {
  CMatrix K(2, 2);
  K << 1.0, -1.0, -1.0, 1.0;
  return make_kernel(1, std::pow(4.0 * pi * t, -0.5), K / (2.0 * t));
}

// Mehler's formula for (-d^2 + x^2)/2.
GaussianKernel harmonic_oracle(double t) {
  CMatrix K(2, 2);
  const double coth = 1.0 / std::tanh(t), csch = 1.0 / std::sinh(t);
  K << coth, -csch, -csch, coth;
  return make_kernel(1, 1.0 / std::sqrt(2.0 * pi * std::sinh(t)), K);
}

}  // namespace

TEST_CASE("mehler_symbol closed forms") {
  const MehlerSymbol zero = mehler_symbol(fixtures::harmonic(1), 0.0);
  CHECK(zero.c == cplx(1.0, 0.0));
  CHECK(zero.M.norm() == 0.0);

  const double t = 0.7;
  const MehlerSymbol h = mehler_symbol(fixtures::heat(2), t);
  CHECK(std::abs(h.c - 1.0) < 1e-14);
  CMatrix expect = CMatrix::Zero(4, 4);
  expect.bottomRightCorner(2, 2) = t * CMatrix::Identity(2, 2);
  CHECK((h.M - expect).norm() < 1e-14);

  // harmonic: c = 1/cosh(t/2), m = tanh(t/2)(x^2 + xi^2)
  const MehlerSymbol o = mehler_symbol(fixtures::harmonic(1), 1.0);
  CHECK(std::abs(o.c - 1.0 / std::cosh(0.5)) < 1e-14);
  CHECK((o.M - std::tanh(0.5) * CMatrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("mehler_symbol has nonnegative real part and block round trip") {
  std::mt19937 rng(61);
  for (const char* name : {"heat", "harmonic", "kolmogorov", "fokker-planck", "shifted-diagonal", "x-squared"}) {
    const MehlerSymbol s = mehler_symbol(fixtures::by_name(name), 0.3);
    CHECK(psd_check(RMatrix(s.M.real()), 1e-10).psd);
    CHECK((block_assemble(block_decompose(s.M)) - s.M).norm() < 1e-15);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const QuadraticForm q = QuadraticForm::from_matrix(qsemi::testing::random_accretive(rng, 2, 1.0));
    CHECK(psd_check(RMatrix(mehler_symbol(q, 0.2).M.real()), 1e-10).psd);
  }
}

TEST_CASE("kernel_from_symbol matches classical kernels") {
  for (double t : {0.01, 0.1, 1.0}) {
    CHECK(kernel_distance(kernel(fixtures::heat(1), t), heat_oracle(t)) < 1e-12);
    CHECK(kernel_distance(kernel(fixtures::harmonic(1), t), harmonic_oracle(t)) < 1e-12);
  }
  const GaussianKernel h2 = kernel(fixtures::heat(2), 0.2);
  CHECK(std::abs(h2.c - 1.0 / (4.0 * pi * 0.2)) < 1e-12);
}

TEST_CASE("twisted kernel") {
  const double eps = 0.5;
  const GaussianKernel flat = twisted_kernel(RMatrix::Zero(2, 2), eps);
  CHECK(std::abs(flat.c - 1.0 / (2.0 * pi * eps)) < 1e-14);
  RMatrix N(2, 2);
  N << 0.0, 1.0, -1.0, 0.0;
  const GaussianKernel tw = twisted_kernel(N, eps);
  CHECK((tw.K.real() - flat.K.real()).norm() < 1e-15);
  std::mt19937 rng(67);
  std::normal_distribution<double> nd;
  for (int s = 0; s < 10; ++s) {
    const RVector x = qsemi::testing::random_real(rng, 2, 1), y = qsemi::testing::random_real(rng, 2, 1);
    CHECK(std::abs(std::abs(tw(x, y)) - std::abs(flat(x, y))) < 1e-14);
    // displayed closed form
    const cplx direct = std::exp(-(x - y).squaredNorm() / (2 * eps) + kI * (x - y).dot(N * x)) / (2 * pi * eps);
    CHECK(std::abs(tw(x, y) - direct) < 1e-14);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const RMatrix Nr = qsemi::testing::random_skew(rng, 3);
    MehlerSymbol sym;
    sym.M = to_complex(RMatrix(0.5 * 0.3 * twisted_form_matrix(Nr)));
    CHECK(kernel_distance(kernel_from_symbol(sym), twisted_kernel(Nr, 0.3)) < 1e-12);
  }
}

TEST_CASE("Fokker-Planck symbol against a direct oscillatory integral") {
  // m(x, xi) = xi^2/2 - 2i x xi
  MehlerSymbol sym;
  sym.M = CMatrix::Zero(2, 2);
  sym.M(1, 1) = 0.5;
  sym.M(0, 1) = sym.M(1, 0) = -kI;
  const GaussianKernel k = kernel_from_symbol(sym);
  CHECK(std::abs(k.c - 1.0 / std::sqrt(2.0 * pi)) < 1e-14);
  CHECK(std::abs(k.K(0, 0) - 4.0) < 1e-14);
  CHECK(k.K.block(0, 1, 2, 1).norm() < 1e-14);
  // Weyl kernel (2 pi)^{-1} int e^{i(x-y)xi} e^{-m((x+y)/2, xi)} dxi by trapezoid
  for (double x : {-0.7, 0.0, 0.4, 1.1}) {
    for (double y : {-1.0, 0.3}) {
      const int npts = 4001;
      const double L = 20.0, h = 2 * L / (npts - 1);
      cplx acc(0.0, 0.0);
      for (int j = 0; j < npts; ++j) {
        const double xi = -L + j * h;
        const double z = 0.5 * (x + y);
        acc += std::exp(kI * (x - y) * xi - 0.5 * xi * xi + 2.0 * kI * z * xi);
      }
      acc *= h / (2 * pi);
      RVector X(1), Y(1);
      X << x;
      Y << y;
      CHECK(std::abs(k(X, Y) - acc) < 1e-12);
      CHECK(std::abs(acc - std::exp(-2.0 * x * x) / std::sqrt(2 * pi)) < 1e-12);
    }
  }
}

TEST_CASE("kernel_from_symbol refuses a degenerate symbol") {
  try {
    kernel(fixtures::x_squared(), 0.1);
    FAIL("expected NonIntegrableSymbol");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonIntegrableSymbol);
  }
}

TEST_CASE("diagnostics") {
  const double t = 0.4;
  const KernelDiagnostics h = diagnostics_PVMN(mehler_symbol(fixtures::heat(1), t));
  CHECK(std::abs(h.P(0, 0) - 1.0 / (2 * t)) < 1e-14);
  CHECK(h.V.norm() < 1e-15);
  CHECK(std::abs(h.Mleft(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(h.Nright(0, 0) - 1.0) < 1e-15);

  const KernelDiagnostics o = diagnostics_PVMN(mehler_symbol(fixtures::harmonic(1), 1.0));
  CHECK(std::abs(o.V(0, 0) - 2 * std::tanh(0.5)) < 1e-14);
  CHECK(std::abs(o.P(0, 0) - 1.0 / (2 * std::tanh(0.5))) < 1e-14);

  for (const char* name : {"heat", "harmonic", "kolmogorov", "fokker-planck", "shifted-diagonal"}) {
    const QuadraticForm q = fixtures::by_name(name);
    const KernelDiagnostics d = diagnostics_PVMN(mehler_symbol(q, 0.1));
    CHECK(psd_check(d.V, 1e-10).psd);
    Eigen::LLT<RMatrix> llt(d.P);
    CHECK(llt.info() == Eigen::Success);
    const int kerV = static_cast<int>(null_space(d.V, 1e-8).cols());
    CHECK(kerV == singular_space(q, 1e-9).dim);
  }
}

TEST_CASE("composition") {
  std::mt19937 rng(71);
  CHECK(kernel_distance(compose_kernels(heat_oracle(0.1), heat_oracle(0.25)), heat_oracle(0.35)) < 1e-13);
  CHECK(kernel_distance(compose_kernels(harmonic_oracle(0.3), harmonic_oracle(0.9)), harmonic_oracle(1.2)) < 1e-12);
  const GaussianKernel k = kernel(fixtures::kolmogorov(), 0.2);
  const GaussianKernel near = compose_kernels(k, kernel(fixtures::heat(2), 1e-8));
  CHECK(kernel_distance(near, k) < 1e-4);

  for (const char* name : {"heat", "harmonic", "kolmogorov", "fokker-planck", "shifted-diagonal"}) {
    const QuadraticForm q = fixtures::by_name(name);
    CHECK(kernel_distance(compose_kernels(kernel(q, 0.03), kernel(q, 0.05)), kernel(q, 0.08)) < 1e-9);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const QuadraticForm q = QuadraticForm::from_matrix(qsemi::testing::random_accretive(rng, 2, 1.0));
    CHECK(kernel_distance(compose_kernels(kernel(q, 0.04), kernel(q, 0.06)), kernel(q, 0.1)) < 1e-9);
  }
  CHECK_THROWS_AS(compose_kernels(heat_oracle(0.1), kernel(fixtures::heat(2), 0.1)), Error);
}

TEST_CASE("elementary operator compositions agree pointwise") {
  std::mt19937 rng(73);
  const GaussianKernel k = kernel(fixtures::fokker_planck(), 0.3);
  CMatrix V = qsemi::testing::random_real(rng, 2, 2).cast<cplx>();
  V = 0.5 * (V + V.transpose());
  const GaussianKernel lp = kernel_left_phase(k, V);
  const GaussianKernel rp = kernel_right_phase(k, V);
  RMatrix M = qsemi::testing::random_real(rng, 2, 2);
  const double t = 0.3;
  const GaussianKernel rf = kernel_right_flow(k, M, t);
  const RMatrix emt = mat_exp(to_complex(RMatrix(-t * M))).real();
  for (int s = 0; s < 10; ++s) {
    const RVector x = qsemi::testing::random_real(rng, 2, 1), y = qsemi::testing::random_real(rng, 2, 1);
    const cplx g = k(x, y);
    CHECK(std::abs(lp(x, y) - std::exp(0.5 * kI * x.dot(V.real() * x)) * g) < 1e-12 * std::abs(g) + 1e-300);
    CHECK(std::abs(rp(x, y) - std::exp(0.5 * kI * y.dot(V.real() * y)) * g) < 1e-12 * std::abs(g) + 1e-300);
    // u(e^{tM} y) substituted: kernel g(x, e^{-tM} y) det e^{-tM}
    const cplx flow = k(x, RVector(emt * y)) * std::exp(-t * M.trace());
    CHECK(std::abs(rf(x, y) - flow) < 1e-12 * std::abs(flow) + 1e-300);
  }
  // heat(t1) followed by e^{t2 Laplacian} is heat(t1 + t2)
  CHECK(kernel_distance(kernel_right_multiplier(heat_oracle(0.2), 0.15 * CMatrix::Identity(1, 1)), heat_oracle(0.35)) <
        1e-13);
}

TEST_CASE("mehler inverse of the twisted diffusion") {
  std::mt19937 rng(79);
  const RMatrix N = qsemi::testing::random_skew(rng, 2);
  const MehlerInverse z = mehler_inverse_twisted(N, 0.0);
  CHECK((z.Rs - twisted_form_matrix(N)).norm() < 1e-15);
  CHECK(z.prefactor == 1.0);

  const RMatrix zero = RMatrix::Zero(3, 3);
  const MehlerInverse flat = mehler_inverse_twisted(zero, 0.6);
  CHECK((flat.Rs - twisted_form_matrix(zero)).norm() < 1e-15);
  CHECK(std::abs(flat.prefactor - 1.0) < 1e-14);

  for (int trial = 0; trial < 10; ++trial) {
    const RMatrix Nr = qsemi::testing::random_skew(rng, 3);
    const RMatrix frak = twisted_form_matrix(Nr);
    const double s = 0.5 / (std::sqrt(2.0) * op_norm(frak));
    const MehlerInverse inv = mehler_inverse_twisted(Nr, s);
    CHECK((inv.Rs - inv.Rs.transpose()).norm() < 1e-14);
    CHECK(inv.prefactor >= 1.0 - 1e-12);
    // generalized eigenvalues of r_s against n on range(n): all in [1, 2]
    Eigen::SelfAdjointEigenSolver<RMatrix> es(frak);
    const RMatrix U = es.eigenvectors().rightCols(3);  // frak has rank n
    const RVector lam = es.eigenvalues().tail(3);
    const RMatrix W = U * lam.cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<RMatrix> pencil(RMatrix(W.transpose() * inv.Rs * W));
    CHECK(pencil.eigenvalues().minCoeff() >= 1.0 - 1e-10);
    CHECK(pencil.eigenvalues().maxCoeff() <= 2.0 + 1e-10);
    CHECK(psd_check(RMatrix(inv.Rs - frak), 1e-10).psd);
    CHECK(psd_check(RMatrix(2.0 * frak - inv.Rs), 1e-10).psd);

    // the Mehler symbol of r_s at time s is s n, with c = 1/prefactor
    const MehlerSymbol back = mehler_symbol(QuadraticForm::from_matrix(to_complex(inv.Rs)), s);
    CHECK((back.M - to_complex(RMatrix(s * frak))).norm() < 1e-9 * s * frak.norm());
    CHECK(std::abs(back.c * inv.prefactor - 1.0) < 1e-9);
  }
  try {
    mehler_inverse_twisted(N, 10.0);
    FAIL("expected SeriesRegimeViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeriesRegimeViolated);
  }
}
