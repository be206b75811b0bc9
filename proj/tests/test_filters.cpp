#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "sgnn/data_io.hpp"
#include "sgnn/filters.hpp"
#include "sgnn/graph.hpp"
#include "sgnn/spectral.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace sgnn {
namespace {

using testing::cheb_spectral_oracle;
using testing::jacobi_eigen;
using testing::random_connected_graph;
using testing::random_matrix;
using testing::random_tree;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an sgnn::Error";
  return ErrorCode::kInvalidArgument;
}

// Natural cubic spline through (j / (K-1), y_j) as K-1 explicit cubics
// a + b s + c s^2 + d s^3 on each segment, found from one dense linear
// system with value, C1 and C2 matching plus natural ends, then evaluated
// at i / (d-1).
Vector spline_oracle(const Vector& y, Index d) {
  const Index k = y.size();
  const Index segs = k - 1;
  const double h = 1.0 / static_cast<double>(segs);
  const Index n = 4 * segs;
  Matrix a = Matrix::Zero(n, n);
  Vector rhs = Vector::Zero(n);
  Index row = 0;
  auto coef = [](Index s, int p) { return 4 * s + p; };
  for (Index s = 0; s < segs; ++s) {
    // s(0) = y_s, s(h) = y_{s+1}
    a(row, coef(s, 0)) = 1.0;
    rhs[row++] = y[s];
    for (int p = 0; p < 4; ++p) a(row, coef(s, p)) = std::pow(h, p);
    rhs[row++] = y[s + 1];
  }
  for (Index s = 0; s + 1 < segs; ++s) {
    // first derivative continuity
    a(row, coef(s, 1)) = 1.0;
    a(row, coef(s, 2)) = 2.0 * h;
    a(row, coef(s, 3)) = 3.0 * h * h;
    a(row, coef(s + 1, 1)) = -1.0;
    ++row;
    // second derivative continuity
    a(row, coef(s, 2)) = 2.0;
    a(row, coef(s, 3)) = 6.0 * h;
    a(row, coef(s + 1, 2)) = -2.0;
    ++row;
  }
  a(row++, coef(0, 2)) = 2.0;
  a(row, coef(segs - 1, 2)) = 2.0;
  a(row++, coef(segs - 1, 3)) = 6.0 * h;
  EXPECT_EQ(row, n);
  const Vector c = a.fullPivLu().solve(rhs);

  Vector out(d);
  for (Index i = 0; i < d; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(d - 1);
    Index s = std::min<Index>(static_cast<Index>(std::floor(t / h)), segs - 1);
    const double u = t - static_cast<double>(s) * h;
    out[i] = c[coef(s, 0)] + u * (c[coef(s, 1)] + u * (c[coef(s, 2)] + u * c[coef(s, 3)]));
  }
  return out;
}

// -------------------------------------------------------------- splines

TEST(Spline, IdentityWhenControlEqualsTarget) {
  for (Index k = 2; k <= 9; ++k) {
    EXPECT_EQ(build_spline_kernel(k, k).kernel, Matrix::Identity(k, k));
  }
}

TEST(Spline, TwoControlPointsIsLinear) {
  const SplineFilterSpec s = build_spline_kernel(2, 5);
  Vector alpha(2);
  alpha << 1.0, 3.0;
  Vector expected(5);
  expected << 1.0, 1.5, 2.0, 2.5, 3.0;
  EXPECT_LT((spline_filter_diag(s, alpha) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Spline, ThreeControlPointsMidpoint) {
  // Natural spline through (0,0), (1/2,1), (1,0): M_1 = -12, value at 1/4
  // is 1/2 + (1/8 - 1/2)(-12)(1/4)/6 = 11/16.
  const SplineFilterSpec s = build_spline_kernel(3, 5);
  Vector alpha(3);
  alpha << 0.0, 1.0, 0.0;
  const Vector v = spline_filter_diag(s, alpha);
  EXPECT_NEAR(v[1], 11.0 / 16.0, 1e-14);
  EXPECT_NEAR(v[2], 1.0, 1e-14);
  EXPECT_NEAR(v[3], 11.0 / 16.0, 1e-14);
}

TEST(Spline, Errors) {
  EXPECT_EQ(code_of([] { build_spline_kernel(1, 4); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { build_spline_kernel(5, 4); }), ErrorCode::kInvalidArgument);
  const SplineFilterSpec s = build_spline_kernel(3, 4);
  EXPECT_EQ(code_of([&] { spline_filter_diag(s, Vector::Zero(4)); }),
            ErrorCode::kDimensionMismatch);
}

TEST(SplineProperty, MatchesPiecewiseCubicOracle) {
  Rng rng(201);
  for (int trial = 0; trial < 100; ++trial) {
    const Index k = 2 + rng.below(10);
    const Index d = k + rng.below(60);
    const Vector alpha = random_matrix(rng, k, 1, -2.0, 2.0);
    const Vector got = spline_filter_diag(build_spline_kernel(k, d), alpha);
    EXPECT_LT((got - spline_oracle(alpha, d)).cwiseAbs().maxCoeff(), 1e-10)
        << "K=" << k << " d=" << d;
  }
}

TEST(SplineProperty, ReproducesAffineData) {
  Rng rng(202);
  for (int trial = 0; trial < 50; ++trial) {
    const Index k = 2 + rng.below(10);
    const Index d = k + rng.below(40);
    const double c0 = rng.uniform(-1.0, 1.0), c1 = rng.uniform(-1.0, 1.0);
    Vector alpha(k), expected(d);
    for (Index j = 0; j < k; ++j) alpha[j] = c0 + c1 * j / static_cast<double>(k - 1);
    for (Index i = 0; i < d; ++i) expected[i] = c0 + c1 * i / static_cast<double>(d - 1);
    const Vector got = spline_filter_diag(build_spline_kernel(k, d), alpha);
    EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SplineProperty, InterpolatesAtKnots) {
  Rng rng(203);
  for (int trial = 0; trial < 30; ++trial) {
    const Index k = 2 + rng.below(8);
    const Index m = 1 + rng.below(5);
    const Index d = m * (k - 1) + 1;  // every knot is an evaluation point
    const Vector alpha = random_matrix(rng, k, 1);
    const Vector got = spline_filter_diag(build_spline_kernel(k, d), alpha);
    for (Index j = 0; j < k; ++j) EXPECT_EQ(got[j * m], alpha[j]);
  }
}

// ------------------------------------------------------ spectral conv

TEST(SpectralConv, EigenvalueFilterIsLaplacian) {
  Rng rng(211);
  const SparseGraph g = random_connected_graph(rng, 20, true);
  const SparseSymMatrix l = laplacian(g, LaplacianKind::kCombinatorial);
  const SpectralBasis b = laplacian_basis(g, LaplacianKind::kCombinatorial);
  const Matrix x = random_matrix(rng, g.n_vertices(), 3);
  EXPECT_LT((spectral_conv(b, b.eigenvalues, x) - l.multiply(x)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((spectral_conv(b, Vector::Ones(b.d()), x) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SpectralConv, DimensionErrors) {
  const SpectralBasis b =
      laplacian_basis(synth_graph(SynthKind::kPath, 4), LaplacianKind::kCombinatorial);
  EXPECT_EQ(code_of([&] { spectral_conv(b, Vector::Ones(3), Matrix::Ones(4, 1)); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { spectral_conv(b, Vector::Ones(4), Matrix::Ones(5, 1)); }),
            ErrorCode::kDimensionMismatch);
}

// ---------------------------------------------------------- Chebyshev

TEST(Chebyshev, RescaledLaplacianOfPath2) {
  const SparseSymMatrix l =
      laplacian(synth_graph(SynthKind::kPath, 2), LaplacianKind::kSymmetricNormalized);
  Matrix expected(2, 2);
  expected << 0, -1, -1, 0;
  EXPECT_EQ(rescale_laplacian(l, 2.0).to_dense(), expected);
  EXPECT_EQ(code_of([&] { rescale_laplacian(l, 0.0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { rescale_laplacian(l, INFINITY); }), ErrorCode::kInvalidArgument);
}

TEST(Chebyshev, SingleCoefficientScales) {
  const SparseSymMatrix l =
      laplacian(synth_graph(SynthKind::kRing, 5), LaplacianKind::kSymmetricNormalized);
  const Matrix x = Matrix::Constant(5, 2, 1.5);
  EXPECT_EQ(cheb_apply({Vector::Constant(1, 2.0), 2.0}, l, x), 2.0 * x);
  EXPECT_EQ(code_of([&] { cheb_apply({Vector(), 2.0}, l, x); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { cheb_apply({Vector::Ones(2), 2.0}, l, Matrix::Ones(4, 1)); }),
            ErrorCode::kDimensionMismatch);
}

TEST(ChebyshevProperty, SpatialEqualsSpectral) {
  Rng rng(221);
  for (int trial = 0; trial < 100; ++trial) {
    const SparseGraph g = random_connected_graph(rng, 20, trial % 2 == 0);
    const auto kind = trial % 2 == 0 ? LaplacianKind::kSymmetricNormalized
                                     : LaplacianKind::kCombinatorial;
    const SparseSymMatrix l = laplacian(g, kind);
    const double lambda_max =
        kind == LaplacianKind::kSymmetricNormalized ? 2.0
                                                    : jacobi_eigen(l.to_dense()).values.maxCoeff();
    const Index k = 1 + rng.below(5);
    const Vector theta = random_matrix(rng, k, 1);
    const Matrix x = random_matrix(rng, g.n_vertices(), 1 + rng.below(3));
    const Matrix got = cheb_apply({theta, lambda_max}, l, x);
    const Matrix want = cheb_spectral_oracle(l.to_dense(), theta, lambda_max, x);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
  }
}

TEST(ChebyshevProperty, LocalityOnTrees) {
  Rng rng(222);
  for (int trial = 0; trial < 100; ++trial) {
    const SparseGraph g = random_tree(rng, 2 + rng.below(30));
    const Index n = g.n_vertices();
    const SparseSymMatrix l = laplacian(g, LaplacianKind::kSymmetricNormalized);
    const Index k = 1 + rng.below(6);
    Vector theta = random_matrix(rng, k, 1, 0.5, 1.5);
    const Index source = rng.below(n);
    const Matrix delta = Vector::Unit(n, source);
    const Matrix y = cheb_apply({theta, 2.0}, l, delta);
    const std::vector<Index> hops = hop_distances(g, source);
    for (Index v = 0; v < n; ++v) {
      if (hops[v] > k - 1) {
        EXPECT_EQ(y(v, 0), 0.0) << "vertex " << v << " at " << hops[v] << " hops, K=" << k;
      } else if (hops[v] == k - 1) {
        // Only the top-order term reaches this far, along a unique path.
        EXPECT_NE(y(v, 0), 0.0);
      }
    }
  }
}

TEST(ChebyshevProperty, LayerMatchesSpectralOracle) {
  Rng rng(223);
  for (int trial = 0; trial < 30; ++trial) {
    const SparseGraph g = random_connected_graph(rng, 20);
    const SparseSymMatrix l = laplacian(g, LaplacianKind::kSymmetricNormalized);
    const Index k = 1 + rng.below(5), f_in = 1 + rng.below(3), f_out = 1 + rng.below(3);
    ChebLayerParams p;
    p.activation = trial % 2 == 0 ? Activation::kRelu : Activation::kIdentity;
    for (Index o = 0; o < k; ++o) p.theta.push_back(random_matrix(rng, f_in, f_out));
    const Matrix x = random_matrix(rng, g.n_vertices(), f_in);
    // Output channel j collects, over orders and input channels, the scalar
    // Chebyshev filter with coefficients theta[.](i, j) applied to x[:, i].
    Matrix want = Matrix::Zero(g.n_vertices(), f_out);
    for (Index i = 0; i < f_in; ++i) {
      for (Index j = 0; j < f_out; ++j) {
        Vector th(k);
        for (Index o = 0; o < k; ++o) th[o] = p.theta[o](i, j);
        want.col(j) += cheb_spectral_oracle(l.to_dense(), th, 2.0, x.col(i));
      }
    }
    if (p.activation == Activation::kRelu) want = want.cwiseMax(0.0);
    EXPECT_LT((cheb_layer_forward(p, l, x) - want).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(SpectralLayer, MatchesPerChannelConvolutions) {
  Rng rng(231);
  const SparseGraph g = random_connected_graph(rng, 15);
  const SpectralBasis b = laplacian_basis(g, LaplacianKind::kSymmetricNormalized);
  SpectralLayerParams p;
  p.f_in = 2;
  p.f_out = 3;
  for (Index c = 0; c < p.f_in * p.f_out; ++c) p.g_hat.push_back(random_matrix(rng, b.d(), 1));
  const Matrix x = random_matrix(rng, b.n(), p.f_in);
  const Matrix u = b.eigenvectors;
  Matrix want = Matrix::Zero(b.n(), p.f_out);
  for (Index i = 0; i < p.f_in; ++i) {
    for (Index j = 0; j < p.f_out; ++j) {
      want.col(j) += u * p.g_hat[i * p.f_out + j].asDiagonal() * u.transpose() * x.col(i);
    }
  }
  EXPECT_LT((spectral_layer_forward(p, b, x) - want.cwiseMax(0.0)).cwiseAbs().maxCoeff(), 1e-12);
  p.activation = Activation::kIdentity;
  EXPECT_LT((spectral_layer_forward(p, b, x) - want).cwiseAbs().maxCoeff(), 1e-12);
  p.g_hat.pop_back();
  EXPECT_EQ(code_of([&] { spectral_layer_forward(p, b, x); }), ErrorCode::kDimensionMismatch);
}

}  // namespace
}  // namespace sgnn
