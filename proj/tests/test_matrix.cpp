#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "robcert/matrix.hpp"

using namespace robcert;

namespace {

Mat randomMat(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

// Elementwise double-loop Kronecker oracle, independent of kron().
Mat kronOracle(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) {
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("kron identity and diagonal expansion") {
  Mat x = (Mat(2, 2) << 1, 2, 3, 4).finished();
  REQUIRE((kron(Mat::Identity(1, 1), x) - x).norm() == 0.0);

  Mat five = (Mat(1, 1) << 5).finished();
  Mat d = kron(Mat::Identity(2, 2), five);
  REQUIRE(d.rows() == 2);
  REQUIRE(d(0, 0) == 5.0);
  REQUIRE(d(1, 1) == 5.0);
  REQUIRE(d(0, 1) == 0.0);
}

TEST_CASE("kron block swap against elementwise oracle") {
  std::mt19937_64 rng(7);
  Mat swap = (Mat(2, 2) << 0, 1, 1, 0).finished();
  Mat a = kron(swap, Mat::Identity(2, 2));
  Mat v = randomMat(rng, 4, 1);
  Mat swapped = a * v;
  REQUIRE(swapped(0) == v(2));
  REQUIRE(swapped(1) == v(3));
  REQUIRE(swapped(2) == v(0));
  REQUIRE(swapped(3) == v(1));

  for (int t = 0; t < 10; ++t) {
    Mat x = randomMat(rng, 3, 2), y = randomMat(rng, 2, 4);
    REQUIRE((kron(x, y) - kronOracle(x, y)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("kron bilinearity") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    Mat a = randomMat(rng, 3, 3), b = randomMat(rng, 3, 3);
    double alpha = 2.75;
    REQUIRE((kron(alpha * a, b) - alpha * kron(a, b)).cwiseAbs().maxCoeff() <=
            1e-12 * kron(a, b).cwiseAbs().maxCoeff() * std::abs(alpha));
  }
}

TEST_CASE("expm basic cases") {
  REQUIRE((expm(Mat::Zero(3, 3)) - Mat::Identity(3, 3)).norm() <= 1e-14);

  Mat d = Vec::LinSpaced(2, 1, 2).asDiagonal();
  Mat ed = expm(d);
  REQUIRE(ed(0, 0) == Catch::Approx(std::exp(1.0)).epsilon(1e-12));
  REQUIRE(ed(1, 1) == Catch::Approx(std::exp(2.0)).epsilon(1e-12));
  REQUIRE(std::abs(ed(0, 1)) <= 1e-14);

  Mat nilp = (Mat(2, 2) << 0, 1, 0, 0).finished();
  Mat en = expm(nilp);
  REQUIRE(en(0, 0) == Catch::Approx(1.0));
  REQUIRE(en(0, 1) == Catch::Approx(1.0));
  REQUIRE(en(1, 0) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(en(1, 1) == Catch::Approx(1.0));

  REQUIRE_THROWS_AS(expm(Mat::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("expm inverse property") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    Mat a = randomMat(rng, 4, 4);
    a *= 5.0 / std::max(1.0, a.norm());
    Mat prod = expm(a) * expm(Mat(-a));
    REQUIRE((prod - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("pinv diagonal and identity") {
  REQUIRE((pinv(Mat::Identity(4, 4)) - Mat::Identity(4, 4)).norm() <= 1e-14);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2.0;
  Mat p = pinv(d);
  REQUIRE(p(0, 0) == Catch::Approx(0.5));
  REQUIRE(p(1, 1) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("pinv satisfies the four Penrose identities") {
  std::mt19937_64 rng(17);
  auto checkPenrose = [](const Mat& a, const Mat& p) {
    REQUIRE((a * p * a - a).cwiseAbs().maxCoeff() <= 1e-9 * (1 + a.norm()));
    REQUIRE((p * a * p - p).cwiseAbs().maxCoeff() <= 1e-9 * (1 + p.norm()));
    REQUIRE((a * p - (a * p).transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    REQUIRE((p * a - (p * a).transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  };
  for (int t = 0; t < 8; ++t) {
    Mat a = randomMat(rng, 5, 3);
    checkPenrose(a, pinv(a));
    REQUIRE((pinv(a) * a - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
  }
  for (int t = 0; t < 5; ++t) {
    Mat a = randomMat(rng, 20, 20);
    // make it rank deficient
    a.col(7) = a.col(3) * 2.0 - a.col(1);
    checkPenrose(a, pinv(a));
  }
}

TEST_CASE("kernelBasis trivial and rank-deficient cases") {
  REQUIRE(kernelBasis(Mat::Identity(3, 3)).cols() == 0);

  Mat row = (Mat(1, 2) << 1, 0).finished();
  Mat k = kernelBasis(row);
  REQUIRE(k.cols() == 1);
  REQUIRE(std::abs(std::abs(k(1, 0)) - 1.0) <= 1e-14);
  REQUIRE(std::abs(k(0, 0)) <= 1e-14);

  std::mt19937_64 rng(19);
  for (int t = 0; t < 10; ++t) {
    Mat u = randomMat(rng, 4, 2), v = randomMat(rng, 2, 4);
    Mat a = u * v;  // rank 2
    Mat kb = kernelBasis(a);
    REQUIRE(kb.cols() == 2);
    REQUIRE((a * kb).cwiseAbs().maxCoeff() <= 1e-10 * (1 + a.norm()));
    REQUIRE((kb.transpose() * kb - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <=
            1e-10);
  }
}

TEST_CASE("symEig analytic cases") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  auto r = symEig(SymMat(d));
  REQUIRE(r.values(0) == Catch::Approx(1.0));
  REQUIRE(r.values(1) == Catch::Approx(3.0));

  auto z = symEig(SymMat(Mat::Zero(3, 3)));
  REQUIRE(z.values.cwiseAbs().maxCoeff() == 0.0);

  Mat sw = (Mat(2, 2) << 0, 1, 1, 0).finished();
  auto s = symEig(SymMat(sw));
  REQUIRE(s.values(0) == Catch::Approx(-1.0));
  REQUIRE(s.values(1) == Catch::Approx(1.0));
}

TEST_CASE("symEig reconstructs") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    Mat a = randomMat(rng, 6, 6);
    SymMat s = SymMat::symmetrize(a);
    auto r = symEig(s);
    Mat rec = r.vectors * r.values.asDiagonal() * r.vectors.transpose();
    REQUIRE((rec - s.mat()).cwiseAbs().maxCoeff() <=
            1e-10 * (1 + s.mat().cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("SymMat rejects asymmetric input") {
  Mat bad = (Mat(2, 2) << 0, 1, 0, 0).finished();
  REQUIRE_THROWS_AS(SymMat(bad), std::invalid_argument);
  REQUIRE_NOTHROW(SymMat::symmetrize(bad));
}

TEST_CASE("block assembly helpers") {
  Mat a = Mat::Ones(2, 2), b = 2 * Mat::Ones(2, 3);
  Mat h = hcat({a, b});
  REQUIRE(h.rows() == 2);
  REQUIRE(h.cols() == 5);
  REQUIRE(h(0, 4) == 2.0);

  Mat v = vcat({a, Mat::Zero(1, 2)});
  REQUIRE(v.rows() == 3);
  REQUIRE(v(2, 0) == 0.0);

  Mat d = blkdiag({a, b});
  REQUIRE(d.rows() == 4);
  REQUIRE(d.cols() == 5);
  REQUIRE(d(0, 2) == 0.0);
  REQUIRE(d(2, 2) == 2.0);

  // zero-width blocks pass through
  REQUIRE(hcat({a, Mat(2, 0)}).cols() == 2);
  REQUIRE(blkdiag({Mat(0, 0), a}).rows() == 2);
}
