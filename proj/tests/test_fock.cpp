#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qnd/fock.hpp"

using namespace qnd;

namespace {

Vector random_unit(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(static_cast<Eigen::Index>(dim));
    for (auto& c : v) c = Complex(g(rng), g(rng));
    return v.normalized();
}

// Interior block that excludes the last basis row and column.
Matrix interior(const Matrix& m) { return m.topLeftCorner(m.rows() - 1, m.cols() - 1); }

}  // namespace

TEST(Fock, VacuumHasZeroPhotons) {
    const FockState v = make_vacuum(8);
    EXPECT_EQ(expectation(v, op_number(8)), Complex(0.0, 0.0));
    EXPECT_DOUBLE_EQ(v.norm(), 1.0);
    EXPECT_EQ(v[0], Complex(1.0, 0.0));
}

TEST(Fock, DimensionOneRejected) {
    EXPECT_THROW(make_vacuum(1), InvalidDimension);
    EXPECT_THROW(op_x(1), InvalidDimension);
    EXPECT_THROW(make_number_state(4, 4), InvalidParameter);
}

TEST(Fock, CoherentZeroIsVacuum) {
    const FockState c = make_coherent(0.0, 8);
    EXPECT_NEAR(std::abs(c.overlap(make_vacuum(8))), 1.0, 1e-15);
}

TEST(Fock, CoherentMeanPhotonNumber) {
    // Direct Poisson sum over the truncated support.
    double num = 0.0, den = 0.0;
    for (int n = 0; n < 64; ++n) {
        const double w = std::exp(-9.0 + n * std::log(9.0) - std::lgamma(n + 1.0));
        num += n * w;
        den += w;
    }
    const FockState c = make_coherent(3.0, 64);
    EXPECT_NEAR(expectation(c, op_number(64)).real(), num / den, 1e-12);
    EXPECT_NEAR(expectation(c, op_number(64)).real(), 9.0, 1e-9);
}

TEST(Fock, CoherentIsAnnihilationEigenstate) {
    const FockState c = make_coherent(3.0, 64);
    const Complex a = expectation(c, op_annihilate(64));
    EXPECT_NEAR(a.real(), 3.0, 1e-9);
    EXPECT_NEAR(a.imag(), 0.0, 1e-12);

    const Complex alpha(1.5, -2.0);
    const FockState d = make_coherent(alpha, default_coherent_dim(alpha));
    EXPECT_NEAR(std::abs(expectation(d, op_annihilate(d.dim())) - alpha), 0.0, 1e-9);
}

TEST(Fock, CoherentTruncationTooSmall) {
    try {
        make_coherent(3.0, 12);
        FAIL() << "expected TruncationTooSmall";
    } catch (const TruncationTooSmall& e) {
        EXPECT_GT(e.required_dim(), 12u);
        EXPECT_NO_THROW(make_coherent(3.0, e.required_dim()));
        EXPECT_THROW(make_coherent(3.0, e.required_dim() - 1), TruncationTooSmall);
    }
    // Poisson(9) tail beyond n = 11.
    EXPECT_NEAR(poisson_upper_tail(9.0, 12), 0.19699, 1e-5);
}

TEST(Fock, CoherentNormAcrossAmplitudes) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 40; ++i) {
        const Complex alpha(u(rng) / std::sqrt(2.0), u(rng) / std::sqrt(2.0));
        const FockState c = make_coherent(alpha, default_coherent_dim(alpha));
        EXPECT_NEAR(c.norm(), 1.0, 1e-12);
    }
}

TEST(Fock, VacuumQuadratureNoise) {
    for (std::size_t dim : {2u, 3u, 16u, 128u}) {
        const FockState v = make_vacuum(dim);
        const Matrix x = op_x(dim).matrix();
        EXPECT_NEAR(v.amplitudes().dot(x * x * v.amplitudes()).real(), 0.25, 1e-12);
        EXPECT_NEAR(std::abs(expectation(v, op_x(dim))), 0.0, 1e-15);
    }
    EXPECT_NEAR(op_x(8).matrix()(1, 0).real(), 0.5, 1e-12);
}

TEST(Fock, NumberIdentityOnInterior) {
    for (std::size_t dim : {2u, 5u, 64u}) {
        const Matrix x = op_x(dim).matrix();
        const Matrix y = op_y(dim).matrix();
        const Matrix n = op_number(dim).matrix();
        const Matrix r = x * x + y * y - n - 0.5 * Matrix::Identity(n.rows(), n.cols());
        EXPECT_LT(interior(r).norm(), 1e-10);
    }
}

TEST(Fock, CommutatorsOnInterior) {
    for (std::size_t dim : {2u, 7u, 64u, 200u}) {
        const Matrix a = op_annihilate(dim).matrix();
        const Matrix ad = op_create(dim).matrix();
        const Matrix id = Matrix::Identity(a.rows(), a.cols());
        EXPECT_LT(interior(a * ad - ad * a - id).norm(), 1e-10);
        const Matrix x = op_x(dim).matrix();
        const Matrix y = op_y(dim).matrix();
        EXPECT_LT(interior(x * y - y * x - Complex(0.0, 0.5) * id).norm(), 1e-10);
    }
}

TEST(Fock, OperatorFlags) {
    EXPECT_TRUE(op_number(4).is_hermitian());
    EXPECT_TRUE(op_number(4).is_diagonal());
    EXPECT_FALSE(op_annihilate(4).is_hermitian());
    EXPECT_FALSE(op_x(4).is_diagonal());
    Matrix m = Matrix::Zero(3, 3);
    m(0, 1) = 1.0;
    EXPECT_THROW(FockOperator(m, true), NotHermitian);
    EXPECT_THROW(eigh(op_annihilate(4)), NotHermitian);
}

TEST(Fock, ExpectationDimensionMismatch) {
    EXPECT_THROW(expectation(make_vacuum(4), op_number(5)), DimensionMismatch);
}

TEST(Fock, EighNumberIsExact) {
    const auto e = eigh(op_number(8));
    for (int i = 0; i < 8; ++i) EXPECT_EQ(e.values(i), static_cast<double>(i));
}

TEST(Fock, EighQuadratureSymmetricSpectrum) {
    const auto e = eigh(op_x(64));
    for (Eigen::Index i = 0; i < 64; ++i) EXPECT_NEAR(e.values(i), -e.values(63 - i), 1e-10);
    for (Eigen::Index i = 1; i < 64; ++i) EXPECT_LT(e.values(i - 1), e.values(i));
}

TEST(Fock, EighReconstruction) {
    const FockOperator x = op_x(128);
    const auto e = eigh(x);
    const double scale = e.values.cwiseAbs().maxCoeff();
    EXPECT_LT((e.reconstruct() - x.matrix()).norm() / scale, 1e-10);
    const Matrix g = e.vectors.adjoint() * e.vectors;
    EXPECT_LT((g - Matrix::Identity(128, 128)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fock, EighComplexHermitian) {
    const FockOperator y = op_y(32);
    const auto e = eigh(y);
    EXPECT_LT((e.reconstruct() - y.matrix()).norm(), 1e-10);
    // y is unitarily equivalent to x.
    const auto ex = eigh(op_x(32));
    EXPECT_LT((e.values - ex.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fock, EighRoundTripOnRandomVectors) {
    std::mt19937_64 rng(42);
    for (const FockOperator& op : {op_x(64), op_y(64), op_number(64)}) {
        const Observable obs(op);
        for (int i = 0; i < 100; ++i) {
            const Vector v = random_unit(64, rng);
            const Vector direct = op.apply(v);
            const Vector via = obs.apply_function(v, [](double a) { return a; });
            EXPECT_LT((direct - via).norm(), 1e-9);
        }
    }
}

TEST(Fock, ObservableFunctionMatrix) {
    const Observable x(op_x(16));
    const Matrix sq = x.function_matrix([](double a) { return a * a; });
    const Matrix m = op_x(16).matrix();
    EXPECT_LT((sq - m * m).norm(), 1e-10);
    const Observable n(op_number(6));
    const Matrix e = n.function_matrix([](double a) { return std::exp(-a); });
    for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(e(i, i).real(), std::exp(-i));
}
