#pragma once

// Truncated single-mode Fock space: states, ladder/quadrature operators,
// expectations and Hermitian eigendecomposition.
//
// Quadrature convention: x = (a + a^dag)/2, y = (a - a^dag)/(2i), so that
// n + 1/2 = x^2 + y^2 and the vacuum variance of x is 1/4.

#include <complex>
#include <cstddef>
#include <utility>

#include <Eigen/Dense>

#include "qnd/errors.hpp"

namespace qnd {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kCoherentTailTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-12;

class FockState {
public:
    // Normalizes the amplitudes. Throws InvalidDimension when fewer than two
    // basis states are given and InvalidParameter for a zero or non-finite norm.
    explicit FockState(Vector amplitudes);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
    const Vector& amplitudes() const noexcept { return amps_; }
    Complex operator[](std::size_t n) const { return amps_(static_cast<Eigen::Index>(n)); }

    double norm() const { return amps_.norm(); }

    // <this|other>
    Complex overlap(const FockState& other) const;

private:
    Vector amps_;
};

class FockOperator {
public:
    // A Hermitian-flagged operator is checked entrywise against its adjoint
    // (tolerance kHermitianTolerance) and throws NotHermitian on failure.
    FockOperator(Matrix entries, bool hermitian);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }
    bool is_hermitian() const noexcept { return hermitian_; }
    // True when every off-diagonal entry is exactly zero.
    bool is_diagonal() const noexcept { return diagonal_; }

    Vector apply(const Vector& v) const;

private:
    Matrix m_;
    bool hermitian_;
    bool diagonal_;
};

struct EigenDecomposition {
    RealVector values;  // ascending
    Matrix vectors;     // orthonormal columns

    Matrix reconstruct() const;
};

// Smallest truncation N with Poisson(mean) mass at n >= N below tail_tol.
std::size_t coherent_required_dim(double abs_alpha, double tail_tol = kCoherentTailTolerance);

// max(64, ceil(|alpha|^2 + 8|alpha| + 20))
std::size_t default_coherent_dim(Complex alpha);

// P(N >= n) for N ~ Poisson(mean).
double poisson_upper_tail(double mean, std::size_t n);

// Coherent amplitudes on n < dim, renormalized after truncation, without any
// tail check. Evaluated in log space so large |alpha| does not overflow.
Vector coherent_amplitudes(Complex alpha, std::size_t dim);

FockState make_vacuum(std::size_t dim);
FockState make_number_state(std::size_t n, std::size_t dim);
// Throws TruncationTooSmall (with the required dimension) when the Poisson
// tail beyond dim-1 is not below kCoherentTailTolerance.
FockState make_coherent(Complex alpha, std::size_t dim);

FockOperator op_identity(std::size_t dim);
FockOperator op_number(std::size_t dim);
FockOperator op_annihilate(std::size_t dim);
FockOperator op_create(std::size_t dim);
FockOperator op_x(std::size_t dim);
FockOperator op_y(std::size_t dim);

Complex expectation(const FockState& state, const FockOperator& op);

// Throws NotHermitian unless op is Hermitian-flagged.
EigenDecomposition eigh(const FockOperator& op);

// A Hermitian operator together with its eigendecomposition, computed once.
// Functions f(op) are applied through the spectrum; diagonal operators skip
// the basis change entirely.
class Observable {
public:
    explicit Observable(FockOperator op);

    const FockOperator& op() const noexcept { return op_; }
    std::size_t dim() const noexcept { return op_.dim(); }
    const EigenDecomposition& spectrum() const noexcept { return eig_; }
    bool is_diagonal() const noexcept { return op_.is_diagonal(); }

    double min_eigenvalue() const { return eig_.values.minCoeff(); }
    double max_eigenvalue() const { return eig_.values.maxCoeff(); }

    // Coefficients of v in the eigenbasis (V^dag v), and back.
    Vector to_eigenbasis(const Vector& v) const;
    Vector from_eigenbasis(const Vector& c) const;

    // f(op) v, with f: double -> Complex (or double).
    template <typename F>
    Vector apply_function(const Vector& v, F&& f) const;

    template <typename F>
    Matrix function_matrix(F&& f) const;

private:
    FockOperator op_;
    EigenDecomposition eig_;
};

template <typename F>
Vector Observable::apply_function(const Vector& v, F&& f) const {
    if (static_cast<std::size_t>(v.size()) != dim()) {
        throw DimensionMismatch("state dimension does not match observable");
    }
    if (is_diagonal()) {
        Vector out(v.size());
        const auto& m = op_.matrix();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            out(i) = Complex(f(m(i, i).real())) * v(i);
        }
        return out;
    }
    Vector c = to_eigenbasis(v);
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        c(k) *= Complex(f(eig_.values(k)));
    }
    return from_eigenbasis(c);
}

template <typename F>
Matrix Observable::function_matrix(F&& f) const {
    const auto n = static_cast<Eigen::Index>(dim());
    Vector diag(n);
    if (is_diagonal()) {
        const auto& m = op_.matrix();
        for (Eigen::Index i = 0; i < n; ++i) diag(i) = Complex(f(m(i, i).real()));
        return Matrix(diag.asDiagonal());
    }
    for (Eigen::Index k = 0; k < n; ++k) diag(k) = Complex(f(eig_.values(k)));
    return eig_.vectors * diag.asDiagonal() * eig_.vectors.adjoint();
}

}  // namespace qnd
