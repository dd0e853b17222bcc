#include "qnd/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace qnd {

namespace {

void require_dim(std::size_t dim) {
    if (dim < 2) {
        throw InvalidDimension("Fock truncation must be at least 2, got " + std::to_string(dim));
    }
}

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

bool offdiagonal_is_zero(const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
        }
    }
    return true;
}

double log_poisson_pmf(double mean, std::size_t k) {
    const double kd = static_cast<double>(k);
    return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

}  // namespace

// ---------- FockState ----------

FockState::FockState(Vector amplitudes) : amps_(std::move(amplitudes)) {
    require_dim(dim());
    const double nrm = amps_.norm();
    if (!std::isfinite(nrm) || nrm == 0.0) {
        throw InvalidParameter("state amplitudes have zero or non-finite norm");
    }
    amps_ /= nrm;
}

Complex FockState::overlap(const FockState& other) const {
    if (other.dim() != dim()) throw DimensionMismatch("overlap of states with different truncation");
    return amps_.dot(other.amps_);  // conjugates the left operand
}

// ---------- FockOperator ----------

FockOperator::FockOperator(Matrix entries, bool hermitian)
    : m_(std::move(entries)), hermitian_(hermitian) {
    if (m_.rows() != m_.cols()) throw DimensionMismatch("operator matrix must be square");
    require_dim(dim());
    if (hermitian_) {
        const double dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
        if (!(dev <= kHermitianTolerance)) {
            throw NotHermitian("operator flagged Hermitian deviates from its adjoint by " +
                               std::to_string(dev));
        }
    }
    diagonal_ = offdiagonal_is_zero(m_);
}

Vector FockOperator::apply(const Vector& v) const {
    if (static_cast<std::size_t>(v.size()) != dim()) {
        throw DimensionMismatch("vector dimension does not match operator");
    }
    return m_ * v;
}

Matrix EigenDecomposition::reconstruct() const {
    return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

// ---------- truncation helpers ----------

double poisson_upper_tail(double mean, std::size_t n) {
    if (n == 0) return 1.0;
    if (mean <= 0.0) return 0.0;
    if (static_cast<double>(n) <= mean) {
        double cdf = 0.0;
        for (std::size_t k = 0; k < n; ++k) cdf += std::exp(log_poisson_pmf(mean, k));
        return std::max(0.0, 1.0 - cdf);
    }
    // Terms decrease monotonically past the mode.
    double tail = 0.0;
    for (std::size_t k = n;; ++k) {
        const double term = std::exp(log_poisson_pmf(mean, k));
        tail += term;
        if (term == 0.0 || term < 1e-20 * tail) break;
    }
    return tail;
}

std::size_t coherent_required_dim(double abs_alpha, double tail_tol) {
    const double mean = abs_alpha * abs_alpha;
    auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(mean)));
    while (poisson_upper_tail(mean, n) >= tail_tol) ++n;
    return n;
}

std::size_t default_coherent_dim(Complex alpha) {
    const double r = std::abs(alpha);
    return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(r * r + 8.0 * r + 20.0)));
}

Vector coherent_amplitudes(Complex alpha, std::size_t dim) {
    require_dim(dim);
    Vector v = Vector::Zero(idx(dim));
    const double r = std::abs(alpha);
    if (r == 0.0) {
        v(0) = 1.0;
        return v;
    }
    const double phase = std::arg(alpha);
    const double log_r = std::log(r);
    RealVector logs(idx(dim));
    for (std::size_t n = 0; n < dim; ++n) {
        const double nd = static_cast<double>(n);
        logs(idx(n)) = nd * log_r - 0.5 * std::lgamma(nd + 1.0);
    }
    const double top = logs.maxCoeff();
    for (std::size_t n = 0; n < dim; ++n) {
        v(idx(n)) = std::polar(std::exp(logs(idx(n)) - top), static_cast<double>(n) * phase);
    }
    v /= v.norm();
    return v;
}

// ---------- states ----------

FockState make_vacuum(std::size_t dim) { return make_number_state(0, dim); }

FockState make_number_state(std::size_t n, std::size_t dim) {
    require_dim(dim);
    if (n >= dim) {
        throw TruncationTooSmall("number state |" + std::to_string(n) + "> needs dim > " +
                                     std::to_string(n),
                                 n + 1);
    }
    Vector v = Vector::Zero(idx(dim));
    v(idx(n)) = 1.0;
    return FockState(std::move(v));
}

FockState make_coherent(Complex alpha, std::size_t dim) {
    require_dim(dim);
    const double r = std::abs(alpha);
    if (!std::isfinite(r)) throw InvalidParameter("coherent amplitude must be finite");
    const double tail = poisson_upper_tail(r * r, dim);
    if (tail >= kCoherentTailTolerance) {
        const std::size_t need = coherent_required_dim(r);
        throw TruncationTooSmall("coherent state |alpha|=" + std::to_string(r) + " has tail mass " +
                                     std::to_string(tail) + " beyond dim " + std::to_string(dim) +
                                     "; required dim " + std::to_string(need),
                                 need);
    }
    return FockState(coherent_amplitudes(alpha, dim));
}

// ---------- operators ----------

FockOperator op_identity(std::size_t dim) {
    require_dim(dim);
    return FockOperator(Matrix::Identity(idx(dim), idx(dim)), true);
}

FockOperator op_number(std::size_t dim) {
    require_dim(dim);
    Matrix m = Matrix::Zero(idx(dim), idx(dim));
    for (std::size_t n = 0; n < dim; ++n) m(idx(n), idx(n)) = static_cast<double>(n);
    return FockOperator(std::move(m), true);
}

FockOperator op_annihilate(std::size_t dim) {
    require_dim(dim);
    Matrix m = Matrix::Zero(idx(dim), idx(dim));
    for (std::size_t n = 1; n < dim; ++n) m(idx(n - 1), idx(n)) = std::sqrt(static_cast<double>(n));
    return FockOperator(std::move(m), false);
}

FockOperator op_create(std::size_t dim) {
    return FockOperator(op_annihilate(dim).matrix().adjoint(), false);
}

FockOperator op_x(std::size_t dim) {
    const Matrix a = op_annihilate(dim).matrix();
    return FockOperator(0.5 * (a + a.adjoint()), true);
}

FockOperator op_y(std::size_t dim) {
    const Matrix a = op_annihilate(dim).matrix();
    return FockOperator((a - a.adjoint()) / Complex(0.0, 2.0), true);
}

Complex expectation(const FockState& state, const FockOperator& op) {
    if (state.dim() != op.dim()) throw DimensionMismatch("expectation: state and operator dims differ");
    return state.amplitudes().dot(op.matrix() * state.amplitudes());
}

// ---------- eigendecomposition ----------

EigenDecomposition eigh(const FockOperator& op) {
    if (!op.is_hermitian()) throw NotHermitian("eigh requires a Hermitian-flagged operator");
    const Matrix& m = op.matrix();
    const auto n = m.rows();
    EigenDecomposition out;

    if (op.is_diagonal()) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return m(a, a).real() < m(b, b).real();
        });
        out.values.resize(n);
        out.vectors = Matrix::Zero(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto src = order[static_cast<std::size_t>(k)];
            out.values(k) = m(src, src).real();
            out.vectors(src, k) = 1.0;
        }
        return out;
    }

    if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors().cast<Complex>();
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
    return out;
}

// ---------- Observable ----------

Observable::Observable(FockOperator op) : op_(std::move(op)), eig_(eigh(op_)) {}

Vector Observable::to_eigenbasis(const Vector& v) const { return eig_.vectors.adjoint() * v; }

Vector Observable::from_eigenbasis(const Vector& c) const { return eig_.vectors * c; }

}  // namespace qnd
