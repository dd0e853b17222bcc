#include "qnd/povm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qnd {

namespace {

constexpr double kPi = std::numbers::pi;

// (2 pi delta^2)^(-1/4) exp(-(lambda - a_m)^2 / (4 delta^2))
struct Kernel {
    double a_m;
    double delta;
    double prefactor;

    Kernel(double a, Resolution d)
        : a_m(a), delta(d.value()), prefactor(std::pow(2.0 * kPi * d.value() * d.value(), -0.25)) {}

    double operator()(double lambda) const {
        const double u = lambda - a_m;
        return prefactor * std::exp(-u * u / (4.0 * delta * delta));
    }
};

void require_hermitian(const FockOperator& op) {
    if (!op.is_hermitian()) throw NotHermitian("measured observable must be Hermitian");
}

void require_same_dim(const FockState& state, const Observable& obs) {
    if (state.dim() != obs.dim()) {
        throw DimensionMismatch("state dim " + std::to_string(state.dim()) +
                                " does not match observable dim " + std::to_string(obs.dim()));
    }
}

double density_of(const Vector& filtered) {
    const double d = filtered.squaredNorm();
    return d < 0.0 ? 0.0 : d;
}

}  // namespace

Resolution::Resolution(double value) : value_(value) {
    if (!std::isfinite(value) || value <= 0.0) {
        std::ostringstream os;
        os << "resolution must be a finite positive number, got " << value;
        throw InvalidResolution(os.str());
    }
}

// ---------- OutcomeGrid ----------

OutcomeGrid::OutcomeGrid(double lo, double hi, double step) : lo_(lo), hi_(hi), step_(step), n_(0) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw InvalidParameter("outcome grid needs finite lo < hi");
    }
    if (!std::isfinite(step) || !(step > 0.0)) {
        throw InvalidParameter("outcome grid step must be positive");
    }
    // Tolerate representation error when (hi-lo)/step is integral.
    const double count = std::floor((hi - lo) / step + 1e-9);
    if (count + 1.0 < 3.0) throw InvalidParameter("outcome grid needs at least 3 points");
    if (count > 1e8) throw InvalidParameter("outcome grid has more than 1e8 points");
    n_ = static_cast<std::size_t>(count) + 1;
}

std::vector<double> OutcomeGrid::points() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = point(i);
    return out;
}

double OutcomeGrid::trapezoid(std::span<const double> values) const {
    if (values.size() != n_) throw DimensionMismatch("trapezoid: value count does not match grid");
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < n_; ++i) sum += values[i];
    return sum * step_;
}

Complex OutcomeGrid::trapezoid(std::span<const Complex> values) const {
    if (values.size() != n_) throw DimensionMismatch("trapezoid: value count does not match grid");
    Complex sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < n_; ++i) sum += values[i];
    return sum * step_;
}

// ---------- measurement operator ----------

FockOperator measurement_operator(const Observable& observable, double a_m, Resolution delta) {
    const Kernel g(a_m, delta);
    Matrix m = observable.function_matrix(g);
    // Symmetrize away rounding so the Hermitian flag check is exact.
    Matrix h = 0.5 * (m + m.adjoint());
    return FockOperator(std::move(h), true);
}

FockOperator measurement_operator(const FockOperator& observable, double a_m, Resolution delta) {
    require_hermitian(observable);
    return measurement_operator(Observable(observable), a_m, delta);
}

Vector apply_measurement(const FockState& state, const Observable& observable, double a_m,
                         Resolution delta) {
    require_same_dim(state, observable);
    return observable.apply_function(state.amplitudes(), Kernel(a_m, delta));
}

double outcome_density(const FockState& state, const Observable& observable, double a_m,
                       Resolution delta) {
    return density_of(apply_measurement(state, observable, a_m, delta));
}

double outcome_density(const FockState& state, const FockOperator& observable, double a_m,
                       Resolution delta) {
    require_hermitian(observable);
    return outcome_density(state, Observable(observable), a_m, delta);
}

MeasurementOutcome condition_state(const FockState& state, const Observable& observable, double a_m,
                                   Resolution delta) {
    Vector filtered = apply_measurement(state, observable, a_m, delta);
    const double density = density_of(filtered);
    if (!(density > kDensityFloor)) {
        std::ostringstream os;
        os << "outcome density " << density << " at a_m=" << a_m << " is below the floor";
        throw VanishingDensity(os.str());
    }
    return MeasurementOutcome{a_m, density, FockState(std::move(filtered))};
}

MeasurementOutcome condition_state(const FockState& state, const FockOperator& observable,
                                   double a_m, Resolution delta) {
    require_hermitian(observable);
    return condition_state(state, Observable(observable), a_m, delta);
}

Complex sandwiched_expectation(const FockState& state, const Observable& observable, double a_m,
                               Resolution delta, const FockOperator& target) {
    if (target.dim() != observable.dim()) throw DimensionMismatch("target operator dim mismatch");
    const Vector filtered = apply_measurement(state, observable, a_m, delta);
    return filtered.dot(target.matrix() * filtered);
}

Complex post_expectation(const FockState& state, const Observable& observable, double a_m,
                         Resolution delta, const FockOperator& target) {
    if (target.dim() != observable.dim()) throw DimensionMismatch("target operator dim mismatch");
    const Vector filtered = apply_measurement(state, observable, a_m, delta);
    const double density = density_of(filtered);
    if (!(density > kDensityFloor)) {
        std::ostringstream os;
        os << "outcome density " << density << " at a_m=" << a_m << " is below the floor";
        throw VanishingDensity(os.str());
    }
    return filtered.dot(target.matrix() * filtered) / density;
}

Complex post_expectation(const FockState& state, const FockOperator& observable, double a_m,
                         Resolution delta, const FockOperator& target) {
    require_hermitian(observable);
    return post_expectation(state, Observable(observable), a_m, delta, target);
}

// ---------- completeness ----------

double completeness_check(const Observable& observable, const OutcomeGrid& grid, Resolution delta) {
    const double d = delta.value();
    const double need_lo = observable.min_eigenvalue() - kCoverageMargin * d;
    const double need_hi = observable.max_eigenvalue() + kCoverageMargin * d;
    const double slack = 1e-12 * std::max(1.0, std::abs(need_lo) + std::abs(need_hi));
    if (grid.lo() > need_lo + slack || grid.last() < need_hi - slack) {
        std::ostringstream os;
        os << "grid [" << grid.lo() << ", " << grid.last() << "] does not cover the spectrum ["
           << observable.min_eigenvalue() << ", " << observable.max_eigenvalue() << "] with a "
           << kCoverageMargin << "*delta margin";
        throw GridCoverage(os.str());
    }
    if (grid.step() > d / 5.0 * (1.0 + 1e-12)) {
        throw GridCoverage("grid step must not exceed delta/5");
    }

    // P^2 is diagonal in the eigenbasis, so the integrated operator is
    // V diag(s) V^dag and its spectral-norm distance to 1 is max |s_k - 1|.
    const auto& values = observable.spectrum().values;
    std::vector<double> sq(grid.size());
    double worst = 0.0;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double g = Kernel(grid.point(i), delta)(values(k));
            sq[i] = g * g;
        }
        worst = std::max(worst, std::abs(grid.trapezoid(sq) - 1.0));
    }
    return worst;
}

double completeness_check(const FockOperator& observable, const OutcomeGrid& grid, Resolution delta) {
    require_hermitian(observable);
    return completeness_check(Observable(observable), grid, delta);
}

// ---------- default grids ----------

namespace {

double fine_step(Resolution delta) { return std::min(delta.value() / 10.0, 0.05); }

}  // namespace

OutcomeGrid spectrum_grid(const Observable& observable, Resolution delta) {
    const double d = delta.value();
    return OutcomeGrid(observable.min_eigenvalue() - 8.0 * d, observable.max_eigenvalue() + 8.0 * d,
                       fine_step(delta));
}

OutcomeGrid number_grid(double mean_photons, Resolution delta) {
    if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) {
        throw InvalidParameter("mean photon number must be finite and non-negative");
    }
    const double d = delta.value();
    const auto upper = static_cast<double>(coherent_required_dim(std::sqrt(mean_photons), 1e-12));
    return OutcomeGrid(-8.0 * d, upper + 8.0 * d, fine_step(delta));
}

OutcomeGrid quadrature_grid(Resolution delta) {
    const double d = delta.value();
    const double span = 9.0 * std::sqrt(0.25 + d * d);
    return OutcomeGrid(-span, span, d / 20.0);
}

std::optional<std::string> resolution_warning(const Observable& observable, Resolution delta) {
    if (!observable.is_diagonal() && delta.value() < 1e-3) {
        std::ostringstream os;
        os << "resolution " << delta.value()
           << " is below 1e-3: the measurement is near-projective and the truncated eigenbasis of the"
              " observable dominates the numerical error";
        return os.str();
    }
    return std::nullopt;
}

}  // namespace qnd
