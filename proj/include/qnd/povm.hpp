#pragma once

// Finite-resolution generalized measurement of a Hermitian observable A:
//
//   P(a_m) = (2 pi delta^2)^(-1/4) exp(-(A - a_m)^2 / (4 delta^2))
//
// with outcome density <psi|P^2|psi>, conditioned state P|psi>/sqrt(density)
// and the completeness relation  int P^2 da_m = 1.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnd/fock.hpp"

namespace qnd {

// Densities at or below this value mark an outcome whose conditioned state is
// numerically undefined.
inline constexpr double kDensityFloor = 1e-300;

// Grids must extend this many resolution widths past the spectrum.
inline constexpr double kCoverageMargin = 6.0;

class Resolution {
public:
    // Throws InvalidResolution unless value is finite and > 0.
    explicit Resolution(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

// Uniform outcome axis lo, lo+step, ..., up to hi. Integrals use the
// trapezoid rule over [lo, last()].
class OutcomeGrid {
public:
    // Throws InvalidParameter unless lo < hi, step > 0 and the grid has at
    // least three points.
    OutcomeGrid(double lo, double hi, double step);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double step() const noexcept { return step_; }
    std::size_t size() const noexcept { return n_; }
    double point(std::size_t i) const noexcept { return lo_ + static_cast<double>(i) * step_; }
    double last() const noexcept { return point(n_ - 1); }
    std::vector<double> points() const;

    double trapezoid(std::span<const double> values) const;
    Complex trapezoid(std::span<const Complex> values) const;

    // Same span, half the step.
    OutcomeGrid refined() const { return OutcomeGrid(lo_, hi_, step_ / 2.0); }

private:
    double lo_;
    double hi_;
    double step_;
    std::size_t n_;
};

struct MeasurementOutcome {
    double a_m;
    double density;
    FockState conditioned;
};

// Returned as a Hermitian-flagged operator. Throws NotHermitian for a
// non-Hermitian observable.
FockOperator measurement_operator(const Observable& observable, double a_m, Resolution delta);
FockOperator measurement_operator(const FockOperator& observable, double a_m, Resolution delta);

// P(a_m)|psi>, unnormalized.
Vector apply_measurement(const FockState& state, const Observable& observable, double a_m,
                         Resolution delta);

double outcome_density(const FockState& state, const Observable& observable, double a_m,
                       Resolution delta);
double outcome_density(const FockState& state, const FockOperator& observable, double a_m,
                       Resolution delta);

// Throws VanishingDensity when the density is at or below kDensityFloor.
MeasurementOutcome condition_state(const FockState& state, const Observable& observable, double a_m,
                                   Resolution delta);
MeasurementOutcome condition_state(const FockState& state, const FockOperator& observable,
                                   double a_m, Resolution delta);

// <psi|P T P|psi> / <psi|P^2|psi>
Complex post_expectation(const FockState& state, const Observable& observable, double a_m,
                         Resolution delta, const FockOperator& target);
Complex post_expectation(const FockState& state, const FockOperator& observable, double a_m,
                         Resolution delta, const FockOperator& target);

// <psi|P T P|psi>, i.e. density times post_expectation. Defined for every
// outcome, including those below the density floor; this is the integrand of
// outcome-averaged post-measurement expectations.
Complex sandwiched_expectation(const FockState& state, const Observable& observable, double a_m,
                               Resolution delta, const FockOperator& target);

// Spectral-norm deviation of the trapezoid-integrated P^2 from the identity.
// Throws GridCoverage unless the grid spans the spectrum with a margin of
// kCoverageMargin * delta on each side and step <= delta / 5.
double completeness_check(const Observable& observable, const OutcomeGrid& grid, Resolution delta);
double completeness_check(const FockOperator& observable, const OutcomeGrid& grid, Resolution delta);

// Default grids.
//   spectrum_grid:   [min eigenvalue - 8 delta, max eigenvalue + 8 delta], step min(delta/10, 0.05)
//   number_grid:     [-8 delta, q + 8 delta] where q is the Poisson(mean) 1e-12
//                    upper quantile, step min(delta/10, 0.05)
//   quadrature_grid: +-9 sqrt(1/4 + delta^2) around 0, step delta/20
OutcomeGrid spectrum_grid(const Observable& observable, Resolution delta);
OutcomeGrid number_grid(double mean_photons, Resolution delta);
OutcomeGrid quadrature_grid(Resolution delta);

// Set when delta is small enough that the truncated eigenbasis, rather than
// the measurement itself, dominates the error (delta < 1e-3 on a
// non-diagonal observable).
std::optional<std::string> resolution_warning(const Observable& observable, Resolution delta);

}  // namespace qnd
