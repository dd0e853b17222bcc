#pragma once

// The two measurement experiments on a single mode:
//
//  * photon-number QND on a coherent state |alpha>: outcome statistics P(n_m),
//    post-measurement coherence <a>_f(n_m), and the correlation between the
//    quantization Q = cos(2 pi n_m) and <a>_f;
//  * quadrature QND on the vacuum: outcome statistics P(x_m), the quantum
//    jump density P_1(x_m) = |<1|P(x_m)|0>|^2 and the covariance between
//    x_m^2 and <n>_f.
//
// Every quantity is available in closed form and through the matrix path of
// povm.hpp; the reports carry both.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qnd/fock.hpp"
#include "qnd/povm.hpp"

namespace qnd {

// Closed-form sums over n require the Poisson tail beyond the truncation to be
// below this.
inline constexpr double kClosedFormTail = 1e-12;
inline constexpr std::size_t kQuadratureDim = 128;

struct PhotonNumberQndParams {
    Complex alpha;
    Resolution delta_n;
    OutcomeGrid grid;
    std::size_t dim;

    // Grid defaults to number_grid(|alpha|^2, delta_n), dim to
    // default_coherent_dim(alpha).
    static PhotonNumberQndParams make(Complex alpha, Resolution delta_n,
                                      std::optional<OutcomeGrid> grid = std::nullopt,
                                      std::optional<std::size_t> dim = std::nullopt);
};

struct QuadratureQndParams {
    Resolution delta_x;
    OutcomeGrid grid;
    std::size_t dim;

    // Grid defaults to quadrature_grid(delta_x), dim to kQuadratureDim.
    static QuadratureQndParams make(Resolution delta_x, std::optional<OutcomeGrid> grid = std::nullopt,
                                    std::optional<std::size_t> dim = std::nullopt);
};

struct CorrelationReport {
    Complex closed_form;
    Complex numeric;
    double abs_error;
    OutcomeGrid grid;
    std::size_t dim;
};

struct CurveSample {
    double a_m;
    double density;
    Complex post_value;
};

enum class Path { closed_form, matrix };

// ---------- phase randomization ----------

// exp(-1/(8 delta_n^2))
double dephasing_factor(Resolution delta_n);
// 1/(2 delta_n)
double phase_noise(Resolution delta_n);

// ---------- photon-number measurement of |alpha> ----------

// Throws TruncationTooSmall when the Poisson tail beyond params.dim is not
// below kClosedFormTail.
double pn_outcome_density(const PhotonNumberQndParams& params, double n_m);
// <a>_f(n_m); throws VanishingDensity below the density floor.
Complex pn_post_coherence(const PhotonNumberQndParams& params, double n_m);

// cos(2 pi n_m)
double quantization(double n_m);

// -2 exp(-2 pi^2 delta_n^2) exp(-1/(8 delta_n^2)) alpha
Complex quantization_coherence_closed_form(Complex alpha, Resolution delta_n);

// Covariance E[Q <a>_f] - E[Q] E[<a>_f] over P(n_m), integrated on
// params.grid through the matrix path. Throws GridCoverage when the grid
// holds less than 1 - 1e-9 of the outcome mass.
CorrelationReport quantization_coherence_correlation(const PhotonNumberQndParams& params);

struct SweepResult {
    std::vector<double> delta_n;
    std::vector<CorrelationReport> reports;
    // Maximizer of |closed form| on [min delta_n, max delta_n].
    double argmax_delta_n;
};

// Each entry uses PhotonNumberQndParams::make defaults.
SweepResult correlation_sweep(Complex alpha, std::span<const double> delta_n_list);

// (16 pi^2)^(-1/4), where |C|/alpha peaks.
double correlation_peak_resolution();

// Samples of P(n_m) and <a>_f(n_m) over params.grid. Outcomes below the
// density floor carry a NaN post value.
std::vector<CurveSample> photon_number_curve(const PhotonNumberQndParams& params, Path path);

// ---------- quadrature measurement of the vacuum ----------

// sqrt(2/(pi(1+4 dx^2))) exp(-2 x_m^2/(1+4 dx^2))
double vac_outcome_density(const QuadratureQndParams& params, double x_m);
// (2 pi dx^2)^(-1/2) 32 dx^2/(1+8 dx^2)^3 x_m^2 exp(-4 x_m^2/(1+8 dx^2))
double jump_joint_density(const QuadratureQndParams& params, double x_m);
// sqrt(2) dx / (1+8 dx^2)^(3/2)
double jump_total_probability_closed_form(Resolution delta_x);
// +-sqrt(1+8 dx^2)/2
double jump_peak_position(Resolution delta_x);

// Numeric side: quadrature of the matrix-path P_1 on params.grid.
CorrelationReport jump_total_probability(const QuadratureQndParams& params);

struct FieldJumpReport {
    // Covariance int P x^2 <n>_f - (int P x^2)(int P <n>_f) against 1/8.
    CorrelationReport covariance;
    // int <0|P n P|0> x_m^2 dx_m, the integral without the mean product, and
    // its closed form 3/16 + 1/(64 dx^2).
    double unsubtracted;
    double unsubtracted_closed_form;
    // Outcome-averaged photon number after the measurement and 1/(16 dx^2).
    double mean_photons;
    double mean_photons_closed_form;
};

// Throws TruncationTooSmall for dim < kQuadratureDim and GridCoverage when
// the grid holds less than 1 - 1e-9 of the outcome mass.
FieldJumpReport field_jump_correlation(const QuadratureQndParams& params);

// (1/4)<0|x^2 n + 2 x n x + n x^2|0> - <0|x^2|0><0|n|0> from the operator
// matrices.
double operator_side_correlation(std::size_t dim);

// P(x_m) as density and P_1(x_m) as post value, over params.grid.
std::vector<CurveSample> quadrature_curve(const QuadratureQndParams& params, Path path);

}  // namespace qnd
