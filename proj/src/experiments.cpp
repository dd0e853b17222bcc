#include "qnd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

namespace qnd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMassCoverage = 1e-9;

// log of e^{-|alpha|^2} |alpha|^{2n} / n! for the terms that matter in double
// precision: stops once past the mode and below 1e-16 of the largest weight.
std::vector<double> poisson_log_weights(Complex alpha, std::size_t dim) {
    const double mean = std::norm(alpha);
    if (mean == 0.0) return {0.0};
    const double log_mean = std::log(mean);
    std::vector<double> out;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < dim; ++n) {
        const double nd = static_cast<double>(n);
        const double lw = nd * log_mean - std::lgamma(nd + 1.0) - mean;
        top = std::max(top, lw);
        if (nd > mean && lw < top + std::log(1e-16)) break;
        out.push_back(lw);
    }
    return out;
}

double log_sum_exp(const std::vector<double>& terms) {
    const double top = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(top)) return top;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - top);
    return top + std::log(s);
}

void require_closed_form_truncation(const PhotonNumberQndParams& p) {
    const double tail = poisson_upper_tail(std::norm(p.alpha), p.dim);
    if (tail >= kClosedFormTail) {
        const std::size_t need = coherent_required_dim(std::abs(p.alpha), kClosedFormTail);
        throw TruncationTooSmall("photon-number sums need dim >= " + std::to_string(need), need);
    }
}

// log of sum_n w_n exp(-(n + shift - n_m)^2 / (2 dn^2)) over n with n + shift
// inside the truncation.
double log_gaussian_sum(const std::vector<double>& lw, double shift, double n_m, double dn,
                        std::size_t limit) {
    std::vector<double> terms;
    terms.reserve(lw.size());
    for (std::size_t n = 0; n < lw.size() && n < limit; ++n) {
        const double u = static_cast<double>(n) + shift - n_m;
        terms.push_back(lw[n] - u * u / (2.0 * dn * dn));
    }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    return log_sum_exp(terms);
}

void require_mass(const OutcomeGrid& grid, double mass) {
    if (mass < 1.0 - kMassCoverage) {
        std::ostringstream os;
        os << "grid [" << grid.lo() << ", " << grid.last() << "] holds outcome mass " << mass
           << " < 1 - " << kMassCoverage;
        throw GridCoverage(os.str());
    }
}

}  // namespace

// ---------- parameters ----------

PhotonNumberQndParams PhotonNumberQndParams::make(Complex alpha, Resolution delta_n,
                                                  std::optional<OutcomeGrid> grid,
                                                  std::optional<std::size_t> dim) {
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw InvalidParameter("alpha must be finite");
    }
    const OutcomeGrid g = grid ? *grid : number_grid(std::norm(alpha), delta_n);
    PhotonNumberQndParams p{alpha, delta_n, g, dim ? *dim : default_coherent_dim(alpha)};
    require_closed_form_truncation(p);
    return p;
}

QuadratureQndParams QuadratureQndParams::make(Resolution delta_x, std::optional<OutcomeGrid> grid,
                                              std::optional<std::size_t> dim) {
    const OutcomeGrid g = grid ? *grid : quadrature_grid(delta_x);
    return QuadratureQndParams{delta_x, g, dim ? *dim : kQuadratureDim};
}

// ---------- phase randomization ----------

double dephasing_factor(Resolution delta_n) {
    const double d = delta_n.value();
    return std::exp(-1.0 / (8.0 * d * d));
}

double phase_noise(Resolution delta_n) { return 1.0 / (2.0 * delta_n.value()); }

// ---------- photon-number measurement ----------

double pn_outcome_density(const PhotonNumberQndParams& params, double n_m) {
    require_closed_form_truncation(params);
    const double dn = params.delta_n.value();
    const auto lw = poisson_log_weights(params.alpha, params.dim);
    const double log_sum = log_gaussian_sum(lw, 0.0, n_m, dn, params.dim);
    return std::exp(log_sum) / std::sqrt(2.0 * kPi * dn * dn);
}

Complex pn_post_coherence(const PhotonNumberQndParams& params, double n_m) {
    require_closed_form_truncation(params);
    const double dn = params.delta_n.value();
    const auto lw = poisson_log_weights(params.alpha, params.dim);
    const double log_den = log_gaussian_sum(lw, 0.0, n_m, dn, params.dim);
    const double density = std::exp(log_den) / std::sqrt(2.0 * kPi * dn * dn);
    if (!(density > kDensityFloor)) {
        std::ostringstream os;
        os << "outcome density " << density << " at n_m=" << n_m << " is below the floor";
        throw VanishingDensity(os.str());
    }
    // <n|a|n+1> needs n+1 < dim.
    const double log_num = log_gaussian_sum(lw, 0.5, n_m, dn, params.dim - 1);
    return params.alpha * dephasing_factor(params.delta_n) * std::exp(log_num - log_den);
}

double quantization(double n_m) { return std::cos(2.0 * kPi * n_m); }

Complex quantization_coherence_closed_form(Complex alpha, Resolution delta_n) {
    const double d = delta_n.value();
    return -2.0 * std::exp(-2.0 * kPi * kPi * d * d) * dephasing_factor(delta_n) * alpha;
}

CorrelationReport quantization_coherence_correlation(const PhotonNumberQndParams& params) {
    const FockState coherent = make_coherent(params.alpha, params.dim);
    const Observable number(op_number(params.dim));
    const FockOperator a = op_annihilate(params.dim);
    const OutcomeGrid& grid = params.grid;

    std::vector<double> density(grid.size());
    std::vector<double> q_density(grid.size());
    std::vector<Complex> coherence(grid.size());
    std::vector<Complex> q_coherence(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double n_m = grid.point(i);
        const Vector f = apply_measurement(coherent, number, n_m, params.delta_n);
        const double q = quantization(n_m);
        density[i] = f.squaredNorm();
        q_density[i] = q * density[i];
        coherence[i] = f.dot(a.matrix() * f);  // P(n_m) <a>_f(n_m)
        q_coherence[i] = q * coherence[i];
    }
    require_mass(grid, grid.trapezoid(density));

    const Complex numeric =
        grid.trapezoid(q_coherence) - grid.trapezoid(q_density) * grid.trapezoid(coherence);
    const Complex closed = quantization_coherence_closed_form(params.alpha, params.delta_n);
    return CorrelationReport{closed, numeric, std::abs(closed - numeric), grid, params.dim};
}

double correlation_peak_resolution() { return std::pow(16.0 * kPi * kPi, -0.25); }

SweepResult correlation_sweep(Complex alpha, std::span<const double> delta_n_list) {
    if (delta_n_list.empty()) throw InvalidParameter("correlation sweep needs at least one delta_n");
    SweepResult out;
    out.delta_n.assign(delta_n_list.begin(), delta_n_list.end());
    out.reports.reserve(delta_n_list.size());
    for (double d : delta_n_list) {
        out.reports.push_back(quantization_coherence_correlation(PhotonNumberQndParams::make(alpha, Resolution(d))));
    }

    const auto [lo_it, hi_it] = std::minmax_element(delta_n_list.begin(), delta_n_list.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    auto magnitude = [](double d) {
        return std::exp(-2.0 * kPi * kPi * d * d) * std::exp(-1.0 / (8.0 * d * d));
    };
    if (hi - lo <= 0.0) {
        out.argmax_delta_n = lo;
        return out;
    }
    // Fine scan for the bracket, then Brent on the neighbouring cells.
    constexpr int kScan = 2000;
    const double h = (hi - lo) / kScan;
    int best = 0;
    for (int i = 1; i <= kScan; ++i) {
        if (magnitude(lo + i * h) > magnitude(lo + best * h)) best = i;
    }
    const double a = lo + std::max(0, best - 1) * h;
    const double b = lo + std::min(kScan, best + 1) * h;
    const auto r = boost::math::tools::brent_find_minima([&](double d) { return -magnitude(d); }, a, b,
                                                         std::numeric_limits<double>::digits / 2);
    out.argmax_delta_n = r.first;
    return out;
}

std::vector<CurveSample> photon_number_curve(const PhotonNumberQndParams& params, Path path) {
    const OutcomeGrid& grid = params.grid;
    std::vector<CurveSample> out;
    out.reserve(grid.size());
    if (path == Path::closed_form) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double n_m = grid.point(i);
            const double p = pn_outcome_density(params, n_m);
            Complex coh(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
            if (p > kDensityFloor) coh = pn_post_coherence(params, n_m);
            out.push_back(CurveSample{n_m, p, coh});
        }
        return out;
    }
    const FockState coherent = make_coherent(params.alpha, params.dim);
    const Observable number(op_number(params.dim));
    const FockOperator a = op_annihilate(params.dim);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double n_m = grid.point(i);
        const Vector f = apply_measurement(coherent, number, n_m, params.delta_n);
        const double p = f.squaredNorm();
        Complex coh(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
        if (p > kDensityFloor) coh = f.dot(a.matrix() * f) / p;
        out.push_back(CurveSample{n_m, p, coh});
    }
    return out;
}

// ---------- quadrature measurement ----------

double vac_outcome_density(const QuadratureQndParams& params, double x_m) {
    const double d = params.delta_x.value();
    const double s = 1.0 + 4.0 * d * d;
    return std::sqrt(2.0 / (kPi * s)) * std::exp(-2.0 * x_m * x_m / s);
}

double jump_joint_density(const QuadratureQndParams& params, double x_m) {
    const double d = params.delta_x.value();
    const double s = 1.0 + 8.0 * d * d;
    return 32.0 * d * d / (s * s * s) * x_m * x_m * std::exp(-4.0 * x_m * x_m / s) /
           std::sqrt(2.0 * kPi * d * d);
}

double jump_total_probability_closed_form(Resolution delta_x) {
    const double d = delta_x.value();
    return std::sqrt(2.0) * d / std::pow(1.0 + 8.0 * d * d, 1.5);
}

double jump_peak_position(Resolution delta_x) {
    const double d = delta_x.value();
    return 0.5 * std::sqrt(1.0 + 8.0 * d * d);
}

namespace {

struct VacuumSamples {
    std::vector<double> density;  // <0|P^2|0>
    std::vector<double> jump;     // |<1|P|0>|^2
    std::vector<double> photons;  // <0|P n P|0>
};

VacuumSamples sample_vacuum(const QuadratureQndParams& params) {
    const FockState vacuum = make_vacuum(params.dim);
    const Observable x(op_x(params.dim));
    const OutcomeGrid& grid = params.grid;
    VacuumSamples s;
    s.density.resize(grid.size());
    s.jump.resize(grid.size());
    s.photons.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vector f = apply_measurement(vacuum, x, grid.point(i), params.delta_x);
        double photons = 0.0;
        for (Eigen::Index n = 1; n < f.size(); ++n) photons += static_cast<double>(n) * std::norm(f(n));
        s.density[i] = f.squaredNorm();
        s.jump[i] = std::norm(f(1));
        s.photons[i] = photons;
    }
    return s;
}

}  // namespace

CorrelationReport jump_total_probability(const QuadratureQndParams& params) {
    const VacuumSamples s = sample_vacuum(params);
    require_mass(params.grid, params.grid.trapezoid(s.density));
    const double numeric = params.grid.trapezoid(s.jump);
    const double closed = jump_total_probability_closed_form(params.delta_x);
    return CorrelationReport{closed, numeric, std::abs(closed - numeric), params.grid, params.dim};
}

FieldJumpReport field_jump_correlation(const QuadratureQndParams& params) {
    if (params.dim < kQuadratureDim) {
        throw TruncationTooSmall("quadrature correlations need dim >= " + std::to_string(kQuadratureDim),
                                 kQuadratureDim);
    }
    const VacuumSamples s = sample_vacuum(params);
    const OutcomeGrid& grid = params.grid;
    require_mass(grid, grid.trapezoid(s.density));

    std::vector<double> x2_density(grid.size());
    std::vector<double> x2_photons(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.point(i);
        x2_density[i] = x * x * s.density[i];
        x2_photons[i] = x * x * s.photons[i];
    }
    const double e_x2n = grid.trapezoid(x2_photons);
    const double e_x2 = grid.trapezoid(x2_density);
    const double e_n = grid.trapezoid(s.photons);
    const double numeric = e_x2n - e_x2 * e_n;
    const double d = params.delta_x.value();

    FieldJumpReport r{
        CorrelationReport{0.125, numeric, std::abs(0.125 - numeric), grid, params.dim},
        e_x2n,
        3.0 / 16.0 + 1.0 / (64.0 * d * d),
        e_n,
        1.0 / (16.0 * d * d),
    };
    return r;
}

double operator_side_correlation(std::size_t dim) {
    const FockState vacuum = make_vacuum(dim);
    const Matrix x = op_x(dim).matrix();
    const Matrix n = op_number(dim).matrix();
    const Matrix x2 = x * x;
    const Matrix sym = x2 * n + 2.0 * x * n * x + n * x2;
    const Vector& v = vacuum.amplitudes();
    const double quarter = 0.25 * v.dot(sym * v).real();
    return quarter - v.dot(x2 * v).real() * v.dot(n * v).real();
}

std::vector<CurveSample> quadrature_curve(const QuadratureQndParams& params, Path path) {
    const OutcomeGrid& grid = params.grid;
    std::vector<CurveSample> out;
    out.reserve(grid.size());
    if (path == Path::closed_form) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.point(i);
            out.push_back(CurveSample{x, vac_outcome_density(params, x), jump_joint_density(params, x)});
        }
        return out;
    }
    const VacuumSamples s = sample_vacuum(params);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.push_back(CurveSample{grid.point(i), s.density[i], s.jump[i]});
    }
    return out;
}

}  // namespace qnd
