#include "qnd/meter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qnd {

namespace {

constexpr double kPointerMargin = 3.0;  // six vacuum widths of x_M
constexpr std::size_t kBlock = 256;

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

struct Support {
    std::vector<Eigen::Index> components;
    double max_abs_eigenvalue = 0.0;
};

// Smallest set of eigencomponents leaving out less than `tail` of the
// state's mass.
Support spectral_support(const Vector& coeffs, const RealVector& eigenvalues, double tail) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(coeffs.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::norm(coeffs(a)) < std::norm(coeffs(b));
    });
    // Drop the lightest components first so tiny tails are summed exactly.
    const double budget = tail * coeffs.squaredNorm();
    double dropped = 0.0;
    Support s;
    for (auto k : order) {
        dropped += std::norm(coeffs(k));
        if (dropped < budget) continue;
        s.components.push_back(k);
        s.max_abs_eigenvalue = std::max(s.max_abs_eigenvalue, std::abs(eigenvalues(k)));
    }
    return s;
}

// exp(-2i shift y_M)|beta0> = D(shift)|beta0> = exp(-i shift Im beta0) |beta0 + shift>
Vector displaced_meter(Complex beta0, double shift, std::size_t dim) {
    Vector v = coherent_amplitudes(beta0 + shift, dim);
    return v * std::polar(1.0, -shift * beta0.imag());
}

void require_unit(double weight_sum, const char* what) {
    if (std::abs(weight_sum - 1.0) > 1e-8) {
        std::ostringstream os;
        os << what << ": outcome weights sum to " << weight_sum;
        throw NumericalValidation(os.str());
    }
}

}  // namespace

// ---------- JointState ----------

JointState::JointState(JointMatrix amplitudes, double pointer_origin)
    : amps_(std::move(amplitudes)), origin_(pointer_origin) {
    if (amps_.rows() < 2 || amps_.cols() < 2) throw InvalidDimension("joint state dims must be >= 2");
    const double n = amps_.norm();
    if (!(std::abs(n - 1.0) <= 1e-10)) {
        std::ostringstream os;
        os << "joint state norm " << n << " is not 1";
        throw InvalidParameter(os.str());
    }
}

Matrix JointState::reduced_signal() const { return amps_ * amps_.adjoint(); }

// ---------- QuadratureBasis ----------

QuadratureBasis::QuadratureBasis(std::size_t dim) {
    if (dim < 2) throw InvalidDimension("quadrature basis needs dim >= 2");
    RealVector diag = RealVector::Zero(idx(dim));
    RealVector sub(idx(dim - 1));
    for (std::size_t n = 0; n + 1 < dim; ++n) sub(idx(n)) = 0.5 * std::sqrt(static_cast<double>(n + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalValidation("tridiagonal eigensolver failed");
    values_ = es.eigenvalues();
}

RealVector QuadratureBasis::vector(std::size_t j) const {
    const auto d = values_.size();
    const double lambda = values_(idx(j));
    RealVector v(d);
    // Row n of (x - lambda) v = 0: sqrt(n) v[n-1] + sqrt(n+1) v[n+1] = 2 lambda v[n].
    v(0) = 1.0;
    double prev = 0.0;
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const double next = (2.0 * lambda * v(n) - std::sqrt(static_cast<double>(n)) * prev) /
                            std::sqrt(static_cast<double>(n + 1));
        prev = v(n);
        v(n + 1) = next;
        if (std::abs(next) > 1e150) {
            v.head(n + 2) *= 1e-150;
            prev *= 1e-150;
        }
    }
    v.normalize();
    return v;
}

Eigen::MatrixXd QuadratureBasis::block(std::size_t first, std::size_t count) const {
    Eigen::MatrixXd out(values_.size(), idx(count));
    for (std::size_t c = 0; c < count; ++c) out.col(idx(c)) = vector(first + c);
    return out;
}

// ---------- coupling ----------

std::size_t required_meter_dim(const FockState& signal, const Observable& observable,
                               Resolution delta, Complex initial_amplitude, double support_tail) {
    const Vector coeffs = observable.to_eigenbasis(signal.amplitudes());
    const Support s = spectral_support(coeffs, observable.spectrum().values, support_tail);
    const double reach =
        std::abs(initial_amplitude) + s.max_abs_eigenvalue / (2.0 * delta.value()) + kPointerMargin;
    return std::max(kMinMeterDim, coherent_required_dim(reach));
}

JointState couple(const FockState& signal, const Observable& observable, Resolution delta,
                  const MeterConfig& meter) {
    if (signal.dim() != observable.dim()) throw DimensionMismatch("couple: signal/observable dims differ");
    if (meter.dim_m < kMinMeterDim) {
        throw InvalidParameter("meter dimension must be at least " + std::to_string(kMinMeterDim));
    }
    const std::size_t need =
        required_meter_dim(signal, observable, delta, meter.initial_amplitude, meter.support_tail);
    std::size_t dim_m = meter.dim_m;
    if (dim_m < need) {
        if (!meter.auto_raise) {
            throw MeterTruncation("meter dimension " + std::to_string(dim_m) +
                                      " cannot hold the pointer displacements; required " +
                                      std::to_string(need),
                                  need);
        }
        dim_m = need;
    }

    const auto& eig = observable.spectrum();
    const Vector coeffs = observable.to_eigenbasis(signal.amplitudes());
    const auto ds = idx(signal.dim());

    // Row k: c_k * exp(-i a_k y_M / delta)|meter>.
    JointMatrix rows = JointMatrix::Zero(ds, idx(dim_m));
    for (Eigen::Index k = 0; k < ds; ++k) {
        if (coeffs(k) == Complex(0.0, 0.0)) continue;
        const double shift = eig.values(k) / (2.0 * delta.value());
        rows.row(k) = coeffs(k) * displaced_meter(meter.initial_amplitude, shift, dim_m).transpose();
    }
    JointMatrix amps = eig.vectors * rows;
    return JointState(std::move(amps), meter.initial_amplitude.real());
}

JointState couple(const FockState& signal, const FockOperator& observable, Resolution delta,
                  const MeterConfig& meter) {
    if (!observable.is_hermitian()) throw NotHermitian("coupled observable must be Hermitian");
    return couple(signal, Observable(observable), delta, meter);
}

// ---------- readout ----------

namespace {

// Calls visit(j, eigenvalue, conditional signal vector) for every meter
// quadrature eigenvector j, where the conditional vector is amps * v_j.
template <typename Visit>
void project_meter(const JointMatrix& amps, const QuadratureBasis& basis, Visit&& visit) {
    const Eigen::MatrixXd re = amps.real();
    const Eigen::MatrixXd im = amps.imag();
    const std::size_t d = basis.dim();
    for (std::size_t first = 0; first < d; first += kBlock) {
        const std::size_t count = std::min(kBlock, d - first);
        const Eigen::MatrixXd vb = basis.block(first, count);
        const Eigen::MatrixXd pr = re * vb;
        const Eigen::MatrixXd pi = im * vb;
        for (std::size_t c = 0; c < count; ++c) {
            Vector phi(pr.rows());
            phi.real() = pr.col(idx(c));
            phi.imag() = pi.col(idx(c));
            visit(first + c, basis.values()(idx(first + c)), std::move(phi));
        }
    }
}

}  // namespace

std::vector<ReadoutResult> readout_pointer(const JointState& joint, Resolution delta) {
    const QuadratureBasis basis(joint.dim_m());
    std::vector<ReadoutResult> out;
    out.reserve(basis.dim());
    double total = 0.0;
    project_meter(joint.amplitudes(), basis, [&](std::size_t, double x, Vector phi) {
        const double w = phi.squaredNorm();
        total += w;
        if (!(w > kDensityFloor)) return;
        out.push_back(ReadoutResult{x, 2.0 * delta.value() * (x - joint.pointer_origin()), w,
                                    FockState(std::move(phi))});
    });
    require_unit(total, "pointer readout");
    return out;
}

std::vector<NoiseReadout> readout_noise(const JointState& joint, Resolution delta,
                                        const FockState& signal_in, const Observable& observable) {
    if (signal_in.dim() != joint.dim_s() || observable.dim() != joint.dim_s()) {
        throw DimensionMismatch("readout_noise: signal/observable dims do not match the joint state");
    }
    // y = U x U^dag with U = diag(i^n), so <y_j| = <x_j| U^dag and the meter
    // columns pick up a factor (-i)^n.
    JointMatrix rotated = joint.amplitudes();
    const Complex phases[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    for (Eigen::Index n = 0; n < rotated.cols(); ++n) rotated.col(n) *= phases[n % 4];

    const QuadratureBasis basis(joint.dim_m());
    std::vector<NoiseReadout> out;
    out.reserve(basis.dim());
    double total = 0.0;
    project_meter(rotated, basis, [&](std::size_t, double y, Vector phi) {
        const double w = phi.squaredNorm();
        total += w;
        if (!(w > kDensityFloor)) return;
        FockState cond(std::move(phi));
        const double scale = y / delta.value();
        const Vector predicted = observable.apply_function(
            signal_in.amplitudes(), [scale](double a) { return std::polar(1.0, -scale * a); });
        const double overlap = std::abs(cond.amplitudes().dot(predicted));
        out.push_back(NoiseReadout{y, w, std::move(cond), overlap});
    });
    require_unit(total, "noise readout");
    return out;
}

std::vector<NoiseReadout> readout_noise(const JointState& joint, Resolution delta,
                                        const FockState& signal_in, const FockOperator& observable) {
    if (!observable.is_hermitian()) throw NotHermitian("observable must be Hermitian");
    return readout_noise(joint, delta, signal_in, Observable(observable));
}

}  // namespace qnd

namespace qnd {

namespace {

// Composite Simpson over [a, b] with 16 panels.
template <typename F>
double simpson(F&& f, double a, double b) {
    constexpr int kPanels = 16;
    const double h = (b - a) / kPanels;
    double s = f(a) + f(b);
    for (int i = 1; i < kPanels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

RealVector eigen_distribution(const Observable& observable, const Vector& v) {
    return observable.to_eigenbasis(v).cwiseAbs2();
}

}  // namespace

PointerEquivalence check_pointer_equivalence(const FockState& signal, const Observable& observable,
                                             Resolution delta, const MeterConfig& meter) {
    const JointState joint = couple(signal, observable, delta, meter);
    const auto results = readout_pointer(joint, delta);
    const QuadratureBasis basis(joint.dim_m());
    const RealVector& x = basis.values();
    const auto d = x.size();
    const double gain = 2.0 * delta.value();
    const double origin = joint.pointer_origin();

    // Cell edges around every pointer eigenvalue, in inferred units.
    std::vector<double> edges(static_cast<std::size_t>(d) + 1);
    edges.front() = gain * (x(0) - 0.5 * (x(1) - x(0)) - origin);
    edges.back() = gain * (x(d - 1) + 0.5 * (x(d - 1) - x(d - 2)) - origin);
    for (Eigen::Index j = 1; j < d; ++j) edges[static_cast<std::size_t>(j)] = gain * (0.5 * (x(j - 1) + x(j)) - origin);

    std::vector<double> weight(static_cast<std::size_t>(d), 0.0);
    for (const auto& r : results) {
        const auto it = std::lower_bound(x.data(), x.data() + d, r.pointer_value - 1e-12);
        weight[static_cast<std::size_t>(it - x.data())] = r.weight;
    }
    auto density = [&](double a) { return outcome_density(signal, observable, a, delta); };
    double tv = 0.0;
    for (std::size_t j = 0; j < weight.size(); ++j) {
        const double cell = simpson(density, edges[j], edges[j + 1]);
        tv += std::abs(cell - weight[j]);
    }

    PointerEquivalence out{joint.dim_m(), 0, 1.0, 0.5 * tv};
    double cumulative = 0.0;
    for (const auto& r : results) {
        const double before = cumulative;
        cumulative += r.weight;
        if (before < 0.005 || cumulative > 0.995) continue;
        const auto reference = condition_state(signal, observable, r.inferred_a_m, delta);
        out.min_overlap = std::min(out.min_overlap, std::abs(reference.conditioned.overlap(r.signal_state)));
        ++out.outcomes_checked;
    }
    return out;
}

NoiseChannelCheck check_noise_channel(std::span<const FockState> signals, const Observable& observable,
                                      Resolution delta, const MeterConfig& meter) {
    if (signals.empty()) throw InvalidParameter("noise channel check needs at least one signal");
    MeterConfig common = meter;
    common.support_tail = std::min(meter.support_tail, kNoiseSupportTail);
    for (const auto& s : signals) {
        common.dim_m = std::max(common.dim_m, required_meter_dim(s, observable, delta, meter.initial_amplitude,
                                                                 common.support_tail));
    }
    if (!meter.auto_raise && common.dim_m > meter.dim_m) {
        throw MeterTruncation("meter dimension too small for the noise channel check", common.dim_m);
    }
    common.auto_raise = false;

    NoiseChannelCheck out{common.dim_m, 1.0, 0.0, 0.0};
    std::vector<double> first_weights;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        const JointState joint = couple(signals[i], observable, delta, common);
        const auto results = readout_noise(joint, delta, signals[i], observable);
        const RealVector input = eigen_distribution(observable, signals[i].amplitudes());
        // Keep every outcome's weight (zeros for the dropped ones) so the
        // signals are compared node by node.
        const QuadratureBasis basis(joint.dim_m());
        std::vector<double> weights(basis.dim(), 0.0);
        double before = 0.0;
        for (const auto& r : results) {
            const double after_mass = before + r.weight;
            // Far-tail outcomes resolve the meter wavefunction below the
            // truncation error of the displaced meter states.
            if (before >= 0.5 * kNoiseMassTail && after_mass <= 1.0 - 0.5 * kNoiseMassTail) {
                out.min_unitary_overlap = std::min(out.min_unitary_overlap, r.predicted_unitary_overlap);
                const RealVector after = eigen_distribution(observable, r.signal_state.amplitudes());
                out.max_distribution_change =
                    std::max(out.max_distribution_change, (after - input).cwiseAbs().maxCoeff());
            }
            before = after_mass;
            const auto* v = basis.values().data();
            const auto it = std::lower_bound(v, v + basis.dim(), r.noise_value - 1e-12);
            weights[static_cast<std::size_t>(it - v)] = r.weight;
        }
        if (i == 0) {
            first_weights = std::move(weights);
            continue;
        }
        double tv = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) tv += std::abs(weights[j] - first_weights[j]);
        out.max_weight_variation = std::max(out.max_weight_variation, 0.5 * tv);
    }
    return out;
}

}  // namespace qnd
