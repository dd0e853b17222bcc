#pragma once

// Two-mode model of a QND measurement. The signal is coupled to a meter mode
// by U = exp(-i A_S y_M / delta), which shifts the meter quadrature x_M by
// A_S / (2 delta) and leaves A_S unchanged. Reading out x_M realizes the
// generalized measurement of povm.hpp; reading out y_M only applies a
// random unitary to the signal.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qnd/fock.hpp"
#include "qnd/povm.hpp"

namespace qnd {

using JointMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kMinMeterDim = 16;
inline constexpr std::size_t kDefaultMeterDim = 128;

struct MeterConfig {
    std::size_t dim_m = kDefaultMeterDim;
    Complex initial_amplitude{0.0, 0.0};
    // Grow dim_m until the largest pointer displacement passes the coherent
    // tail check; otherwise couple() throws MeterTruncation.
    bool auto_raise = true;
    // Eigencomponents of the signal outside the set holding all but this
    // much mass do not count towards the required meter truncation.
    double support_tail = 1e-10;
};

// Signal (x) meter amplitudes, signal index major: row s, column m.
class JointState {
public:
    // pointer_origin is the meter's initial <x_M>. Throws InvalidParameter
    // unless the amplitudes have unit norm within 1e-10.
    JointState(JointMatrix amplitudes, double pointer_origin);

    std::size_t dim_s() const noexcept { return static_cast<std::size_t>(amps_.rows()); }
    std::size_t dim_m() const noexcept { return static_cast<std::size_t>(amps_.cols()); }
    const JointMatrix& amplitudes() const noexcept { return amps_; }
    double pointer_origin() const noexcept { return origin_; }
    double norm() const { return amps_.norm(); }

    // Signal density matrix with the meter traced out.
    Matrix reduced_signal() const;

private:
    JointMatrix amps_;
    double origin_;
};

struct ReadoutResult {
    double pointer_value;  // x_M eigenvalue
    double inferred_a_m;   // 2 delta (pointer_value - pointer_origin)
    double weight;
    FockState signal_state;
};

struct NoiseReadout {
    double noise_value;  // y_M eigenvalue
    double weight;
    FockState signal_state;
    // |<signal_state| exp(-i y A / delta) |signal_in>|
    double predicted_unitary_overlap;
};

// Eigenbasis of the truncated quadrature x = (a + a^dag)/2 on `dim` states.
// Eigenvalues come from the tridiagonal eigenvalue solver; each eigenvector
// is generated from its eigenvalue by the Hermite three-term recurrence,
// which keeps large meter truncations at O(dim^2).
class QuadratureBasis {
public:
    explicit QuadratureBasis(std::size_t dim);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.size()); }
    const RealVector& values() const noexcept { return values_; }
    RealVector vector(std::size_t j) const;
    // Columns first .. first+count-1 of the eigenvector matrix.
    Eigen::MatrixXd block(std::size_t first, std::size_t count) const;

private:
    RealVector values_;
};

// Meter truncation needed to hold every displaced meter state of the
// signal's spectral support (eigencomponents carrying all but support_tail
// of the mass), with a 3-unit x_M margin.
std::size_t required_meter_dim(const FockState& signal, const Observable& observable,
                               Resolution delta, Complex initial_amplitude, double support_tail = 1e-10);

JointState couple(const FockState& signal, const Observable& observable, Resolution delta,
                  const MeterConfig& meter = {});
JointState couple(const FockState& signal, const FockOperator& observable, Resolution delta,
                  const MeterConfig& meter = {});

// Projects the meter onto the x_M eigenbasis, in ascending pointer order.
// Outcomes with weight at or below kDensityFloor are dropped.
std::vector<ReadoutResult> readout_pointer(const JointState& joint, Resolution delta);

// Projects the meter onto the y_M eigenbasis, in ascending order.
std::vector<NoiseReadout> readout_noise(const JointState& joint, Resolution delta,
                                        const FockState& signal_in, const Observable& observable);
std::vector<NoiseReadout> readout_noise(const JointState& joint, Resolution delta,
                                        const FockState& signal_in, const FockOperator& observable);

// ---------- equivalence checks ----------

struct PointerEquivalence {
    std::size_t dim_m;
    std::size_t outcomes_checked;
    // Smallest |<meter-conditioned signal | povm-conditioned signal>| over the
    // outcomes holding the central 99% of the pointer mass.
    double min_overlap;
    // Total variation between the pointer weights and the povm outcome
    // density integrated over each pointer eigenvalue's cell (midpoint to
    // midpoint, in inferred units).
    double total_variation;
};

PointerEquivalence check_pointer_equivalence(const FockState& signal, const Observable& observable,
                                             Resolution delta, const MeterConfig& meter = {});

// Outcome tails excluded from the per-outcome noise checks (half on each
// side). Weight statistics still cover every outcome.
inline constexpr double kNoiseMassTail = 1e-10;
// Support tail used by the noise check. Components left out of the meter
// truncation leak a flat floor into the y_M distribution, so it must sit
// well below kNoiseMassTail.
inline constexpr double kNoiseSupportTail = 1e-16;

struct NoiseChannelCheck {
    std::size_t dim_m;
    // Over outcomes holding all but kNoiseMassTail of the noise mass.
    double min_unitary_overlap;
    // Largest change of any signal's distribution over the observable's
    // eigenvalues, across all noise outcomes.
    double max_distribution_change;
    // Largest total variation between the noise weights of the first signal
    // and those of every other signal.
    double max_weight_variation;
};

// All signals are coupled to one common meter truncation so their outcome
// sets coincide. The support tail is tightened to kNoiseSupportTail.
NoiseChannelCheck check_noise_channel(std::span<const FockState> signals, const Observable& observable,
                                      Resolution delta, const MeterConfig& meter = {});

}  // namespace qnd
