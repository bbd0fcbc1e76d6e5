// tilted_generator.hpp — Counting-field tilted population generator and cumulants
//
// State index σ(N+1) + n. A jump that emits ΔE into bath u is weighted e^{+u_u ΔE}; an
// absorption is weighted e^{−u_u ΔE}. Diagonal entries are the untilted outflow rates, so
// at zero tilt every column sums to zero. u = iχ is the real-rotated counting field.

#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qrheat/bath_rates.hpp"
#include "qrheat/spectral_model.hpp"

namespace qrheat {

struct Jump {
    int from{0};
    int to{0};
    double rate{0.0};
    double energy{0.0}; // quantum exchanged with the bath, > 0
    BathLabel bath{BathLabel::Q};
    int direction{0}; // +1 emission into the bath, −1 absorption from it
};

// Flattened jump list of one rate set; the same list serves every tilt.
struct JumpList {
    int N{0};
    std::vector<Jump> jumps;

    std::size_t dimension() const noexcept { return 2 * static_cast<std::size_t>(N + 1); }
    double max_energy(BathLabel bath) const;
};

JumpList collect_jumps(const RateSet& rates, const DressedSpectrum& spectrum);

struct PopulationVector {
    int N{0};
    Eigen::VectorXd values;

    double operator()(int sigma, int n) const { return values(sigma * (N + 1) + n); }
};

class TiltedGenerator {
public:
    TiltedGenerator(int N, Eigen::MatrixXd matrix, Eigen::VectorXd column_sums, double tilt_R, double tilt_Q)
        : N_(N), matrix_(std::move(matrix)), column_sums_(std::move(column_sums)), tilt_R_(tilt_R), tilt_Q_(tilt_Q) {}

    int N() const noexcept { return N_; }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    // Column sums accumulated as rate·expm1(±uΔE); exactly zero at zero tilt.
    const Eigen::VectorXd& column_sums() const noexcept { return column_sums_; }
    double tilt_R() const noexcept { return tilt_R_; }
    double tilt_Q() const noexcept { return tilt_Q_; }

private:
    int N_;
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd column_sums_;
    double tilt_R_;
    double tilt_Q_;
};

TiltedGenerator build_generator(const JumpList& jumps, double u_R, double u_Q);
// Throws DimensionMismatch if rates and spectrum disagree on N.
TiltedGenerator build_generator(const RateSet& rates, const DressedSpectrum& spectrum, double u_R, double u_Q);

// Unique stationary state of a zero-tilt generator. Throws SingularSolve when the jump
// graph does not have exactly one closed communicating class.
PopulationVector steady_state(const TiltedGenerator& gen);

// ‖M P‖∞ / max|M_ij|
double stationarity_residual(const TiltedGenerator& gen, const PopulationVector& P);

struct EigenOptions {
    int max_iterations{200};
    double tolerance{1e-13};
};

// Perron root of the tilted Metzler matrix by shifted inverse iteration. Throws
// ConvergenceFailure when the iteration cap is reached.
double dominant_eigenvalue(const TiltedGenerator& gen, const EigenOptions& opts = {});

enum class CumulantMethod { FiniteDifference, Perturbative };

std::string_view to_string(CumulantMethod m);

struct CumulantResult {
    double current{0.0};  // J, energy per unit time into bath Q
    double noise{0.0};    // second cumulant rate
    double skewness{0.0}; // third cumulant rate
    CumulantMethod method{CumulantMethod::Perturbative};
    int truncation_N{0};
};

inline constexpr double kDefaultFdStep = 1e-3;
// Largest tilt factor e^{2h ΔE_max} accepted by cumulants_fd.
inline constexpr double kMaxTiltFactor = 1e3;

// Central differences of the CGF in u_Q at h and h/2, combined by Richardson extrapolation.
CumulantResult cumulants_fd(const JumpList& jumps, double step = kDefaultFdStep);
CumulantResult cumulants_fd(const RateSet& rates, const DressedSpectrum& spectrum, double step = kDefaultFdStep);

// Exact CGF Taylor coefficients from the stationary perturbation hierarchy. Optionally
// hands back the stationary state it solved for on the way.
CumulantResult cumulants_perturbative(const JumpList& jumps, PopulationVector* stationary = nullptr);
CumulantResult cumulants_perturbative(const RateSet& rates, const DressedSpectrum& spectrum);

// Σ ΔE (Γ^− P_upper − Γ^+ P_lower) over all Q-bath pairs.
double direct_current(const PopulationVector& P, const RateSet& rates, const DressedSpectrum& spectrum);

// Σ Γ |ΔE|^k P_from over Q jumps: gross traffic used as an absolute scale for cumulant k.
double gross_traffic(const JumpList& jumps, const PopulationVector& P, int k);

} // namespace qrheat
