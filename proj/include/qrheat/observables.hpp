// observables.hpp — Rectification, quadrature squeezing, NDTC detection and the
// weak-coupling analytic current

#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "qrheat/bath_rates.hpp"
#include "qrheat/spectral_model.hpp"
#include "qrheat/tilted_generator.hpp"

namespace qrheat {

struct RectificationResult {
    double forward_current{0.0}; // J(ΔT)
    double reverse_current{0.0}; // J(−ΔT)
    double factor{0.0};          // R ∈ [0, 2]
};

// R = |J(ΔT) + J(−ΔT)| / max(|J(ΔT)|, |J(−ΔT)|). Throws BothCurrentsZero.
RectificationResult rectification(double j_forward, double j_reverse);

// ⟨X²⟩ and ⟨P²⟩ of X = a† + a, P = i(a† − a) in a state diagonal in the dressed basis.
struct QuadratureMoments {
    double var_X{1.0};
    double var_P{1.0};
};

QuadratureMoments quadrature_moments(const PopulationVector& P, const std::array<BranchData, 2>& branches);

// Var(X_θ) with X_θ = X cos θ + P sin θ
double quadrature_variance(const PopulationVector& P, const std::array<BranchData, 2>& branches, double theta);

struct SqueezingResult {
    double xi_squared{1.0};
    double theta_star{0.0}; // in [0, π)
    double var_X{1.0};
    double var_P{1.0};
};

inline constexpr int kDefaultThetaGrid = 64;

// Minimum of Var(X_θ) over a uniform θ grid on [0, π), refined by golden-section search.
SqueezingResult squeezing_factor(const PopulationVector& P, const std::array<BranchData, 2>& branches,
                                 int theta_grid_size = kDefaultThetaGrid);

struct WeakCurrentComponent {
    int m{0};
    double I_m1{0.0};
    double I_m0{0.0};
};

struct WeakCouplingCurrent {
    double total{0.0};
    std::vector<WeakCurrentComponent> components; // m = 2..cutoff_M
    int cutoff_M{0};
};

inline constexpr int kWeakCouplingMaxM = 100000;
inline constexpr double kWeakCouplingTailTol = 1e-10;

// Leading-order (λ²) current in the decoupled-populations picture, summed over m until the
// last term is below 1e-10 of the running absolute sum. Throws InvalidTemperature if
// T_R <= 0 and CutoffUnconverged if max_M is reached first.
WeakCouplingCurrent weak_coupling_current(const ValidatedParams& p, const BathSpec& bath_R, const BathSpec& bath_Q,
                                          int max_M = kWeakCouplingMaxM);

struct NdtcPeak {
    double delta_T{0.0};
    double current{0.0};
};

// Global maximum of J over the sampled ΔT values if it is interior and both neighbours are
// strictly lower. Throws TooFewPoints for fewer than five samples.
std::optional<NdtcPeak> detect_ndtc(const std::vector<std::pair<double, double>>& curve);

} // namespace qrheat
