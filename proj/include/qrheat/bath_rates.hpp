// bath_rates.hpp — Super-Ohmic baths and dressed transition rates
//
// Resonator bath R drives Δn = ±1 jumps inside one branch; qubit bath Q drives branch
// flips (m, σ) ↔ (m', σ̄) weighted by the squared squeezed-state overlap.

#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "qrheat/overlap.hpp"
#include "qrheat/spectral_model.hpp"

namespace qrheat {

enum class BathLabel { R, Q };

struct BathSpec {
    BathLabel label{BathLabel::R};
    double alpha_u{1e-3}; // dimensionless coupling
    double omega_c{10.0}; // cutoff
    double T{1.0};        // temperature, k_B = 1
};

// Throws InvalidBath on alpha_u < 0, omega_c <= 0, T < 0 or non-finite values.
void validate_bath(const BathSpec& b);

// γ(ω) = π α ω³/ω_c² e^{−ω/ω_c} for ω > 0, else 0.
double spectral_density(double omega, const BathSpec& b);

// 1/(e^{ω/T} − 1), exactly 0 at T = 0. Throws NonPositiveFrequency for ω <= 0.
double bose_occupation(double omega, double T);

struct RatePair {
    double up{0.0};   // absorption from the bath (Γ^+)
    double down{0.0}; // emission into the bath (Γ^−)
};

// Γ^{R,±}_{m,σ} for the jump (m−1, σ) ↔ (m, σ).
RatePair resonator_rates(const BranchData& b, int m, const BathSpec& bath);

// Γ^{Q,±}_{m,m',σ} for the pair (m, σ) ↔ (m', σ̄). The gap E^σ_m − E^σ̄_{m'} must be
// positive; otherwise both rates are zero.
RatePair qubit_rates(int m, int m_prime, int sigma, const BathSpec& bath, const OverlapPair& G,
                     const DressedSpectrum& spectrum);

// All nonzero rates of one parameter point.
struct RateSet {
    int N{0};
    // resonator[σ][m], m = 0..N; entry 0 is always zero
    std::array<std::vector<RatePair>, 2> resonator;
    // qubit[(σ·(N+1) + m)·(N+1) + m']
    std::vector<RatePair> qubit;

    const RatePair& resonator_at(int sigma, int m) const {
        return resonator[static_cast<std::size_t>(sigma)][static_cast<std::size_t>(m)];
    }
    const RatePair& qubit_at(int m, int m_prime, int sigma) const {
        const auto n1 = static_cast<std::size_t>(N + 1);
        return qubit[(static_cast<std::size_t>(sigma) * n1 + static_cast<std::size_t>(m)) * n1 +
                     static_cast<std::size_t>(m_prime)];
    }
};

// G must cover at least N. Throws DimensionMismatch otherwise.
RateSet build_rates(const DressedSpectrum& spectrum, const OverlapPair& G, const BathSpec& bath_R,
                    const BathSpec& bath_Q);

} // namespace qrheat
