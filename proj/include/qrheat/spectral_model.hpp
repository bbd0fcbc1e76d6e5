// spectral_model.hpp — Exact squeezed eigenbasis of the quadratic qubit-resonator Hamiltonian
//
//   H = ω_a a†a + (ε/2) σ_z + λ σ_z (a† + a)²
//
// σ_z is diagonal, so H splits into one quadratic oscillator per qubit branch σ ∈ {0, 1}.
// Each branch is diagonalized by its own Bogoliubov (squeeze) transformation.
// All quantities are in units of ω_a unless the caller chooses otherwise.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace qrheat {

struct SystemParams {
    double omega_a{1.0}; // resonator frequency
    double epsilon{1.0}; // qubit splitting
    double lambda{0.0};  // quadratic qubit-photon coupling
};

// Coupling must stay this far below ω_a/4 (in units of ω_a); η_0 → 0 at the collapse point.
inline constexpr double kCouplingMargin = 1e-6;

// Parameters that passed validate_params(). Only constructible through it.
class ValidatedParams {
public:
    const SystemParams& get() const noexcept { return p_; }
    double omega_a() const noexcept { return p_.omega_a; }
    double epsilon() const noexcept { return p_.epsilon; }
    double lambda() const noexcept { return p_.lambda; }

private:
    explicit ValidatedParams(const SystemParams& p) : p_(p) {}
    friend ValidatedParams validate_params(const SystemParams& p);
    SystemParams p_;
};

// Throws Error{NonPositiveFrequency} or Error{CouplingOutOfRange}.
ValidatedParams validate_params(const SystemParams& p);

// (−1)^{σ+1}: +1 for the excited qubit branch, −1 for the ground branch.
constexpr int branch_sign(int sigma) noexcept { return sigma == 1 ? 1 : -1; }

struct BranchData {
    int sigma{0};
    double eta{1.0};         // η_σ = sqrt(1 − (2λ/ω_σ)²)
    double omega_sigma{1.0}; // ω_σ = ω_a + 2λ_σ
    double f{1.0};           // cosh α_σ
    double g{0.0};           // sinh α_σ
    double alpha{0.0};       // squeeze parameter
    double phi{0.0};         // −g/f
    double epsilon_sigma{0.0};
    double lambda_sigma{0.0};

    // Level spacing of the squeezed ladder, η_σ ω_σ.
    double mode_frequency() const noexcept { return eta * omega_sigma; }
};

BranchData build_branch(const ValidatedParams& p, int sigma);

// E^σ_n = η_σ ω_σ n + (η_σ − 1) ω_σ / 2 + ε_σ / 2 + λ_σ
double eigen_energy(const ValidatedParams& p, const BranchData& b, int n);

struct DressedIndex {
    int sigma{0};
    int n{0};
};

// Energies of both branches truncated at n ≤ N.
struct DressedSpectrum {
    int N{0};
    std::array<BranchData, 2> branches;
    std::array<std::vector<double>, 2> energy;

    double E(int sigma, int n) const { return energy[static_cast<std::size_t>(sigma)][static_cast<std::size_t>(n)]; }
    // E^{m,σ}_{m',σ̄} = E^σ_m − E^{σ̄}_{m'}
    double gap(int m, int sigma, int m_prime) const { return E(sigma, m) - E(1 - sigma, m_prime); }
    std::size_t dimension() const noexcept { return 2 * static_cast<std::size_t>(N + 1); }
    std::size_t index(int sigma, int n) const noexcept {
        return static_cast<std::size_t>(sigma) * static_cast<std::size_t>(N + 1) + static_cast<std::size_t>(n);
    }
};

DressedSpectrum dressed_spectrum(const ValidatedParams& p, int N);

// ---------------------------------------------------------------------------
// Dense-diagonalization oracle in the bare Fock ⊗ qubit basis.

struct BareLevel {
    double energy{0.0};
    int branch{0};
    int occupation{0}; // rank of the level inside its branch
};

// Fraction of each branch's computed spectrum that is kept; the rest is hard-wall distorted.
inline constexpr double kReliableFraction = 0.8;

// Lowest `levels` eigenvalues of H (both branches merged, ascending). Throws
// TruncationTooSmall if `levels` exceeds the reliable window of an N_bare-photon basis.
std::vector<BareLevel> brute_force_spectrum(const ValidatedParams& p, int N_bare, int levels);

struct BareBranch {
    Eigen::VectorXd energies; // ascending
    Eigen::MatrixXd vectors;  // columns are eigenvectors in the bare Fock basis |0⟩..|N_bare⟩
};

// Full dense eigendecomposition of the branch-σ oscillator block.
BareBranch brute_force_branch(const ValidatedParams& p, int sigma, int N_bare);

} // namespace qrheat
