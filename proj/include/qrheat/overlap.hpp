// overlap.hpp — Overlaps between squeezed Fock states of opposite qubit branches
//
// G^{m,σ}_{m',σ̄} = ⟨ψ^σ_m| σ_x |ψ^σ̄_{m'}⟩ = ⟨m| exp[(Δα/2)(a†² − a²)] |m'⟩,  Δα = α_σ − α_σ̄.
//
// Closed form (all powers integer, v* = v for real squeezing):
//
//   G = u^{-1/2} sqrt(m! m'!) Σ_l (−1)^j (v/2u)^{j+k} u^{−l} / (j! k! l!),
//   j = (m−l)/2, k = (m'−l)/2, l ≡ m ≡ m' (mod 2), u = cosh Δα, v = −sinh Δα.
//
// The sum alternates in sign and cancels heavily at large m, m'; it is evaluated in
// log-domain doubles while that is exact to ~1e-15, and in MPFR otherwise.

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "qrheat/spectral_model.hpp"

namespace qrheat {

struct SqueezeMismatch {
    double delta_alpha{0.0}; // α_σ − α_σ̄
    double u{1.0};           // cosh(delta_alpha)
    double v{0.0};           // −sinh(delta_alpha)

    static SqueezeMismatch from_delta_alpha(double delta_alpha);
    // Mismatch for ⟨ψ^{bra}| · |ψ^{ket}⟩ between two branches.
    static SqueezeMismatch between(const BranchData& bra, const BranchData& ket);
};

// Indices above this throw OverflowRisk.
inline constexpr int kOverlapStableWindow = 512;

double overlap(int m, int m_prime, const SqueezeMismatch& sq);

// Dense (N+1)×(N+1) table for one fixed bra branch.
class OverlapTable {
public:
    OverlapTable() = default;
    OverlapTable(int N, SqueezeMismatch sq, std::vector<double> entries)
        : N_(N), sq_(sq), entries_(std::move(entries)) {}

    int N() const noexcept { return N_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(N_ + 1); }
    const SqueezeMismatch& mismatch() const noexcept { return sq_; }
    double operator()(int m, int m_prime) const {
        return entries_[static_cast<std::size_t>(m) * size() + static_cast<std::size_t>(m_prime)];
    }

    // Σ_{m'} G[m][m']²; tends to 1 from below as N grows.
    double row_square_sum(int m) const;

    // Debug dump: one "m,m_prime,G" line per entry, with header.
    void write_csv(std::ostream& os) const;

private:
    int N_{-1};
    SqueezeMismatch sq_{};
    std::vector<double> entries_;
};

OverlapTable overlap_table(int N, const SqueezeMismatch& sq);

// Tables for both bra branches: tables[σ](m, m') = G^{m,σ}_{m',σ̄}.
struct OverlapPair {
    std::array<OverlapTable, 2> tables;

    const OverlapTable& operator[](int sigma) const { return tables[static_cast<std::size_t>(sigma)]; }
    int N() const { return tables[0].N(); }
};

OverlapPair overlap_pair(int N, const BranchData& branch0, const BranchData& branch1);

// Oracle: element (m, m') of the dense matrix exponential of (Δα/2)(a†² − a²) in an
// N_bare-photon basis. Requires N_bare >= 4·max(m, m') + 100.
double brute_force_overlap(int m, int m_prime, double delta_alpha, int N_bare);

} // namespace qrheat
