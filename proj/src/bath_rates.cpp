// bath_rates.cpp — Spectral densities, occupations and dressed rates

#include "qrheat/bath_rates.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qrheat/error.hpp"

namespace qrheat {

void validate_bath(const BathSpec& b) {
    std::ostringstream os;
    if (!(b.alpha_u >= 0.0) || !std::isfinite(b.alpha_u)) os << " alpha_u=" << b.alpha_u << " (need >= 0)";
    if (!(b.omega_c > 0.0) || !std::isfinite(b.omega_c)) os << " omega_c=" << b.omega_c << " (need > 0)";
    if (!(b.T >= 0.0) || !std::isfinite(b.T)) os << " T=" << b.T << " (need >= 0)";
    if (!os.str().empty())
        throw Error(ErrorCode::InvalidBath, std::string(b.label == BathLabel::R ? "bath R:" : "bath Q:") + os.str());
}

double spectral_density(double omega, const BathSpec& b) {
    if (!(omega > 0.0)) return 0.0;
    const double x = omega / b.omega_c;
    return std::numbers::pi * b.alpha_u * omega * x * x * std::exp(-x);
}

double bose_occupation(double omega, double T) {
    if (!(omega > 0.0)) {
        std::ostringstream os;
        os << "Bose occupation needs omega > 0 (got " << omega << ")";
        throw Error(ErrorCode::NonPositiveFrequency, os.str());
    }
    if (T <= 0.0) return 0.0;
    return 1.0 / std::expm1(omega / T);
}

namespace {

RatePair thermal_pair(double prefactor, double gap, const BathSpec& bath) {
    if (!(gap > 0.0) || prefactor == 0.0) return {};
    const double k = prefactor * spectral_density(gap, bath);
    const double n = bose_occupation(gap, bath.T);
    return {k * n, k * (1.0 + n)};
}

} // namespace

RatePair resonator_rates(const BranchData& b, int m, const BathSpec& bath) {
    if (m <= 0) return {};
    const double fg = b.f - b.g;
    return thermal_pair(m * fg * fg, b.mode_frequency(), bath);
}

RatePair qubit_rates(int m, int m_prime, int sigma, const BathSpec& bath, const OverlapPair& G,
                     const DressedSpectrum& spectrum) {
    if (((m - m_prime) & 1) != 0) return {};
    const double gap = spectrum.gap(m, sigma, m_prime);
    if (!(gap > 0.0)) return {};
    const double prefactor = G[1 - sigma](m_prime, m) * G[sigma](m, m_prime);
    return thermal_pair(prefactor, gap, bath);
}

RateSet build_rates(const DressedSpectrum& spectrum, const OverlapPair& G, const BathSpec& bath_R,
                    const BathSpec& bath_Q) {
    const int N = spectrum.N;
    if (G.N() < N) {
        std::ostringstream os;
        os << "overlap tables cover N=" << G.N() << " but spectrum needs N=" << N;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
    validate_bath(bath_R);
    validate_bath(bath_Q);

    RateSet r;
    r.N = N;
    const auto n1 = static_cast<std::size_t>(N + 1);
    for (int sigma = 0; sigma < 2; ++sigma) {
        auto& row = r.resonator[static_cast<std::size_t>(sigma)];
        row.resize(n1);
        const BranchData& b = spectrum.branches[static_cast<std::size_t>(sigma)];
        for (int m = 0; m <= N; ++m) row[static_cast<std::size_t>(m)] = resonator_rates(b, m, bath_R);
    }
    r.qubit.assign(2 * n1 * n1, RatePair{});
    for (int sigma = 0; sigma < 2; ++sigma)
        for (int m = 0; m <= N; ++m)
            for (int mp = m & 1; mp <= N; mp += 2)
                r.qubit[(static_cast<std::size_t>(sigma) * n1 + static_cast<std::size_t>(m)) * n1 +
                        static_cast<std::size_t>(mp)] = qubit_rates(m, mp, sigma, bath_Q, G, spectrum);
    return r;
}

} // namespace qrheat
