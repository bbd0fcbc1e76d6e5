// spectral_model.cpp — Squeezed eigenbasis and dense-diagonalization oracle

#include "qrheat/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qrheat/error.hpp"

namespace qrheat {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::CouplingOutOfRange: return "CouplingOutOfRange";
    case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::InvalidBath: return "InvalidBath";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::OverflowRisk: return "OverflowRisk";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularSolve: return "SingularSolve";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::TruncationUnconverged: return "TruncationUnconverged";
    case ErrorCode::BothCurrentsZero: return "BothCurrentsZero";
    case ErrorCode::CutoffUnconverged: return "CutoffUnconverged";
    case ErrorCode::InvalidTemperature: return "InvalidTemperature";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

ValidatedParams validate_params(const SystemParams& p) {
    if (!(p.omega_a > 0.0) || !std::isfinite(p.omega_a)) {
        std::ostringstream os;
        os << "omega_a must be > 0 (got " << p.omega_a << ")";
        throw Error(ErrorCode::NonPositiveFrequency, os.str());
    }
    const double bound = p.omega_a * (0.25 - kCouplingMargin);
    if (!(p.lambda >= 0.0) || !(p.lambda <= bound) || !std::isfinite(p.epsilon)) {
        std::ostringstream os;
        os << "lambda must satisfy 0 <= lambda < omega_a/4 (got lambda=" << p.lambda
           << ", omega_a=" << p.omega_a << ")";
        throw Error(ErrorCode::CouplingOutOfRange, os.str());
    }
    return ValidatedParams(p);
}

BranchData build_branch(const ValidatedParams& p, int sigma) {
    BranchData b;
    b.sigma = sigma;
    const int s = branch_sign(sigma);
    b.lambda_sigma = s * p.lambda();
    b.epsilon_sigma = s * p.epsilon();
    b.omega_sigma = p.omega_a() + 2.0 * b.lambda_sigma;
    const double ratio = 2.0 * p.lambda() / b.omega_sigma;
    b.eta = std::sqrt(1.0 - ratio * ratio);
    // tanh α = s·sqrt((1−η)/(1+η)); write 1−η = ratio²/(1+η) to keep precision as λ → 0.
    const double one_minus_eta = ratio * ratio / (1.0 + b.eta);
    b.alpha = s * std::atanh(std::sqrt(one_minus_eta / (1.0 + b.eta)));
    b.f = std::cosh(b.alpha);
    b.g = std::sinh(b.alpha);
    b.phi = -b.g / b.f;
    return b;
}

double eigen_energy(const ValidatedParams& /*p*/, const BranchData& b, int n) {
    const double offset = 0.5 * (b.eta - 1.0) * b.omega_sigma + 0.5 * b.epsilon_sigma + b.lambda_sigma;
    return b.mode_frequency() * n + offset;
}

DressedSpectrum dressed_spectrum(const ValidatedParams& p, int N) {
    if (N < 0) throw Error(ErrorCode::DimensionMismatch, "truncation N must be >= 0");
    DressedSpectrum s;
    s.N = N;
    for (int sigma = 0; sigma < 2; ++sigma) {
        auto& b = s.branches[static_cast<std::size_t>(sigma)];
        b = build_branch(p, sigma);
        auto& e = s.energy[static_cast<std::size_t>(sigma)];
        e.resize(static_cast<std::size_t>(N + 1));
        for (int n = 0; n <= N; ++n) e[static_cast<std::size_t>(n)] = eigen_energy(p, b, n);
    }
    return s;
}

BareBranch brute_force_branch(const ValidatedParams& p, int sigma, int N_bare) {
    if (N_bare < 1) throw Error(ErrorCode::TruncationTooSmall, "N_bare must be >= 1");
    const int dim = N_bare + 1;
    const double s = branch_sign(sigma);
    const double lam = s * p.lambda();
    // ω a†a + (ε_σ/2) + λ_σ (a†² + a² + 2a†a + 1), pentadiagonal in the bare basis
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) {
        h(n, n) = p.omega_a() * n + 0.5 * s * p.epsilon() + lam * (2.0 * n + 1.0);
        if (n + 2 < dim) {
            const double a2 = lam * std::sqrt((n + 1.0) * (n + 2.0));
            h(n + 2, n) = a2;
            h(n, n + 2) = a2;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<BareLevel> brute_force_spectrum(const ValidatedParams& p, int N_bare, int levels) {
    const int keep = static_cast<int>(std::floor(kReliableFraction * (N_bare + 1)));
    std::vector<BareLevel> all;
    for (int sigma = 0; sigma < 2; ++sigma) {
        const BareBranch bb = brute_force_branch(p, sigma, N_bare);
        for (int k = 0; k < keep; ++k) all.push_back({bb.energies(k), sigma, k});
    }
    std::sort(all.begin(), all.end(), [](const BareLevel& a, const BareLevel& b) { return a.energy < b.energy; });
    // A merged level is trustworthy only below the lowest discarded level of either branch.
    std::size_t reliable = all.size();
    if (keep > 0) {
        double ceiling = all.back().energy;
        for (int sigma = 0; sigma < 2; ++sigma) {
            double top = -1e300;
            for (const auto& l : all)
                if (l.branch == sigma) top = std::max(top, l.energy);
            ceiling = std::min(ceiling, top);
        }
        reliable = static_cast<std::size_t>(
            std::count_if(all.begin(), all.end(), [&](const BareLevel& l) { return l.energy <= ceiling; }));
    }
    if (levels < 0 || static_cast<std::size_t>(levels) > reliable) {
        std::ostringstream os;
        os << levels << " levels requested but only " << reliable << " are reliable with N_bare=" << N_bare;
        throw Error(ErrorCode::TruncationTooSmall, os.str());
    }
    all.resize(static_cast<std::size_t>(levels));
    return all;
}

} // namespace qrheat
