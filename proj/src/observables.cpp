// observables.cpp — Derived transport and squeezing quantities

#include "qrheat/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qrheat/error.hpp"

namespace qrheat {

RectificationResult rectification(double j_forward, double j_reverse) {
    const double denom = std::max(std::abs(j_forward), std::abs(j_reverse));
    if (denom == 0.0) throw Error(ErrorCode::BothCurrentsZero, "rectification undefined when both currents vanish");
    return {j_forward, j_reverse, std::abs(j_forward + j_reverse) / denom};
}

QuadratureMoments quadrature_moments(const PopulationVector& P, const std::array<BranchData, 2>& branches) {
    QuadratureMoments q{0.0, 0.0};
    for (int sigma = 0; sigma < 2; ++sigma) {
        const BranchData& b = branches[static_cast<std::size_t>(sigma)];
        const double xm = (b.f - b.g) * (b.f - b.g);
        const double pm = (b.f + b.g) * (b.f + b.g);
        double ladder = 0.0;
        for (int n = 0; n <= P.N; ++n) ladder += P(sigma, n) * (2.0 * n + 1.0);
        q.var_X += xm * ladder;
        q.var_P += pm * ladder;
    }
    return q;
}

namespace {

double variance_at(const QuadratureMoments& q, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return c * c * q.var_X + s * s * q.var_P;
}

} // namespace

double quadrature_variance(const PopulationVector& P, const std::array<BranchData, 2>& branches, double theta) {
    return variance_at(quadrature_moments(P, branches), theta);
}

SqueezingResult squeezing_factor(const PopulationVector& P, const std::array<BranchData, 2>& branches,
                                 int theta_grid_size) {
    const int n = std::max(theta_grid_size, 4);
    const QuadratureMoments q = quadrature_moments(P, branches);
    const double step = std::numbers::pi / n;

    int best = 0;
    double best_val = variance_at(q, 0.0);
    for (int i = 1; i < n; ++i) {
        const double v = variance_at(q, i * step);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }

    // Golden-section on the bracket around the winning grid point (periodic in π).
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = (best - 1) * step, b = (best + 1) * step;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = variance_at(q, x1), f2 = variance_at(q, x2);
    for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = variance_at(q, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = variance_at(q, x2);
        }
    }
    double theta = 0.5 * (a + b);
    double val = variance_at(q, theta);
    if (best_val < val) {
        theta = best * step;
        val = best_val;
    }
    theta = std::fmod(theta, std::numbers::pi);
    if (theta < 0.0) theta += std::numbers::pi;
    return {val, theta, q.var_X, q.var_P};
}

WeakCouplingCurrent weak_coupling_current(const ValidatedParams& p, const BathSpec& bath_R, const BathSpec& bath_Q,
                                          int max_M) {
    if (!(bath_R.T > 0.0)) throw Error(ErrorCode::InvalidTemperature, "weak-coupling current needs T_R > 0");
    const double wa = p.omega_a();
    const double eps = p.epsilon();
    const double TR = bath_R.T, TQ = bath_Q.T;

    auto nQ = [&](double w) { return bose_occupation(w, TQ); };
    const double nQe = nQ(eps);
    const double nR1 = bose_occupation(wa, TR);
    const double nR2 = bose_occupation(2.0 * wa, TR);
    const double denom = (1.0 + 2.0 * nQe) * (1.0 + nR1) * nR2;

    const double wp = 2.0 * wa + eps, wm = 2.0 * wa - eps;
    const double np = nQ(wp);
    const double k1 = spectral_density(wp, bath_Q) / denom *
                      ((1.0 + np) * nQe * nR2 - np * (1.0 + nQe) * (1.0 + nR2));
    // For ε > 2ω_a the second channel reverses direction; γ(ω ≤ 0) = 0 removes it.
    double k0 = 0.0;
    if (wm > 0.0) {
        const double nm = nQ(wm);
        k0 = spectral_density(wm, bath_Q) / denom * ((1.0 + nm) * (1.0 + nQe) * nR2 - nm * nQe * (1.0 + nR2));
    }

    WeakCouplingCurrent out;
    double sum = 0.0, abs_sum = 0.0;
    for (int m = 2; m <= max_M; ++m) {
        const double boltz = std::exp(-m * wa / TR);
        WeakCurrentComponent c{m, k1 * boltz, k0 * boltz};
        out.components.push_back(c);
        const double term = m * (m - 1.0) * (c.I_m1 + c.I_m0);
        sum += term;
        abs_sum += std::abs(term);
        out.cutoff_M = m;
        // m(m−1)e^{−mω/T} is unimodal, so only stop once it decays.
        const bool decaying = (m + 1.0) / (m - 1.0) * std::exp(-wa / TR) < 1.0;
        if (decaying && std::abs(term) <= kWeakCouplingTailTol * abs_sum) {
            out.total = 2.0 * p.lambda() * p.lambda() / wa * sum;
            return out;
        }
        if (abs_sum == 0.0 && m > 2) {
            out.total = 0.0;
            return out;
        }
    }
    std::ostringstream os;
    os << "weak-coupling sum not converged by M=" << max_M;
    throw Error(ErrorCode::CutoffUnconverged, os.str());
}

std::optional<NdtcPeak> detect_ndtc(const std::vector<std::pair<double, double>>& curve) {
    if (curve.size() < 5) {
        std::ostringstream os;
        os << "NDTC detection needs at least 5 points (got " << curve.size() << ")";
        throw Error(ErrorCode::TooFewPoints, os.str());
    }
    std::size_t arg = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].second > curve[arg].second) arg = i;
    if (arg == 0 || arg + 1 == curve.size()) return std::nullopt;
    if (!(curve[arg - 1].second < curve[arg].second && curve[arg + 1].second < curve[arg].second)) return std::nullopt;
    return NdtcPeak{curve[arg].first, curve[arg].second};
}

} // namespace qrheat
