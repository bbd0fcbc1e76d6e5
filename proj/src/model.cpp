// model.cpp — Point solver and truncation control

#include "qrheat/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qrheat/error.hpp"

namespace qrheat {

void validate_policy(const TruncationPolicy& t) {
    std::ostringstream os;
    if (t.initial_N < 1) os << " initial_N must be >= 1;";
    if (t.step < 1) os << " step must be >= 1;";
    if (t.max_N < t.initial_N) os << " max_N must be >= initial_N;";
    if (t.max_N + t.step > kOverlapStableWindow) os << " max_N + step must be <= " << kOverlapStableWindow << ";";
    if (!(t.tol > 0.0)) os << " tol must be > 0;";
    if (!os.str().empty()) throw Error(ErrorCode::ValidationError, "truncation:" + os.str());
}

std::shared_ptr<const OverlapPair> OverlapCache::get(const BranchData& b0, const BranchData& b1, int N) {
    const auto key = std::make_pair(b0.alpha, b1.alpha);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = tables_.find(key);
        if (it != tables_.end() && it->second->N() >= N) return it->second;
    }
    // Built outside the lock; a concurrent duplicate build yields identical tables.
    auto pair = std::make_shared<const OverlapPair>(overlap_pair(std::max(N, min_build_N_), b0, b1));
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = tables_[key];
    if (!slot || slot->N() < N) slot = pair;
    return slot;
}

namespace {

struct Evaluation {
    PointSolution sol;
    double scale1{0.0}, scale2{0.0}, scale3{0.0};
};

Evaluation evaluate(const ModelPoint& pt, int N, const ObservableRequest& req, OverlapCache* cache) {
    const DressedSpectrum spec = dressed_spectrum(pt.params, N);
    std::shared_ptr<const OverlapPair> G;
    if (cache)
        G = cache->get(spec.branches[0], spec.branches[1], N);
    else
        G = std::make_shared<const OverlapPair>(overlap_pair(N, spec.branches[0], spec.branches[1]));
    const RateSet rates = build_rates(spec, *G, pt.bath_R, pt.bath_Q);
    const JumpList jumps = collect_jumps(rates, spec);
    const TiltedGenerator gen = build_generator(jumps, 0.0, 0.0);

    Evaluation ev;
    PointSolution& s = ev.sol;
    s.N = N;
    s.branches = spec.branches;
    if (req.method == CumulantMethod::FiniteDifference) {
        s.P = steady_state(gen);
        s.cumulants = cumulants_fd(jumps, req.fd_step);
    } else {
        s.cumulants = cumulants_perturbative(jumps, &s.P);
    }
    s.residual = stationarity_residual(gen, s.P);
    if (req.squeezing) s.squeezing = squeezing_factor(s.P, s.branches, req.theta_grid);
    ev.scale1 = gross_traffic(jumps, s.P, 1);
    ev.scale2 = gross_traffic(jumps, s.P, 2);
    ev.scale3 = gross_traffic(jumps, s.P, 3);
    return ev;
}

double relative_change(double a, double b, double scale) {
    const double denom = std::max(std::abs(a), 1e-6 * scale);
    if (denom == 0.0) return a == b ? 0.0 : HUGE_VAL;
    return std::abs(a - b) / denom;
}

double worst_change(const Evaluation& lo, const Evaluation& hi, const ObservableRequest& req) {
    const auto& a = lo.sol;
    const auto& b = hi.sol;
    double d = relative_change(a.cumulants.current, b.cumulants.current, lo.scale1);
    if (req.noise) d = std::max(d, relative_change(a.cumulants.noise, b.cumulants.noise, lo.scale2));
    if (req.skewness) d = std::max(d, relative_change(a.cumulants.skewness, b.cumulants.skewness, lo.scale3));
    if (req.squeezing) d = std::max(d, relative_change(a.squeezing->xi_squared, b.squeezing->xi_squared, 1.0));
    return d;
}

} // namespace

PointSolution solve_at(const ModelPoint& pt, int N, const ObservableRequest& req, OverlapCache* cache) {
    return evaluate(pt, N, req, cache).sol;
}

PointSolution solve_converged(const ModelPoint& pt, const TruncationPolicy& policy, const ObservableRequest& req,
                              OverlapCache* cache) {
    validate_policy(policy);
    OverlapCache local;
    if (!cache) cache = &local;
    Evaluation lo = evaluate(pt, policy.initial_N, req, cache);
    double last = HUGE_VAL;
    for (int N = policy.initial_N; N <= policy.max_N; N += policy.step) {
        Evaluation hi = evaluate(pt, N + policy.step, req, cache);
        last = worst_change(lo, hi, req);
        if (last <= policy.tol) {
            lo.sol.truncation_delta = last;
            return lo.sol;
        }
        lo = std::move(hi);
    }
    std::ostringstream os;
    os << "no truncation up to N=" << policy.max_N << " met tol=" << policy.tol << " (last change " << last << ")";
    throw Error(ErrorCode::TruncationUnconverged, os.str());
}

} // namespace qrheat
