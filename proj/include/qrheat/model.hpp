// model.hpp — One parameter point solved with automatic truncation escalation

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

#include "qrheat/bath_rates.hpp"
#include "qrheat/observables.hpp"
#include "qrheat/overlap.hpp"
#include "qrheat/spectral_model.hpp"
#include "qrheat/tilted_generator.hpp"

namespace qrheat {

struct ModelPoint {
    ValidatedParams params;
    BathSpec bath_R{BathLabel::R};
    BathSpec bath_Q{BathLabel::Q};
};

struct TruncationPolicy {
    int initial_N{40};
    int step{10};
    int max_N{200};
    double tol{1e-8};
};

// Throws ValidationError on an inconsistent policy.
void validate_policy(const TruncationPolicy& t);

struct ObservableRequest {
    bool noise{false};
    bool skewness{false};
    bool squeezing{false};
    CumulantMethod method{CumulantMethod::Perturbative};
    double fd_step{kDefaultFdStep};
    int theta_grid{kDefaultThetaGrid};
};

// Overlap tables shared between points with the same coupling. Thread-safe.
class OverlapCache {
public:
    // Tables are built at least this large so escalating truncations reuse one build.
    explicit OverlapCache(int min_build_N = 0) : min_build_N_(min_build_N) {}

    std::shared_ptr<const OverlapPair> get(const BranchData& b0, const BranchData& b1, int N);

private:
    int min_build_N_;
    std::mutex mu_;
    std::map<std::pair<double, double>, std::shared_ptr<const OverlapPair>> tables_;
};

struct PointSolution {
    int N{0}; // accepted truncation
    std::array<BranchData, 2> branches;
    PopulationVector P;
    CumulantResult cumulants;
    std::optional<SqueezingResult> squeezing;
    double residual{0.0};         // stationarity residual at N
    double truncation_delta{0.0}; // worst relative change N → N + step among checked quantities
};

// Solves at a single truncation N without any convergence check.
PointSolution solve_at(const ModelPoint& pt, int N, const ObservableRequest& req, OverlapCache* cache = nullptr);

// Escalates N from initial_N in steps until J and every requested observable change by at
// most tol relative (with an absolute floor of 1e-6 of the gross Q-bath traffic) between N
// and N + step. Reports values at the accepted N. Throws TruncationUnconverged past max_N.
PointSolution solve_converged(const ModelPoint& pt, const TruncationPolicy& policy, const ObservableRequest& req,
                              OverlapCache* cache = nullptr);

} // namespace qrheat
