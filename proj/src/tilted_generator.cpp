// tilted_generator.cpp — Stationary solve, Perron root and CGF derivatives

#include "qrheat/tilted_generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qrheat/error.hpp"

namespace qrheat {

double JumpList::max_energy(BathLabel bath) const {
    double e = 0.0;
    for (const auto& j : jumps)
        if (j.bath == bath) e = std::max(e, j.energy);
    return e;
}

JumpList collect_jumps(const RateSet& rates, const DressedSpectrum& spectrum) {
    if (rates.N != spectrum.N) {
        std::ostringstream os;
        os << "rate set N=" << rates.N << " but spectrum N=" << spectrum.N;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
    JumpList out;
    out.N = rates.N;
    const int N = rates.N;
    auto push_pair = [&](int upper, int lower, const RatePair& r, double energy, BathLabel bath) {
        if (r.down > 0.0) out.jumps.push_back({upper, lower, r.down, energy, bath, +1});
        if (r.up > 0.0) out.jumps.push_back({lower, upper, r.up, energy, bath, -1});
    };
    for (int sigma = 0; sigma < 2; ++sigma) {
        const double w = spectrum.branches[static_cast<std::size_t>(sigma)].mode_frequency();
        for (int m = 1; m <= N; ++m) {
            const auto upper = static_cast<int>(spectrum.index(sigma, m));
            const auto lower = static_cast<int>(spectrum.index(sigma, m - 1));
            push_pair(upper, lower, rates.resonator_at(sigma, m), w, BathLabel::R);
        }
    }
    for (int sigma = 0; sigma < 2; ++sigma)
        for (int m = 0; m <= N; ++m)
            for (int mp = m & 1; mp <= N; mp += 2) {
                const RatePair& r = rates.qubit_at(m, mp, sigma);
                if (r.up == 0.0 && r.down == 0.0) continue;
                const auto upper = static_cast<int>(spectrum.index(sigma, m));
                const auto lower = static_cast<int>(spectrum.index(1 - sigma, mp));
                push_pair(upper, lower, r, spectrum.gap(m, sigma, mp), BathLabel::Q);
            }
    return out;
}

TiltedGenerator build_generator(const JumpList& jumps, double u_R, double u_Q) {
    const auto dim = static_cast<Eigen::Index>(jumps.dimension());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd col = Eigen::VectorXd::Zero(dim);
    for (const auto& j : jumps.jumps) {
        const double u = j.bath == BathLabel::Q ? u_Q : u_R;
        const double x = j.direction * u * j.energy;
        M(j.to, j.from) += j.rate * std::exp(x);
        M(j.from, j.from) -= j.rate;
        col(j.from) += j.rate * std::expm1(x);
    }
    return TiltedGenerator(jumps.N, std::move(M), std::move(col), u_R, u_Q);
}

TiltedGenerator build_generator(const RateSet& rates, const DressedSpectrum& spectrum, double u_R, double u_Q) {
    return build_generator(collect_jumps(rates, spectrum), u_R, u_Q);
}

namespace {

// Number of closed communicating classes of the directed graph of positive off-diagonal
// entries (Kosaraju). The stationary state is unique iff this equals one.
int closed_class_count(const Eigen::MatrixXd& M) {
    const int n = static_cast<int>(M.rows());
    std::vector<std::vector<int>> fwd(static_cast<std::size_t>(n)), rev(static_cast<std::size_t>(n));
    for (int from = 0; from < n; ++from)
        for (int to = 0; to < n; ++to)
            if (to != from && M(to, from) > 0.0) {
                fwd[static_cast<std::size_t>(from)].push_back(to);
                rev[static_cast<std::size_t>(to)].push_back(from);
            }

    std::vector<int> order;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<int, std::size_t>> stack;
    for (int s = 0; s < n; ++s) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        seen[static_cast<std::size_t>(s)] = 1;
        stack.emplace_back(s, 0);
        while (!stack.empty()) {
            auto& [v, i] = stack.back();
            const auto& adj = fwd[static_cast<std::size_t>(v)];
            if (i < adj.size()) {
                const int w = adj[i++];
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.emplace_back(w, 0);
                }
            } else {
                order.push_back(v);
                stack.pop_back();
            }
        }
    }

    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int ncomp = 0;
    std::vector<int> work;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (comp[static_cast<std::size_t>(*it)] >= 0) continue;
        work.push_back(*it);
        comp[static_cast<std::size_t>(*it)] = ncomp;
        while (!work.empty()) {
            const int v = work.back();
            work.pop_back();
            for (int w : rev[static_cast<std::size_t>(v)])
                if (comp[static_cast<std::size_t>(w)] < 0) {
                    comp[static_cast<std::size_t>(w)] = ncomp;
                    work.push_back(w);
                }
        }
        ++ncomp;
    }

    std::vector<char> open(static_cast<std::size_t>(ncomp), 0);
    for (int v = 0; v < n; ++v)
        for (int w : fwd[static_cast<std::size_t>(v)])
            if (comp[static_cast<std::size_t>(v)] != comp[static_cast<std::size_t>(w)])
                open[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] = 1;
    return static_cast<int>(std::count(open.begin(), open.end(), 0));
}

// Zero-tilt generator with row 0 replaced by the normalization constraint.
Eigen::PartialPivLU<Eigen::MatrixXd> bordered_lu(const Eigen::MatrixXd& M) {
    const double scale = M.cwiseAbs().maxCoeff();
    Eigen::MatrixXd B = M / scale;
    B.row(0).setOnes();
    return Eigen::PartialPivLU<Eigen::MatrixXd>(B);
}

double matrix_scale(const Eigen::MatrixXd& M) { return M.cwiseAbs().maxCoeff(); }

void require_unique_stationary(const Eigen::MatrixXd& M) {
    if (M.size() == 0 || matrix_scale(M) == 0.0) throw Error(ErrorCode::SingularSolve, "generator has no transitions");
    const int closed = closed_class_count(M);
    if (closed != 1) {
        std::ostringstream os;
        os << "stationary state not unique: " << closed << " closed classes";
        throw Error(ErrorCode::SingularSolve, os.str());
    }
}

PopulationVector normalized_population(int N, Eigen::VectorXd x) {
    x = x.cwiseMax(0.0);
    const double total = x.sum();
    if (!(total > 0.0) || !std::isfinite(total)) throw Error(ErrorCode::SingularSolve, "stationary solve produced no mass");
    return {N, x / total};
}

} // namespace

PopulationVector steady_state(const TiltedGenerator& gen) {
    if (gen.tilt_R() != 0.0 || gen.tilt_Q() != 0.0)
        throw Error(ErrorCode::DimensionMismatch, "steady_state needs a zero-tilt generator");
    const Eigen::MatrixXd& M = gen.matrix();
    require_unique_stationary(M);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M.rows());
    rhs(0) = 1.0;
    return normalized_population(gen.N(), bordered_lu(M).solve(rhs));
}

double stationarity_residual(const TiltedGenerator& gen, const PopulationVector& P) {
    const double scale = matrix_scale(gen.matrix());
    if (scale == 0.0) return 0.0;
    return (gen.matrix() * P.values).cwiseAbs().maxCoeff() / scale;
}

double dominant_eigenvalue(const TiltedGenerator& gen, const EigenOptions& opts) {
    const Eigen::MatrixXd& M = gen.matrix();
    const Eigen::VectorXd& c = gen.column_sums();
    if (c.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    const auto dim = M.rows();
    const double scale = matrix_scale(M);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
    // Column sums bound the Perron root from above.
    double shift = c.maxCoeff() + 1e-6 * scale;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(shift * I - M);

    Eigen::VectorXd x = Eigen::VectorXd::Constant(dim, 1.0 / static_cast<double>(dim));
    double rho = c.dot(x);
    const double offset = 1e-9 * scale;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        Eigen::VectorXd y = lu.solve(x);
        const double s = y.sum();
        if (!(std::abs(s) > 0.0) || !std::isfinite(s)) break;
        y /= s;
        // 1ᵀM = cᵀ, so cᵀx / 1ᵀx is exact for the eigenvector and first-order in the tilt.
        const double rho_new = c.dot(y);
        const double dx = (y - x).cwiseAbs().sum();
        const double drho = std::abs(rho_new - rho);
        x = std::move(y);
        rho = rho_new;
        // Near zero tilt ρ is a cancellation in cᵀx, so judge it against |c|ᵀx.
        const double rho_scale = std::max(std::abs(rho), c.cwiseAbs().dot(x.cwiseAbs()));
        if (it >= 4 && dx <= opts.tolerance && drho <= opts.tolerance * rho_scale) {
            // Only the Perron vector is nonnegative.
            if (x.minCoeff() < -1e-8 * x.cwiseAbs().maxCoeff()) break;
            return rho;
        }
        // The column-sum bound is loose; once the estimate settles, shift just above it.
        if (it >= 2) {
            const double target = rho + offset;
            if (std::abs(shift - target) > offset) {
                shift = target;
                lu.compute(shift * I - M);
            }
        }
    }
    std::ostringstream os;
    os << "inverse iteration did not converge in " << opts.max_iterations << " iterations (u_Q=" << gen.tilt_Q() << ")";
    throw Error(ErrorCode::ConvergenceFailure, os.str());
}

std::string_view to_string(CumulantMethod m) {
    return m == CumulantMethod::FiniteDifference ? "finite_difference" : "perturbative";
}

CumulantResult cumulants_fd(const JumpList& jumps, double step) {
    if (!(step > 0.0)) throw Error(ErrorCode::StepTooLarge, "finite-difference step must be > 0");
    const double factor = std::exp(2.0 * step * jumps.max_energy(BathLabel::Q));
    if (!(factor <= kMaxTiltFactor)) {
        std::ostringstream os;
        os << "step " << step << " gives tilt factor " << factor << " > " << kMaxTiltFactor;
        throw Error(ErrorCode::StepTooLarge, os.str());
    }
    auto cgf = [&](double u) { return u == 0.0 ? 0.0 : dominant_eigenvalue(build_generator(jumps, 0.0, u)); };

    struct Diffs {
        double d1, d2, d3;
    };
    auto diffs = [&](double h) {
        const double gp = cgf(h), gm = cgf(-h), gp2 = cgf(2 * h), gm2 = cgf(-2 * h);
        return Diffs{(gp - gm) / (2 * h), (gp + gm) / (h * h), (gp2 - 2 * gp + 2 * gm - gm2) / (2 * h * h * h)};
    };
    const Diffs coarse = diffs(step);
    const Diffs fine = diffs(0.5 * step);
    auto richardson = [](double f, double c) { return (4.0 * f - c) / 3.0; };

    CumulantResult r;
    r.method = CumulantMethod::FiniteDifference;
    r.truncation_N = jumps.N;
    r.current = richardson(fine.d1, coarse.d1);
    r.noise = richardson(fine.d2, coarse.d2);
    r.skewness = richardson(fine.d3, coarse.d3);
    return r;
}

CumulantResult cumulants_fd(const RateSet& rates, const DressedSpectrum& spectrum, double step) {
    return cumulants_fd(collect_jumps(rates, spectrum), step);
}

CumulantResult cumulants_perturbative(const JumpList& jumps, PopulationVector* stationary) {
    const auto dim = static_cast<Eigen::Index>(jumps.dimension());
    // A[k] = (1/k!) ∂^k M / ∂u_Q^k at zero tilt.
    std::array<Eigen::MatrixXd, 4> A;
    for (auto& a : A) a = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& j : jumps.jumps) {
        A[0](j.to, j.from) += j.rate;
        A[0](j.from, j.from) -= j.rate;
        if (j.bath != BathLabel::Q) continue;
        const double e = j.direction * j.energy;
        A[1](j.to, j.from) += j.rate * e;
        A[2](j.to, j.from) += j.rate * e * e / 2.0;
        A[3](j.to, j.from) += j.rate * e * e * e / 6.0;
    }
    require_unique_stationary(A[0]);
    const double scale = matrix_scale(A[0]);
    const auto lu = bordered_lu(A[0]);

    std::array<Eigen::VectorXd, 4> x;
    std::array<double, 4> rho{0.0, 0.0, 0.0, 0.0};
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    rhs(0) = 1.0;
    x[0] = normalized_population(jumps.N, lu.solve(rhs)).values;
    if (stationary) *stationary = {jumps.N, x[0]};
    for (int k = 1; k <= 3; ++k) {
        double r = 0.0;
        for (int i = 1; i <= k; ++i) r += A[static_cast<std::size_t>(i)].colwise().sum().dot(x[static_cast<std::size_t>(k - i)]);
        rho[static_cast<std::size_t>(k)] = r;
        if (k == 3) break;
        rhs.setZero();
        for (int i = 1; i <= k; ++i)
            rhs += rho[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(k - i)] -
                   A[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(k - i)];
        rhs /= scale;
        rhs(0) = 0.0;
        x[static_cast<std::size_t>(k)] = lu.solve(rhs);
    }

    CumulantResult out;
    out.method = CumulantMethod::Perturbative;
    out.truncation_N = jumps.N;
    out.current = rho[1];
    out.noise = 2.0 * rho[2];
    out.skewness = 6.0 * rho[3];
    return out;
}

CumulantResult cumulants_perturbative(const RateSet& rates, const DressedSpectrum& spectrum) {
    return cumulants_perturbative(collect_jumps(rates, spectrum));
}

double direct_current(const PopulationVector& P, const RateSet& rates, const DressedSpectrum& spectrum) {
    if (P.N != rates.N || rates.N != spectrum.N) throw Error(ErrorCode::DimensionMismatch, "inconsistent truncation");
    double J = 0.0;
    const int N = rates.N;
    for (int sigma = 0; sigma < 2; ++sigma)
        for (int m = 0; m <= N; ++m)
            for (int mp = m & 1; mp <= N; mp += 2) {
                const RatePair& r = rates.qubit_at(m, mp, sigma);
                if (r.up == 0.0 && r.down == 0.0) continue;
                J += spectrum.gap(m, sigma, mp) * (r.down * P(sigma, m) - r.up * P(1 - sigma, mp));
            }
    return J;
}

double gross_traffic(const JumpList& jumps, const PopulationVector& P, int k) {
    double s = 0.0;
    for (const auto& j : jumps.jumps)
        if (j.bath == BathLabel::Q) s += j.rate * std::pow(j.energy, k) * P.values(j.from);
    return s;
}

} // namespace qrheat
