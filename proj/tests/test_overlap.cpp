// test_overlap.cpp — Closed-form overlaps against the matrix-exponential oracle

#include <doctest.h>

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qrheat/error.hpp"
#include "qrheat/overlap.hpp"

using namespace qrheat;

namespace {

OverlapPair pair_for(double lambda, int N) {
    const auto p = validate_params({1.0, 1.0, lambda});
    return overlap_pair(N, build_branch(p, 0), build_branch(p, 1));
}

SqueezeMismatch mismatch_for(double lambda, int sigma) {
    const auto p = validate_params({1.0, 1.0, lambda});
    const BranchData b0 = build_branch(p, 0), b1 = build_branch(p, 1);
    return sigma == 1 ? SqueezeMismatch::between(b1, b0) : SqueezeMismatch::between(b0, b1);
}

} // namespace

TEST_CASE("selection rule is an exact zero") {
    const SqueezeMismatch sq = mismatch_for(0.2, 1);
    for (int m = 0; m < 30; ++m)
        for (int mp = 0; mp < 30; ++mp)
            if ((m - mp) % 2) CHECK(overlap(m, mp, sq) == 0.0);
    const OverlapTable t = overlap_table(40, sq);
    for (int m = 0; m <= 40; ++m)
        for (int mp = 0; mp <= 40; ++mp)
            if ((m - mp) % 2) CHECK(t(m, mp) == 0.0);
}

TEST_CASE("zero mismatch gives the identity") {
    const SqueezeMismatch sq = SqueezeMismatch::from_delta_alpha(0.0);
    const OverlapTable t = overlap_table(12, sq);
    for (int m = 0; m <= 12; ++m)
        for (int mp = 0; mp <= 12; ++mp) CHECK(t(m, mp) == (m == mp ? 1.0 : 0.0));
    CHECK(brute_force_overlap(3, 3, 0.0, 120) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(brute_force_overlap(3, 5, 0.0, 120)) < 1e-15);
}

TEST_CASE("vacuum overlap at lambda = 0.2") {
    const SqueezeMismatch sq = mismatch_for(0.2, 1);
    CHECK(sq.delta_alpha == doctest::Approx(0.549306).epsilon(1e-5));
    CHECK(sq.u == doctest::Approx(1.154700).epsilon(1e-5));
    CHECK(overlap(0, 0, sq) == doctest::Approx(1.0 / std::sqrt(sq.u)).epsilon(1e-15));
    CHECK(overlap(0, 0, sq) == doctest::Approx(0.930605).epsilon(1e-6));
    const double oracle = brute_force_overlap(0, 0, sq.delta_alpha, 200);
    CHECK(std::abs(overlap(0, 0, sq) - oracle) < 1e-12);
    CHECK(overlap_table(0, sq)(0, 0) == overlap(0, 0, sq));
    CHECK(std::abs(brute_force_overlap(1, 0, 0.7, 120)) < 1e-14);
}

TEST_CASE("closed form agrees with the oracle for m, m' <= 20") {
    for (double lam : {0.05, 0.1, 0.2}) {
        for (int sigma = 0; sigma < 2; ++sigma) {
            const SqueezeMismatch sq = mismatch_for(lam, sigma);
            const OverlapTable t = overlap_table(20, sq);
            const int N_bare = 4 * 20 + 100;
            const int dim = N_bare + 1;
            Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(dim, dim);
            for (int n = 0; n + 2 < dim; ++n) {
                const double a2 = 0.5 * sq.delta_alpha * std::sqrt((n + 1.0) * (n + 2.0));
                gen(n + 2, n) = a2;
                gen(n, n + 2) = -a2;
            }
            const Eigen::MatrixXd S = gen.exp();
            CHECK(brute_force_overlap(4, 2, sq.delta_alpha, N_bare) == S(4, 2));
            for (int m = 0; m <= 20; ++m)
                for (int mp = 0; mp <= 20; ++mp) {
                    INFO("lambda=" << lam << " sigma=" << sigma << " m=" << m << " m'=" << mp);
                    CHECK(std::abs(t(m, mp) - S(m, mp)) <= 1e-8);
                    CHECK(t(m, mp) == overlap(m, mp, sq));
                }
        }
    }
}

TEST_CASE("high-index entries stay accurate where the alternating sum cancels") {
    const SqueezeMismatch sq = mismatch_for(0.2, 1);
    const int N_bare = 4 * 120 + 100;
    for (auto [m, mp] : {std::pair{120, 120}, std::pair{118, 96}, std::pair{61, 101}}) {
        INFO("m=" << m << " m'=" << mp);
        CHECK(std::abs(overlap(m, mp, sq) - brute_force_overlap(m, mp, sq.delta_alpha, N_bare)) <= 1e-9);
    }
}

TEST_CASE("unitarity of the squeeze operator") {
    const OverlapPair G = pair_for(0.2, 60);
    CHECK(std::abs(G[1].row_square_sum(0) - 1.0) < 1e-10);
    CHECK(std::abs(G[0].row_square_sum(0) - 1.0) < 1e-10);
    for (int m = 0; m <= 60; ++m) CHECK(G[1].row_square_sum(m) <= 1.0 + 1e-12);
    // Rows fill up as the table grows.
    const OverlapPair big = pair_for(0.2, 160);
    CHECK(big[1].row_square_sum(20) > G[1].row_square_sum(20));
    CHECK(std::abs(big[1].row_square_sum(20) - 1.0) < 1e-10);
}

TEST_CASE("opposite-branch tables are transposes and rate products are symmetric") {
    const OverlapPair G = pair_for(0.15, 20);
    for (int m = 0; m <= 20; ++m)
        for (int mp = 0; mp <= 20; ++mp) {
            CHECK(G[0](mp, m) == doctest::Approx(G[1](m, mp)).epsilon(1e-13));
            const double fwd = G[0](mp, m) * G[1](m, mp);
            const double rev = G[1](m, mp) * G[0](mp, m);
            CHECK(fwd == doctest::Approx(rev).epsilon(1e-14));
            CHECK(fwd >= 0.0);
        }
}

TEST_CASE("weak-coupling expansion holds to second order") {
    auto residual = [](double lam) {
        const OverlapPair G = pair_for(lam, 10);
        double worst = 0.0;
        for (int sigma = 0; sigma < 2; ++sigma) {
            const double sgn = sigma == 0 ? 1.0 : -1.0;
            for (int m = 0; m <= 10; ++m)
                for (int mp = 0; mp <= 10; ++mp) {
                    double approx = m == mp ? 1.0 : 0.0;
                    if (m == mp - 2) approx += sgn * lam * std::sqrt(mp * (mp - 1.0));
                    if (m == mp + 2) approx -= sgn * lam * std::sqrt(m * (m - 1.0));
                    worst = std::max(worst, std::abs(G[sigma](m, mp) - approx));
                }
        }
        return worst;
    };
    // The leftover is the second-order term (Δα²/8)⟨m|K²|m'⟩, K = a†² − a², with Δα ≈ ∓2λ.
    const int d = 16;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d, d);
    for (int n = 0; n + 2 < d; ++n) {
        K(n + 2, n) = std::sqrt((n + 1.0) * (n + 2.0));
        K(n, n + 2) = -K(n + 2, n);
    }
    const double second = 0.5 * 0.01 * 0.01 * (K * K).topLeftCorner(11, 11).cwiseAbs().maxCoeff();
    CHECK(residual(0.01) == doctest::Approx(second).epsilon(0.05));
    std::vector<double> x, y;
    for (double lam : {1e-3, 2e-3, 4e-3, 1e-2}) {
        x.push_back(std::log(lam));
        y.push_back(std::log(residual(lam)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / x.size();
        my += y[i] / y.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    CHECK(sxy / sxx >= 1.9);
}

TEST_CASE("overlap guards") {
    const SqueezeMismatch sq = mismatch_for(0.1, 1);
    try {
        overlap(600, 600, sq);
        FAIL("expected OverflowRisk");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OverflowRisk);
    }
    try {
        brute_force_overlap(10, 10, 0.3, 50);
        FAIL("expected TruncationTooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TruncationTooSmall);
    }
}
