// overlap.cpp — Closed-form squeezed-state overlaps with adaptive-precision summation

#include "qrheat/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <mpfr.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "qrheat/error.hpp"

namespace qrheat {

SqueezeMismatch SqueezeMismatch::from_delta_alpha(double delta_alpha) {
    return {delta_alpha, std::cosh(delta_alpha), -std::sinh(delta_alpha)};
}

SqueezeMismatch SqueezeMismatch::between(const BranchData& bra, const BranchData& ket) {
    return from_delta_alpha(bra.alpha - ket.alpha);
}

namespace {

class MpfrVar {
public:
    explicit MpfrVar(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    ~MpfrVar() { mpfr_clear(v_); }
    MpfrVar(const MpfrVar&) = delete;
    MpfrVar& operator=(const MpfrVar&) = delete;

    mpfr_ptr get() noexcept { return v_; }

private:
    mpfr_t v_;
};

// Evaluates the regrouped closed form. Holds shared log-factorials and MPFR scratch so
// that table construction amortizes them over all entries.
class OverlapEvaluator {
public:
    OverlapEvaluator(int max_index, const SqueezeMismatch& sq)
        : sq_(sq), log_fact_(static_cast<std::size_t>(max_index + 1)), sum_(64), term_(64), inv_v2_(64) {
        for (int n = 0; n <= max_index; ++n) log_fact_[static_cast<std::size_t>(n)] = std::lgamma(n + 1.0);
        if (sq_.v != 0.0) {
            log_x_ = std::log(std::abs(sq_.v) / (2.0 * sq_.u));
            log_u_ = std::log(sq_.u);
        }
    }

    double operator()(int m, int mp) {
        if (((m - mp) & 1) != 0) return 0.0;
        if (sq_.v == 0.0) return m == mp ? 1.0 : 0.0;

        const int l_min = m & 1;
        const int l_max = std::min(m, mp);
        const double log_pref = 0.5 * (lf(m) + lf(mp)) - 0.5 * log_u_;

        double max_log = -HUGE_VAL;
        for (int l = l_min; l <= l_max; l += 2) max_log = std::max(max_log, log_term(m, mp, l, log_pref));
        const double count = (l_max - l_min) / 2 + 1;
        const double log_abs_sum_bound = max_log + std::log(count);

        // Below this bound the double sum has absolute error ≲ 1e-15.
        if (log_abs_sum_bound < std::log(8.0)) return sum_double(m, mp, l_min, l_max, log_pref);
        return sum_mpfr(m, mp, l_min, l_max, log_pref, log_abs_sum_bound);
    }

private:
    double lf(int n) const { return log_fact_[static_cast<std::size_t>(n)]; }

    double log_term(int m, int mp, int l, double log_pref) const {
        const int j = (m - l) / 2;
        const int k = (mp - l) / 2;
        return log_pref + (j + k) * log_x_ - l * log_u_ - lf(j) - lf(k) - lf(l);
    }

    // (−1)^j · sign(v)^{j+k}
    int term_sign(int m, int mp, int l) const {
        const int j = (m - l) / 2;
        const int k = (mp - l) / 2;
        int s = (j & 1) ? -1 : 1;
        if (sq_.v < 0.0 && ((j + k) & 1)) s = -s;
        return s;
    }

    double sum_double(int m, int mp, int l_min, int l_max, double log_pref) const {
        double s = 0.0;
        for (int l = l_min; l <= l_max; l += 2) s += term_sign(m, mp, l) * std::exp(log_term(m, mp, l, log_pref));
        return s;
    }

    double sum_mpfr(int m, int mp, int l_min, int l_max, double log_pref, double log_abs_sum_bound) {
        const auto prec = static_cast<mpfr_prec_t>(64 + std::ceil(log_abs_sum_bound / std::log(2.0)) + 8);
        ensure_precision(prec);

        // Sum of t_l / t_{l_min}: successive ratio is −4jk / (v² (l+1)(l+2)).
        mpfr_set_ui(sum_.get(), 0, MPFR_RNDN);
        mpfr_set_ui(term_.get(), 1, MPFR_RNDN);
        for (int l = l_min; l <= l_max; l += 2) {
            mpfr_add(sum_.get(), sum_.get(), term_.get(), MPFR_RNDN);
            const long j = (m - l) / 2;
            const long k = (mp - l) / 2;
            if (l + 2 > l_max) break;
            mpfr_mul_si(term_.get(), term_.get(), -4 * j * k, MPFR_RNDN);
            mpfr_div_ui(term_.get(), term_.get(), static_cast<unsigned long>((l + 1) * (l + 2)), MPFR_RNDN);
            mpfr_mul(term_.get(), term_.get(), inv_v2_.get(), MPFR_RNDN);
        }
        if (mpfr_zero_p(sum_.get())) return 0.0;
        long exp2 = 0;
        const double mant = mpfr_get_d_2exp(&exp2, sum_.get(), MPFR_RNDN);
        const double log_first = log_term(m, mp, l_min, log_pref);
        return term_sign(m, mp, l_min) * mant * std::exp(log_first + static_cast<double>(exp2) * std::log(2.0));
    }

    // Precision depends only on the entry, never on evaluation order.
    void ensure_precision(mpfr_prec_t prec) {
        prec = (prec + 31) / 32 * 32;
        if (prec == current_prec_) return;
        current_prec_ = prec;
        mpfr_set_prec(sum_.get(), prec);
        mpfr_set_prec(term_.get(), prec);
        mpfr_set_prec(inv_v2_.get(), prec);
        mpfr_set_d(inv_v2_.get(), sq_.v, MPFR_RNDN);
        mpfr_sqr(inv_v2_.get(), inv_v2_.get(), MPFR_RNDN);
        mpfr_ui_div(inv_v2_.get(), 1, inv_v2_.get(), MPFR_RNDN);
    }

    SqueezeMismatch sq_;
    std::vector<double> log_fact_;
    double log_x_{0.0};
    double log_u_{0.0};
    MpfrVar sum_;
    MpfrVar term_;
    MpfrVar inv_v2_;
    mpfr_prec_t current_prec_{0};
};

void check_window(int m, int mp) {
    if (m < 0 || mp < 0) throw Error(ErrorCode::DimensionMismatch, "overlap indices must be >= 0");
    if (m > kOverlapStableWindow || mp > kOverlapStableWindow) {
        std::ostringstream os;
        os << "overlap index (" << m << ", " << mp << ") exceeds stable window " << kOverlapStableWindow;
        throw Error(ErrorCode::OverflowRisk, os.str());
    }
}

} // namespace

double overlap(int m, int m_prime, const SqueezeMismatch& sq) {
    check_window(m, m_prime);
    OverlapEvaluator eval(std::max(m, m_prime), sq);
    return eval(m, m_prime);
}

double OverlapTable::row_square_sum(int m) const {
    double s = 0.0;
    for (int mp = 0; mp <= N_; ++mp) s += (*this)(m, mp) * (*this)(m, mp);
    return s;
}

void OverlapTable::write_csv(std::ostream& os) const {
    const auto old_prec = os.precision(17);
    os << "m,m_prime,G\n";
    for (int m = 0; m <= N_; ++m)
        for (int mp = 0; mp <= N_; ++mp) os << m << ',' << mp << ',' << (*this)(m, mp) << '\n';
    os.precision(old_prec);
}

OverlapTable overlap_table(int N, const SqueezeMismatch& sq) {
    if (N < 0) throw Error(ErrorCode::DimensionMismatch, "overlap table size must be >= 0");
    check_window(N, N);
    OverlapEvaluator eval(N, sq);
    const auto size = static_cast<std::size_t>(N + 1);
    std::vector<double> entries(size * size, 0.0);
    for (int m = 0; m <= N; ++m)
        for (int mp = m & 1; mp <= N; mp += 2) entries[static_cast<std::size_t>(m) * size + static_cast<std::size_t>(mp)] = eval(m, mp);
    return OverlapTable(N, sq, std::move(entries));
}

OverlapPair overlap_pair(int N, const BranchData& branch0, const BranchData& branch1) {
    OverlapPair pair;
    pair.tables[0] = overlap_table(N, SqueezeMismatch::between(branch0, branch1));
    pair.tables[1] = overlap_table(N, SqueezeMismatch::between(branch1, branch0));
    return pair;
}

double brute_force_overlap(int m, int m_prime, double delta_alpha, int N_bare) {
    if (m < 0 || m_prime < 0) throw Error(ErrorCode::DimensionMismatch, "overlap indices must be >= 0");
    if (N_bare < 4 * std::max(m, m_prime) + 100) {
        std::ostringstream os;
        os << "N_bare=" << N_bare << " too small for (" << m << ", " << m_prime << ")";
        throw Error(ErrorCode::TruncationTooSmall, os.str());
    }
    const int dim = N_bare + 1;
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n + 2 < dim; ++n) {
        const double a2 = 0.5 * delta_alpha * std::sqrt((n + 1.0) * (n + 2.0));
        gen(n + 2, n) = a2;  // a†²
        gen(n, n + 2) = -a2; // −a²
    }
    const Eigen::MatrixXd s = gen.exp();
    return s(m, m_prime);
}

} // namespace qrheat
