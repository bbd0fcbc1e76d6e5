// sweep.cpp — Config parsing, presets, sweep execution and output

#include "qrheat/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <mpfr.h>
#include <json.hpp>

#include "qrheat/error.hpp"

namespace qrheat {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ' ' || ch == '\t' || ch == ',') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

[[noreturn]] void parse_fail(int line, std::string_view key, const std::string& why) {
    std::ostringstream os;
    os << "line " << line;
    if (!key.empty()) os << ", field '" << key << "'";
    os << ": " << why;
    throw Error(ErrorCode::ParseError, os.str());
}

double parse_double(std::string_view tok, int line, std::string_view key) {
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        parse_fail(line, key, "expected a number, got '" + std::string(tok) + "'");
    return v;
}

int parse_int(std::string_view tok, int line, std::string_view key) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        parse_fail(line, key, "expected an integer, got '" + std::string(tok) + "'");
    return v;
}

bool parse_bool(std::string_view tok, int line, std::string_view key) {
    if (tok == "true" || tok == "yes" || tok == "1") return true;
    if (tok == "false" || tok == "no" || tok == "0") return false;
    parse_fail(line, key, "expected true/false, got '" + std::string(tok) + "'");
}

std::optional<AxisName> axis_from(std::string_view s) {
    if (s == "delta_T") return AxisName::DeltaT;
    if (s == "lambda") return AxisName::Lambda;
    if (s == "T_R") return AxisName::TR;
    if (s == "T_Q") return AxisName::TQ;
    if (s == "T0") return AxisName::T0;
    return std::nullopt;
}

std::optional<Observable> observable_from(std::string_view s) {
    if (s == "current") return Observable::Current;
    if (s == "noise") return Observable::Noise;
    if (s == "skewness") return Observable::Skewness;
    if (s == "rectification") return Observable::Rectification;
    if (s == "xi_squared") return Observable::XiSquared;
    if (s == "weak_current") return Observable::WeakCurrent;
    return std::nullopt;
}

AxisSpec linear_axis(AxisName name, double min, double max, int count) {
    AxisSpec a;
    a.name = name;
    a.min = min;
    a.max = max;
    a.count = count;
    for (int i = 0; i < count; ++i)
        a.values.push_back((min * (count - 1 - i) + max * i) / (count - 1));
    return a;
}

AxisSpec list_axis(AxisName name, std::vector<double> values) {
    AxisSpec a;
    a.name = name;
    a.is_list = true;
    a.count = static_cast<int>(values.size());
    if (!values.empty()) {
        a.min = values.front();
        a.max = values.back();
    }
    a.values = std::move(values);
    return a;
}

AxisSpec parse_axis(std::string_view value, int line) {
    const auto tok = split_tokens(value);
    if (tok.size() < 2) parse_fail(line, "axis", "expected '<name> linear <min> <max> <count>' or '<name> list <v>...'");
    const auto name = axis_from(tok[0]);
    if (!name) parse_fail(line, "axis", "unknown axis '" + tok[0] + "' (delta_T, lambda, T_R, T_Q, T0)");
    if (tok[1] == "linear") {
        if (tok.size() != 5) parse_fail(line, "axis", "linear axis needs <min> <max> <count>");
        const int count = parse_int(tok[4], line, "axis");
        const double lo = parse_double(tok[2], line, "axis"), hi = parse_double(tok[3], line, "axis");
        if (count < 1 || count > 100000) {
            AxisSpec a;
            a.name = *name;
            a.min = lo;
            a.max = hi;
            a.count = count;
            return a; // rejected by validation with a full report
        }
        return linear_axis(*name, lo, hi, count);
    }
    if (tok[1] == "list") {
        std::vector<double> v;
        for (std::size_t i = 2; i < tok.size(); ++i) v.push_back(parse_double(tok[i], line, "axis"));
        return list_axis(*name, std::move(v));
    }
    parse_fail(line, "axis", "spacing must be 'linear' or 'list', got '" + tok[1] + "'");
}

const AxisSpec* find_axis(const SweepConfig& cfg, AxisName n) {
    for (const auto& a : cfg.axes)
        if (a.name == n) return &a;
    return nullptr;
}

// Smallest and largest value a parameter takes over the grid.
std::pair<double, double> range_of(const SweepConfig& cfg, AxisName n, double fixed) {
    if (const AxisSpec* a = find_axis(cfg, n); a && !a->values.empty())
        return {*std::min_element(a->values.begin(), a->values.end()), *std::max_element(a->values.begin(), a->values.end())};
    return {fixed, fixed};
}

double clamp_temperature(double T) { return (T < 0.0 && T >= -kTemperatureFloor) ? 0.0 : T; }

std::string_view unit_of(Observable o) {
    switch (o) {
    case Observable::Current: return "omega_a^2";
    case Observable::Noise: return "omega_a^3";
    case Observable::Skewness: return "omega_a^4";
    case Observable::Rectification: return "1";
    case Observable::XiSquared: return "1";
    case Observable::WeakCurrent: return "omega_a^2";
    }
    return "1";
}

} // namespace

std::string_view to_string(AxisName a) {
    switch (a) {
    case AxisName::DeltaT: return "delta_T";
    case AxisName::Lambda: return "lambda";
    case AxisName::TR: return "T_R";
    case AxisName::TQ: return "T_Q";
    case AxisName::T0: return "T0";
    }
    return "?";
}

std::string_view to_string(Observable o) {
    switch (o) {
    case Observable::Current: return "current";
    case Observable::Noise: return "noise";
    case Observable::Skewness: return "skewness";
    case Observable::Rectification: return "rectification";
    case Observable::XiSquared: return "xi_squared";
    case Observable::WeakCurrent: return "weak_current";
    }
    return "?";
}

bool SweepConfig::wants(Observable o) const { return std::find(outputs.begin(), outputs.end(), o) != outputs.end(); }

std::size_t SweepConfig::point_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

SweepConfig parse_config(std::string_view text, const SweepConfig& base) {
    SweepConfig cfg = base;
    bool axes_reset = false;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) parse_fail(line_no, {}, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) parse_fail(line_no, {}, "missing key before '='");
        if (value.empty()) parse_fail(line_no, key, "missing value");

        auto num = [&] { return parse_double(value, line_no, key); };
        auto integer = [&] { return parse_int(value, line_no, key); };

        if (key == "name") cfg.name = std::string(value);
        else if (key == "omega_a") cfg.model.omega_a = num();
        else if (key == "epsilon") cfg.model.epsilon = num();
        else if (key == "lambda") cfg.model.lambda = num();
        else if (key == "T0") cfg.T0 = num();
        else if (key == "delta_T") cfg.delta_T = num();
        else if (key == "T_R") cfg.T_R = num();
        else if (key == "T_Q") cfg.T_Q = num();
        else if (key == "alpha") cfg.bath_R.alpha_u = cfg.bath_Q.alpha_u = num();
        else if (key == "alpha_R") cfg.bath_R.alpha_u = num();
        else if (key == "alpha_Q") cfg.bath_Q.alpha_u = num();
        else if (key == "omega_c") cfg.bath_R.omega_c = cfg.bath_Q.omega_c = num();
        else if (key == "omega_c_R") cfg.bath_R.omega_c = num();
        else if (key == "omega_c_Q") cfg.bath_Q.omega_c = num();
        else if (key == "workers") cfg.workers = integer();
        else if (key == "fd_step") cfg.fd_step = num();
        else if (key == "theta_grid") cfg.theta_grid = integer();
        else if (key == "scale_current_by_lambda2") cfg.scale_current_by_lambda2 = parse_bool(value, line_no, key);
        else if (key == "truncation.initial_N") cfg.truncation.initial_N = integer();
        else if (key == "truncation.step") cfg.truncation.step = integer();
        else if (key == "truncation.max_N") cfg.truncation.max_N = integer();
        else if (key == "truncation.tol") cfg.truncation.tol = num();
        else if (key == "cumulant_method") {
            if (value == "perturbative") cfg.method = CumulantMethod::Perturbative;
            else if (value == "finite_difference") cfg.method = CumulantMethod::FiniteDifference;
            else parse_fail(line_no, key, "expected 'perturbative' or 'finite_difference'");
        } else if (key == "outputs") {
            cfg.outputs.clear();
            for (const auto& t : split_tokens(value)) {
                const auto o = observable_from(t);
                if (!o) parse_fail(line_no, key, "unknown observable '" + t + "'");
                if (!cfg.wants(*o)) cfg.outputs.push_back(*o);
            }
        } else if (key == "weak_components") {
            cfg.weak_components.clear();
            for (const auto& t : split_tokens(value)) cfg.weak_components.push_back(parse_int(t, line_no, key));
        } else if (key == "axis") {
            if (!axes_reset) {
                cfg.axes.clear();
                axes_reset = true;
            }
            cfg.axes.push_back(parse_axis(value, line_no));
        } else {
            parse_fail(line_no, key, "unknown key");
        }
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const SweepConfig& cfg) {
    std::vector<std::string> bad;
    auto fail = [&](const std::string& s) { bad.push_back(s); };

    if (cfg.axes.size() > 2) fail("at most 2 grid axes allowed (got " + std::to_string(cfg.axes.size()) + ")");
    std::set<AxisName> seen;
    for (const auto& a : cfg.axes) {
        const std::string n(to_string(a.name));
        if (!seen.insert(a.name).second) fail("axis " + n + " given twice");
        if (a.is_list) {
            if (a.values.empty()) fail("axis " + n + ": list needs at least one value");
            for (std::size_t i = 1; i < a.values.size(); ++i)
                if (!(a.values[i - 1] < a.values[i])) {
                    fail("axis " + n + ": list values must be strictly increasing");
                    break;
                }
        } else {
            if (a.count < 2) fail("axis " + n + ": count must be >= 2 (got " + std::to_string(a.count) + ")");
            if (!(a.min < a.max)) fail("axis " + n + ": min must be < max");
        }
    }

    if (!(cfg.model.omega_a > 0.0)) fail("omega_a must be > 0");
    const auto [lam_lo, lam_hi] = range_of(cfg, AxisName::Lambda, cfg.model.lambda);
    const double lam_bound = cfg.model.omega_a * (0.25 - kCouplingMargin);
    if (lam_lo < 0.0) fail("lambda must be >= 0 (got " + fmt17(lam_lo) + ")");
    if (cfg.model.omega_a > 0.0 && !(lam_hi <= lam_bound))
        fail("lambda must be < omega_a/4 (max " + fmt17(lam_bound) + ", got " + fmt17(lam_hi) + ")");

    const bool tr_axis = find_axis(cfg, AxisName::TR), tq_axis = find_axis(cfg, AxisName::TQ);
    const bool tr_fixed = tr_axis || cfg.T_R.has_value(), tq_fixed = tq_axis || cfg.T_Q.has_value();
    const auto [t0_lo, t0_hi] = range_of(cfg, AxisName::T0, cfg.T0);
    (void)t0_hi;
    const auto [dt_lo, dt_hi] = range_of(cfg, AxisName::DeltaT, cfg.delta_T);
    if (t0_lo < 0.0) fail("T0 must be >= 0");
    if (!tr_fixed && t0_lo + 0.5 * dt_lo < -kTemperatureFloor) fail("delta_T below -2*T0 makes T_R negative");
    if (!tq_fixed && t0_lo - 0.5 * dt_hi < -kTemperatureFloor) fail("delta_T above 2*T0 makes T_Q negative");
    if (tr_fixed && range_of(cfg, AxisName::TR, cfg.T_R.value_or(0.0)).first < 0.0) fail("T_R must be >= 0");
    if (tq_fixed && range_of(cfg, AxisName::TQ, cfg.T_Q.value_or(0.0)).first < 0.0) fail("T_Q must be >= 0");
    if (cfg.wants(Observable::Rectification)) {
        if (tr_fixed || tq_fixed) fail("rectification needs the T0/delta_T parameterization (no T_R/T_Q)");
        if (!tr_fixed && t0_lo - 0.5 * std::max(std::abs(dt_lo), std::abs(dt_hi)) < -kTemperatureFloor)
            fail("rectification: reversed bias -delta_T leaves the allowed temperature range");
    }

    for (const BathSpec* b : {&cfg.bath_R, &cfg.bath_Q}) {
        const std::string l = b->label == BathLabel::R ? "R" : "Q";
        if (!(b->alpha_u >= 0.0)) fail("alpha_" + l + " must be >= 0");
        if (!(b->omega_c > 0.0)) fail("omega_c_" + l + " must be > 0");
    }
    if (cfg.outputs.empty()) fail("outputs must name at least one observable");
    if (cfg.workers < 1) fail("workers must be >= 1");
    if (!(cfg.fd_step > 0.0)) fail("fd_step must be > 0");
    if (cfg.theta_grid < 4) fail("theta_grid must be >= 4");
    for (int m : cfg.weak_components)
        if (m < 2) fail("weak_components entries must be >= 2");
    try {
        validate_policy(cfg.truncation);
    } catch (const Error& e) {
        fail(e.what());
    }

    if (!bad.empty()) {
        std::ostringstream os;
        os << bad.size() << " problem(s):";
        for (const auto& b : bad) os << "\n  - " << b;
        throw Error(ErrorCode::ValidationError, os.str());
    }
}

std::vector<std::string> config_warnings(const SweepConfig& cfg) {
    std::vector<std::string> w;
    if (cfg.bath_R.alpha_u > 1e-2 || cfg.bath_Q.alpha_u > 1e-2)
        w.push_back("bath coupling alpha > 1e-2: the weak system-bath (Born-Markov) description may not hold");
    if (cfg.wants(Observable::WeakCurrent) && range_of(cfg, AxisName::Lambda, cfg.model.lambda).second > 0.02)
        w.push_back("weak_current requested with lambda > 0.02: the leading-order formula is outside its regime");
    return w;
}

std::vector<std::string> preset_names() {
    return {"fig2a", "fig2b", "fig2e", "fig3", "fig4a", "fig4b", "fig5a", "fig5b"};
}

SweepConfig figure_preset(std::string_view name) {
    SweepConfig c;
    c.name = std::string(name);
    const AxisSpec lambda_map = linear_axis(AxisName::Lambda, 0.004, 0.22, 49);
    const AxisSpec bias_map = linear_axis(AxisName::DeltaT, 0.0, 2.0, 81);
    if (name == "fig2a") {
        c.axes = {list_axis(AxisName::Lambda, {0.001, 0.01, 0.1}), linear_axis(AxisName::DeltaT, -2.0, 2.0, 81)};
        c.outputs = {Observable::Current};
        c.scale_current_by_lambda2 = true;
    } else if (name == "fig2b") {
        c.axes = {lambda_map, bias_map};
        c.outputs = {Observable::Current};
    } else if (name == "fig2e") {
        c.model.lambda = 0.001;
        c.axes = {bias_map};
        c.outputs = {Observable::Current, Observable::WeakCurrent};
        c.weak_components = {2, 3};
    } else if (name == "fig3") {
        c.axes = {lambda_map, linear_axis(AxisName::DeltaT, 0.025, 2.0, 80)};
        c.outputs = {Observable::Rectification};
    } else if (name == "fig4a") {
        c.axes = {lambda_map, bias_map};
        c.outputs = {Observable::Noise};
    } else if (name == "fig4b") {
        c.axes = {lambda_map, bias_map};
        c.outputs = {Observable::Skewness};
    } else if (name == "fig5a") {
        c.axes = {linear_axis(AxisName::Lambda, 0.0, 0.22, 23), linear_axis(AxisName::T0, 0.0, 2.0, 41)};
        c.outputs = {Observable::XiSquared};
    } else if (name == "fig5b") {
        c.model.lambda = 0.2;
        c.axes = {linear_axis(AxisName::TR, 0.0, 2.0, 41), linear_axis(AxisName::TQ, 0.0, 2.0, 41)};
        c.outputs = {Observable::XiSquared};
    } else {
        std::string known;
        for (const auto& n : preset_names()) known += " " + n;
        throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'; known:" + known);
    }
    return c;
}

SweepPoint sweep_point(const SweepConfig& cfg, std::size_t index) {
    std::vector<double> axis_values;
    SystemParams p = cfg.model;
    double T0 = cfg.T0, dT = cfg.delta_T;
    std::optional<double> TR = cfg.T_R, TQ = cfg.T_Q;

    std::size_t stride = cfg.point_count();
    for (const auto& a : cfg.axes) {
        stride /= a.values.size();
        const double v = a.values[(index / stride) % a.values.size()];
        axis_values.push_back(v);
        switch (a.name) {
        case AxisName::DeltaT: dT = v; break;
        case AxisName::Lambda: p.lambda = v; break;
        case AxisName::TR: TR = v; break;
        case AxisName::TQ: TQ = v; break;
        case AxisName::T0: T0 = v; break;
        }
    }
    BathSpec bR = cfg.bath_R, bQ = cfg.bath_Q;
    bR.T = clamp_temperature(TR.value_or(T0 + 0.5 * dT));
    bQ.T = clamp_temperature(TQ.value_or(T0 - 0.5 * dT));
    validate_bath(bR);
    validate_bath(bQ);
    return SweepPoint{std::move(axis_values), ModelPoint{validate_params(p), bR, bQ}, dT, T0};
}

SweepRecord run_point(const SweepConfig& cfg, std::size_t index, OverlapCache& cache) {
    const auto t_start = std::chrono::steady_clock::now();
    SweepRecord r;
    {
        std::size_t stride = cfg.point_count();
        for (const auto& a : cfg.axes) {
            stride /= a.values.size();
            r.axis_values.push_back(a.values[(index / stride) % a.values.size()]);
        }
    }
    try {
        const SweepPoint sp = sweep_point(cfg, index);
        r.T_R = sp.model.bath_R.T;
        r.T_Q = sp.model.bath_Q.T;

        ObservableRequest req;
        req.noise = cfg.wants(Observable::Noise);
        req.skewness = cfg.wants(Observable::Skewness);
        req.squeezing = cfg.wants(Observable::XiSquared);
        req.method = cfg.method;
        req.fd_step = cfg.fd_step;
        req.theta_grid = cfg.theta_grid;

        const PointSolution s = solve_converged(sp.model, cfg.truncation, req, &cache);
        r.converged_N = s.N;
        r.residual = s.residual;
        r.truncation_delta = s.truncation_delta;
        r.current = s.cumulants.current;
        if (cfg.scale_current_by_lambda2) {
            const double l = sp.model.params.lambda();
            r.current_over_lambda2 = l > 0.0 ? s.cumulants.current / (l * l) : std::nan("");
        }
        if (req.noise) r.noise = s.cumulants.noise;
        if (req.skewness) r.skewness = s.cumulants.skewness;
        if (s.squeezing) {
            r.xi_squared = s.squeezing->xi_squared;
            r.theta_star = s.squeezing->theta_star;
        }
        if (cfg.wants(Observable::Rectification)) {
            ModelPoint rev = sp.model;
            rev.bath_R.T = clamp_temperature(sp.T0 - 0.5 * sp.delta_T);
            rev.bath_Q.T = clamp_temperature(sp.T0 + 0.5 * sp.delta_T);
            const PointSolution b = solve_converged(rev, cfg.truncation, ObservableRequest{false, false, false, cfg.method, cfg.fd_step, cfg.theta_grid}, &cache);
            r.reverse_current = b.cumulants.current;
            r.converged_N = std::max(r.converged_N, b.N);
            r.residual = std::max(r.residual, b.residual);
            r.truncation_delta = std::max(r.truncation_delta, b.truncation_delta);
            // At zero bias both directions are the same equilibrium point.
            const RectificationResult R = sp.delta_T == 0.0 ? rectification(0.0, 0.0)
                                                            : rectification(s.cumulants.current, b.cumulants.current);
            r.rectification = R.factor;
        }
        if (cfg.wants(Observable::WeakCurrent)) {
            const WeakCouplingCurrent w = weak_coupling_current(sp.model.params, sp.model.bath_R, sp.model.bath_Q);
            r.weak_current = w.total;
            for (int m : cfg.weak_components) {
                WeakComponentValue v{m, 0.0, 0.0};
                if (m <= w.cutoff_M) {
                    const auto& c = w.components[static_cast<std::size_t>(m - 2)];
                    v.I_m1 = c.I_m1;
                    v.I_m0 = c.I_m0;
                }
                r.weak_components.push_back(v);
            }
        }
    } catch (const Error& e) {
        r.status = std::string(to_string(e.code()));
        r.message = e.what();
    } catch (const std::exception& e) {
        r.status = "InternalError";
        r.message = e.what();
    }
    r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
    return r;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
    validate_config(cfg);
    const std::size_t n = cfg.point_count();
    std::vector<SweepRecord> records(n);
    OverlapCache cache(cfg.truncation.max_N + cfg.truncation.step);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) records[i] = run_point(cfg, i, cache);
    };
    const auto k = static_cast<std::size_t>(std::max(1, cfg.workers));
    if (k == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(k, n); ++t) pool.emplace_back(work);
    }
    return records;
}

void write_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<SweepRecord>& records) {
    std::vector<std::string> head;
    for (const auto& a : cfg.axes) head.push_back(std::string(to_string(a.name)) + "[omega_a]");
    head.push_back("T_R[omega_a]");
    head.push_back("T_Q[omega_a]");
    const bool cur = cfg.wants(Observable::Current) || cfg.wants(Observable::Rectification);
    if (cur) head.push_back("current[omega_a^2]");
    if (cur && cfg.scale_current_by_lambda2) head.push_back("current_over_lambda2[1]");
    if (cfg.wants(Observable::Noise)) head.push_back("noise[omega_a^3]");
    if (cfg.wants(Observable::Skewness)) head.push_back("skewness[omega_a^4]");
    if (cfg.wants(Observable::Rectification)) {
        head.push_back("reverse_current[omega_a^2]");
        head.push_back("rectification[1]");
    }
    if (cfg.wants(Observable::XiSquared)) {
        head.push_back("xi_squared[1]");
        head.push_back("theta_star[rad]");
    }
    if (cfg.wants(Observable::WeakCurrent)) {
        head.push_back(std::string("weak_current[") + std::string(unit_of(Observable::WeakCurrent)) + "]");
        for (int m : cfg.weak_components) {
            head.push_back("I_" + std::to_string(m) + "_1[omega_a]");
            head.push_back("I_" + std::to_string(m) + "_0[omega_a]");
        }
    }
    for (const char* h : {"converged_N", "residual", "truncation_delta", "status"}) head.push_back(h);

    for (std::size_t i = 0; i < head.size(); ++i) os << (i ? "," : "") << head[i];
    os << '\n';

    auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string("nan"); };
    for (const auto& r : records) {
        std::vector<std::string> row;
        for (double v : r.axis_values) row.push_back(fmt17(v));
        row.push_back(fmt17(r.T_R));
        row.push_back(fmt17(r.T_Q));
        if (cur) row.push_back(opt(r.current));
        if (cur && cfg.scale_current_by_lambda2) row.push_back(opt(r.current_over_lambda2));
        if (cfg.wants(Observable::Noise)) row.push_back(opt(r.noise));
        if (cfg.wants(Observable::Skewness)) row.push_back(opt(r.skewness));
        if (cfg.wants(Observable::Rectification)) {
            row.push_back(opt(r.reverse_current));
            row.push_back(opt(r.rectification));
        }
        if (cfg.wants(Observable::XiSquared)) {
            row.push_back(opt(r.xi_squared));
            row.push_back(opt(r.theta_star));
        }
        if (cfg.wants(Observable::WeakCurrent)) {
            row.push_back(opt(r.weak_current));
            for (std::size_t j = 0; j < cfg.weak_components.size(); ++j) {
                const bool have = j < r.weak_components.size();
                row.push_back(have ? fmt17(r.weak_components[j].I_m1) : "nan");
                row.push_back(have ? fmt17(r.weak_components[j].I_m0) : "nan");
            }
        }
        row.push_back(r.ok() ? std::to_string(r.converged_N) : "0");
        row.push_back(r.ok() ? fmt17(r.residual) : "nan");
        row.push_back(r.ok() ? fmt17(r.truncation_delta) : "nan");
        row.push_back(r.status);
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

std::string echo_config(const SweepConfig& c) {
    std::ostringstream os;
    os << "name = " << c.name << '\n'
       << "omega_a = " << fmt17(c.model.omega_a) << '\n'
       << "epsilon = " << fmt17(c.model.epsilon) << '\n'
       << "lambda = " << fmt17(c.model.lambda) << '\n'
       << "T0 = " << fmt17(c.T0) << '\n'
       << "delta_T = " << fmt17(c.delta_T) << '\n';
    if (c.T_R) os << "T_R = " << fmt17(*c.T_R) << '\n';
    if (c.T_Q) os << "T_Q = " << fmt17(*c.T_Q) << '\n';
    os << "alpha_R = " << fmt17(c.bath_R.alpha_u) << '\n'
       << "alpha_Q = " << fmt17(c.bath_Q.alpha_u) << '\n'
       << "omega_c_R = " << fmt17(c.bath_R.omega_c) << '\n'
       << "omega_c_Q = " << fmt17(c.bath_Q.omega_c) << '\n';
    for (const auto& a : c.axes) {
        os << "axis = " << to_string(a.name);
        if (a.is_list) {
            os << " list";
            for (double v : a.values) os << ' ' << fmt17(v);
        } else {
            os << " linear " << fmt17(a.min) << ' ' << fmt17(a.max) << ' ' << a.count;
        }
        os << '\n';
    }
    os << "outputs =";
    for (auto o : c.outputs) os << ' ' << to_string(o);
    os << '\n';
    if (!c.weak_components.empty()) {
        os << "weak_components =";
        for (int m : c.weak_components) os << ' ' << m;
        os << '\n';
    }
    os << "scale_current_by_lambda2 = " << (c.scale_current_by_lambda2 ? "true" : "false") << '\n'
       << "workers = " << c.workers << '\n'
       << "cumulant_method = " << to_string(c.method) << '\n'
       << "fd_step = " << fmt17(c.fd_step) << '\n'
       << "theta_grid = " << c.theta_grid << '\n'
       << "truncation.initial_N = " << c.truncation.initial_N << '\n'
       << "truncation.step = " << c.truncation.step << '\n'
       << "truncation.max_N = " << c.truncation.max_N << '\n'
       << "truncation.tol = " << fmt17(c.truncation.tol) << '\n';
    return os.str();
}

void write_sidecar(std::ostream& os, const SweepConfig& cfg, const std::vector<SweepRecord>& records,
                   double total_wall_ms) {
    using nlohmann::json;
    json j;
    j["tool"] = "qrheat sweep";
    j["versions"] = {{"qrheat", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"mpfr", mpfr_get_version()}};
    j["config"] = echo_config(cfg);
    j["points"] = records.size();
    std::size_t failed = 0;
    json recs = json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.ok()) ++failed;
        json e = {{"index", i}, {"status", r.status}, {"wall_time_ms", r.wall_time_ms}};
        if (!r.message.empty()) e["message"] = r.message;
        recs.push_back(std::move(e));
    }
    j["failed_points"] = failed;
    j["warnings"] = config_warnings(cfg);
    j["total_wall_time_ms"] = total_wall_ms;
    j["records"] = std::move(recs);
    os << j.dump(2) << '\n';
}

std::string sidecar_path(const std::string& csv_path) {
    const auto slash = csv_path.find_last_of('/');
    const auto dot = csv_path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash) && csv_path.substr(dot) == ".csv")
        return csv_path.substr(0, dot) + ".json";
    return csv_path + ".json";
}

void emit_csv(const std::vector<SweepRecord>& records, const SweepConfig& cfg, const std::string& csv_path,
              double total_wall_ms) {
    if (records.empty()) throw Error(ErrorCode::IoError, "no records to write");
    {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw Error(ErrorCode::IoError, "cannot open '" + csv_path + "' for writing");
        write_csv(f, cfg, records);
        if (!f) throw Error(ErrorCode::IoError, "write to '" + csv_path + "' failed");
    }
    const std::string side = sidecar_path(csv_path);
    std::ofstream f(side, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + side + "' for writing");
    write_sidecar(f, cfg, records, total_wall_ms);
    if (!f) throw Error(ErrorCode::IoError, "write to '" + side + "' failed");
}

void dump_overlaps(std::ostream& os, const SweepConfig& cfg, int N) {
    std::vector<double> lambdas;
    if (const AxisSpec* a = find_axis(cfg, AxisName::Lambda))
        lambdas = a->values;
    else
        lambdas = {cfg.model.lambda};
    os << "lambda,sigma,m,m_prime,G\n";
    for (double l : lambdas) {
        SystemParams p = cfg.model;
        p.lambda = l;
        const ValidatedParams vp = validate_params(p);
        const BranchData b0 = build_branch(vp, 0), b1 = build_branch(vp, 1);
        const OverlapPair G = overlap_pair(N, b0, b1);
        for (int sigma = 0; sigma < 2; ++sigma)
            for (int m = 0; m <= N; ++m)
                for (int mp = 0; mp <= N; ++mp)
                    os << fmt17(l) << ',' << sigma << ',' << m << ',' << mp << ',' << fmt17(G[sigma](m, mp)) << '\n';
    }
}

} // namespace qrheat
