// sweep.hpp — Config-driven parameter sweeps, figure presets and CSV/JSON output
//
// Config format: one `key = value` per line, `#` starts a comment. Grid axes are given by
// repeated `axis` lines:
//
//   axis = delta_T linear 0 2 81
//   axis = lambda list 0.001 0.01 0.1
//
// The first axis is the outer (slow) index of the row-major output.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrheat/model.hpp"

namespace qrheat {

enum class AxisName { DeltaT, Lambda, TR, TQ, T0 };

std::string_view to_string(AxisName a);

struct AxisSpec {
    AxisName name{AxisName::DeltaT};
    std::vector<double> values; // ascending
    bool is_list{false};
    double min{0.0}, max{0.0};
    int count{0};
};

enum class Observable { Current, Noise, Skewness, Rectification, XiSquared, WeakCurrent };

std::string_view to_string(Observable o);

struct SweepConfig {
    std::string name{"custom"};
    SystemParams model{1.0, 1.0, 0.1};
    double T0{1.0};
    double delta_T{0.0};
    std::optional<double> T_R; // overrides T0 + ΔT/2
    std::optional<double> T_Q; // overrides T0 − ΔT/2
    BathSpec bath_R{BathLabel::R, 1e-3, 10.0, 1.0};
    BathSpec bath_Q{BathLabel::Q, 1e-3, 10.0, 1.0};
    std::vector<AxisSpec> axes;
    std::vector<Observable> outputs{Observable::Current};
    TruncationPolicy truncation{};
    int workers{1};
    CumulantMethod method{CumulantMethod::Perturbative};
    double fd_step{kDefaultFdStep};
    int theta_grid{kDefaultThetaGrid};
    bool scale_current_by_lambda2{false};
    std::vector<int> weak_components; // m values whose I_{m,σ} are reported

    bool wants(Observable o) const;
    std::size_t point_count() const;
};

// Negative temperatures within this distance of zero are clamped to zero.
inline constexpr double kTemperatureFloor = 1e-9;

// Parses on top of `base` (defaults when omitted). Throws ParseError with the line number,
// or ValidationError listing every violated constraint.
SweepConfig parse_config(std::string_view text, const SweepConfig& base = SweepConfig{});

// Throws ValidationError listing every violation.
void validate_config(const SweepConfig& cfg);

// Throws UnknownPreset.
SweepConfig figure_preset(std::string_view name);
std::vector<std::string> preset_names();

struct WeakComponentValue {
    int m{0};
    double I_m1{0.0};
    double I_m0{0.0};
};

struct SweepRecord {
    std::vector<double> axis_values;
    double T_R{0.0}, T_Q{0.0};
    std::optional<double> current, current_over_lambda2, noise, skewness;
    std::optional<double> reverse_current, rectification;
    std::optional<double> xi_squared, theta_star;
    std::optional<double> weak_current;
    std::vector<WeakComponentValue> weak_components;
    int converged_N{0};
    double residual{0.0};
    double truncation_delta{0.0};
    std::string status{"ok"}; // "ok" or an error code name
    std::string message;
    double wall_time_ms{0.0};

    bool ok() const { return status == "ok"; }
};

struct SweepPoint {
    std::vector<double> axis_values;
    ModelPoint model;
    double delta_T{0.0};
    double T0{1.0};
};

// Grid point `index` in row-major order. Throws like validate_params / validate_bath.
SweepPoint sweep_point(const SweepConfig& cfg, std::size_t index);

SweepRecord run_point(const SweepConfig& cfg, std::size_t index, OverlapCache& cache);

// One record per grid point, row-major, independent of cfg.workers.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

// Human-readable warnings about questionable but legal settings.
std::vector<std::string> config_warnings(const SweepConfig& cfg);

void write_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<SweepRecord>& records);
void write_sidecar(std::ostream& os, const SweepConfig& cfg, const std::vector<SweepRecord>& records,
                   double total_wall_ms);
// Writes `csv_path` and its `.json` sidecar. Throws IoError.
void emit_csv(const std::vector<SweepRecord>& records, const SweepConfig& cfg, const std::string& csv_path,
              double total_wall_ms);
std::string sidecar_path(const std::string& csv_path);

// Overlap tables at truncation N for every distinct coupling in the grid, as
// "lambda,sigma,m,m_prime,G" rows.
void dump_overlaps(std::ostream& os, const SweepConfig& cfg, int N);

// Canonical key = value rendering of a config; parse_config(echo_config(c)) reproduces c.
std::string echo_config(const SweepConfig& cfg);

} // namespace qrheat
