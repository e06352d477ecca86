// scenario.hpp: scenario files, built-in presets, and the run / sweep
// drivers behind the command-line tool.
//
// Scenario files are flat `section.key = value` text. Quantities carry
// explicit units (s, ms, us, ns, m, mm, um, m/s, Hz, kHz, MHz, rad/s, rad);
// detunings may be written in units of the peak coupling (`2.2 omega0`) and
// angles as multiples of pi (`0.45pi`, `pi/2`). Frequencies given in Hz are
// cyclic and converted to rad/s.

#pragma once

#include <catres/metrics.hpp>
#include <catres/reservoir.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace catres {

struct AnalysisSpec {
    int cat_k = 0;  // 0: no cat fit
    bool squeezing = false;
    std::optional<GridSpec> wigner;  // empty: automatic grid from n̄
    double switch_off = 0.0;         // extra reservoir-off time (s)

    bool operator==(const AnalysisSpec&) const = default;
};

inline bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.min == b.min && a.max == b.max && a.step == b.step;
}

struct ScenarioConfig {
    std::string name = "custom";
    HilbertConfig hilbert;
    ReservoirConfig reservoir;
    AnalysisSpec analysis;
    std::string output_dir = "run";

    bool operator==(const ScenarioConfig&) const = default;
};

// cat2, cat3, squeeze, banana.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

ScenarioConfig parse_config(const std::string& text, const ScenarioConfig& base = {});
ScenarioConfig load_config(const std::filesystem::path& file, const ScenarioConfig& base = {});
std::string serialize_config(const ScenarioConfig& cfg);

// Applies one `key=value` assignment (same syntax as the file).
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

// Parses one quantity for `key`, e.g. ("profile.t_r", "5 us") -> 5e-6.
double parse_quantity(const std::string& key, const std::string& value, double omega0);

struct RunSummary {
    std::string name;
    int n_samples = 0;
    double n_bar = 0, purity = 0;
    std::optional<CatFitResult> cat;
    std::optional<Squeezing> squeezing;
    double truncation_peak = 0;
    double theta = 0, phi0 = 0, t_i = 0;
    std::optional<std::uint64_t> seed;
    double wall_seconds = 0;
};

struct RunArtifacts {
    TrajectoryResult trajectory;
    std::optional<TrajectoryResult> switch_off;
    RunSummary summary;
};

// Runs the trajectory and the requested analyses without touching disk.
RunArtifacts simulate(const ScenarioConfig& cfg);

// simulate() plus metrics.csv, wigner_final.txt, state_final.txt,
// summary.txt (and switch_off.csv, timing.txt) in cfg.output_dir. Files are
// written under temporary names and renamed once everything succeeded.
RunSummary run_scenario(const ScenarioConfig& cfg, const std::vector<std::string>& overrides = {});

struct SweepRow {
    std::string value;
    RunSummary summary;
};

// One run per value of `param` (parallel over `threads` workers); rows in
// input order. Writes sweep.csv into base.output_dir when write is set.
std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& param,
                            const std::vector<std::string>& values, int threads = 1, bool write = true);

void write_sweep_csv(std::ostream& os, const std::string& param, const std::vector<SweepRow>& rows);

// Density matrix text format: `# dim N`, then N rows of `re,im` pairs.
void write_state(std::ostream& os, const FieldState& rho);
FieldState read_state(std::istream& is);

}  // namespace catres
