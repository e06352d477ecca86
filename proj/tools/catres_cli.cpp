// catres_cli: run reservoir scenarios, parameter sweeps, and Wigner maps.

#include <catres/errors.hpp>
#include <catres/scenario.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

using namespace catres;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int env_threads() {
    if (const char* s = std::getenv("CATRES_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(s, &end, 10);
        if (end == s || *end != '\0' || n < 1) throw ConfigError("CATRES_THREADS must be a positive integer");
        return static_cast<int>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct Common {
    std::string config, preset_name, out;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Scenario file (section.key = value)");
    app->add_option("--preset", c.preset_name, "Built-in scenario: cat2, cat3, squeeze, banana");
    app->add_option("--set", c.sets, "Override key=value (repeatable)");
    app->add_option("--out", c.out, "Output directory");
}

ScenarioConfig build_config(const Common& c, std::vector<std::string>& echoed) {
    if (c.config.empty() && c.preset_name.empty()) throw ConfigError("give --config FILE and/or --preset NAME");
    ScenarioConfig cfg = c.preset_name.empty() ? ScenarioConfig{} : preset(c.preset_name);
    if (!c.config.empty()) cfg = load_config(c.config, cfg);
    for (const std::string& s : c.sets) {
        apply_override(cfg, s);
        echoed.push_back(s);
    }
    if (!c.out.empty()) {
        cfg.output_dir = c.out;
        echoed.push_back("output.dir=" + c.out);
    }
    return cfg;
}

std::vector<std::string> split_values(const std::string& list) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : list) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

void print_summary(const RunSummary& s) {
    std::cout << s.name << ": nbar=" << s.n_bar << " purity=" << s.purity;
    if (s.cat) std::cout << " fidelity=" << s.cat->fidelity;
    if (s.squeezing) std::cout << " squeezing_db=" << s.squeezing->db;
    std::cout << " truncation_peak=" << s.truncation_peak << " wall=" << s.wall_seconds << "s\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reservoir engineering of cavity field states"};
    app.require_subcommand(1);

    Common run_opts;
    bool no_loss = false;
    std::optional<std::uint64_t> seed;
    std::string backend;
    auto* run = app.add_subcommand("run", "Run one scenario and write its artifacts");
    add_common(run, run_opts);
    run->add_flag("--no-loss", no_loss, "Disable cavity damping");
    run->add_option("--seed", seed, "Seed for monte_carlo mixing");
    run->add_option("--backend", backend, "numeric or analytic")->check(CLI::IsMember({"numeric", "analytic"}));

    Common sweep_opts;
    std::string param, values;
    auto* sw = app.add_subcommand("sweep", "Run one scenario per parameter value");
    add_common(sw, sweep_opts);
    sw->add_option("--param", param, "Key to vary, e.g. profile.delta")->required();
    sw->add_option("--values", values, "Comma-separated values, e.g. 2.134omega0,2.2omega0")->required();

    std::string state_file, grid = "-3.5:3.5:0.07", wigner_out;
    auto* wg = app.add_subcommand("wigner", "Wigner function of a saved density matrix");
    wg->add_option("--state", state_file, "state_final.txt from a run")->required();
    wg->add_option("--grid", grid, "XMIN:XMAX:STEP (same grid for both quadratures)");
    wg->add_option("--out", wigner_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) {
            std::vector<std::string> echoed;
            ScenarioConfig cfg = build_config(run_opts, echoed);
            auto flag = [&](const std::string& kv) {
                apply_override(cfg, kv);
                echoed.push_back(kv);
            };
            if (no_loss) flag("cavity.loss=off");
            if (seed) flag("reservoir.seed=" + std::to_string(*seed));
            if (!backend.empty()) flag("reservoir.backend=" + backend);
            print_summary(run_scenario(cfg, echoed));
        } else if (*sw) {
            std::vector<std::string> echoed;
            const ScenarioConfig cfg = build_config(sweep_opts, echoed);
            const auto rows = sweep(cfg, param, split_values(values), env_threads(), true);
            write_sweep_csv(std::cout, param, rows);
        } else if (*wg) {
            std::ifstream in(state_file);
            if (!in) throw ConfigError("cannot open state file '" + state_file + "'");
            const FieldState rho = read_state(in);
            GridSpec g;
            try {
                g = GridSpec::parse(grid);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("--grid: ") + e.what());
            }
            const WignerGrid w = wigner(rho, g);
            if (wigner_out.empty()) {
                write_wigner(std::cout, w);
            } else {
                std::ofstream out(wigner_out);
                if (!out) throw ConfigError("cannot write '" + wigner_out + "'");
                write_wigner(out, w);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ZeroDetuning& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const TrajectoryError& e) {
        std::cerr << "numerical failure at sample " << e.sample() << ": " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    return 0;
}
