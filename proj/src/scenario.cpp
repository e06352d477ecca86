#include <catres/scenario.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace catres {

namespace {

constexpr double kPi = std::numbers::pi;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

enum class Dim { time, length, velocity, rate, angle, plain };

struct Unit {
    const char* name;
    double scale;
};

const std::map<Dim, std::vector<Unit>>& unit_table() {
    static const std::map<Dim, std::vector<Unit>> t = {
        {Dim::time, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}}},
        {Dim::length, {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}}},
        {Dim::velocity, {{"m/s", 1.0}}},
        {Dim::rate, {{"rad/s", 1.0}, {"hz", 2 * kPi}, {"khz", 2 * kPi * 1e3}, {"mhz", 2 * kPi * 1e6}}},
        {Dim::angle, {{"rad", 1.0}}},
        {Dim::plain, {{"", 1.0}}},
    };
    return t;
}

const char* dim_name(Dim d) {
    switch (d) {
        case Dim::time: return "a time (s, ms, us, ns)";
        case Dim::length: return "a length (m, mm, um)";
        case Dim::velocity: return "a velocity (m/s)";
        case Dim::rate: return "an angular rate (rad/s, Hz, kHz, MHz, omega0)";
        case Dim::angle: return "an angle (rad or a multiple of pi)";
        case Dim::plain: return "a plain number";
    }
    return "";
}

const std::map<std::string, Dim>& quantity_keys() {
    static const std::map<std::string, Dim> k = {
        {"profile.omega0", Dim::rate}, {"profile.w", Dim::length},      {"profile.v", Dim::velocity},
        {"profile.delta", Dim::rate},  {"profile.t_r", Dim::time},      {"profile.window", Dim::plain},
        {"cavity.T_c", Dim::time},     {"cavity.n_t", Dim::plain},      {"reservoir.p_at", Dim::plain},
        {"reservoir.u", Dim::angle},   {"analysis.switch_off", Dim::time},
    };
    return k;
}

double parse_number(const std::string& key, const std::string& text, std::size_t& used) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (end == begin) throw ConfigError(key + ": expected a number, got '" + text + "'");
    used = static_cast<std::size_t>(end - begin);
    return x;
}

// "<num>pi", "pi", "pi/<num>", "<num>pi/<num>"
std::optional<double> parse_pi(const std::string& key, const std::string& text) {
    const std::string t = lower(text);
    const auto pos = t.find("pi");
    if (pos == std::string::npos) return std::nullopt;
    double coef = 1.0;
    const std::string head = trim(t.substr(0, pos));
    if (!head.empty()) {
        std::size_t used = 0;
        coef = parse_number(key, head, used);
        if (used != head.size()) throw ConfigError(key + ": cannot read '" + text + "'");
    }
    std::string tail = trim(t.substr(pos + 2));
    double div = 1.0;
    if (!tail.empty()) {
        if (tail[0] != '/') throw ConfigError(key + ": cannot read '" + text + "'");
        tail = trim(tail.substr(1));
        std::size_t used = 0;
        div = parse_number(key, tail, used);
        if (used != tail.size() || div == 0) throw ConfigError(key + ": cannot read '" + text + "'");
    }
    return coef * kPi / div;
}

long long parse_int(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    }
    if (used != v.size()) throw ConfigError(key + ": expected an integer, got '" + value + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = lower(trim(value));
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

template <typename E>
E parse_enum(const std::string& key, const std::string& value, const std::vector<std::pair<std::string, E>>& opts) {
    const std::string v = lower(trim(value));
    std::string allowed;
    for (const auto& [n, e] : opts) {
        if (v == n) return e;
        allowed += (allowed.empty() ? "" : ", ") + n;
    }
    throw ConfigError(key + ": '" + value + "' is not one of " + allowed);
}

const std::vector<std::pair<std::string, LossMode>> kLoss = {
    {"interleaved", LossMode::interleaved}, {"lumped", LossMode::lumped}, {"off", LossMode::off}};
const std::vector<std::pair<std::string, Backend>> kBackend = {{"numeric", Backend::numeric},
                                                               {"analytic", Backend::analytic}};
const std::vector<std::pair<std::string, Integrator>> kIntegrator = {{"dressed", Integrator::dressed},
                                                                     {"rk4", Integrator::rk4}};
const std::vector<std::pair<std::string, Mixing>> kMixing = {{"deterministic", Mixing::deterministic},
                                                             {"monte_carlo", Mixing::monte_carlo}};
const std::vector<std::pair<std::string, CacheMode>> kCache = {
    {"auto", CacheMode::automatic}, {"on", CacheMode::on}, {"off", CacheMode::off}};

template <typename E>
std::string enum_name(E e, const std::vector<std::pair<std::string, E>>& opts) {
    for (const auto& [n, v] : opts)
        if (v == e) return n;
    return "?";
}

void set_key(ScenarioConfig& c, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    ReservoirConfig& r = c.reservoir;
    if (quantity_keys().count(key)) {
        const double x = parse_quantity(key, value, r.profile.omega0);
        if (key == "profile.omega0") r.profile.omega0 = x;
        else if (key == "profile.w") r.profile.w = x;
        else if (key == "profile.v") r.profile.v = x;
        else if (key == "profile.delta") r.profile.delta_disp = x;
        else if (key == "profile.t_r") r.profile.t_r = x;
        else if (key == "profile.window") r.profile.window_factor = x;
        else if (key == "cavity.T_c") r.cavity.T_c = x;
        else if (key == "cavity.n_t") r.cavity.n_t = x;
        else if (key == "reservoir.p_at") r.p_at = x;
        else if (key == "reservoir.u") r.u = x;
        else if (key == "analysis.switch_off") c.analysis.switch_off = x;
        return;
    }
    if (key == "name") c.name = value;
    else if (key == "output.dir") c.output_dir = value;
    else if (key == "hilbert.n_max") {
        const long long n = parse_int(key, value);
        if (n < 1 || n > 400) throw ConfigError("hilbert.n_max must lie in [1, 400]");
        c.hilbert = HilbertConfig(static_cast<int>(n));
    } else if (key == "cavity.loss") r.loss = parse_enum(key, value, kLoss);
    else if (key == "reservoir.n_samples") {
        const long long n = parse_int(key, value);
        if (n < 0) throw ConfigError("reservoir.n_samples must be >= 0");
        r.n_samples = static_cast<int>(n);
    } else if (key == "reservoir.backend") r.backend = parse_enum(key, value, kBackend);
    else if (key == "reservoir.integrator") r.transit.integrator = parse_enum(key, value, kIntegrator);
    else if (key == "reservoir.mixing") r.mixing = parse_enum(key, value, kMixing);
    else if (key == "reservoir.seed") {
        const long long s = parse_int(key, value);
        if (s < 0) throw ConfigError("reservoir.seed must be >= 0");
        r.seed = static_cast<std::uint64_t>(s);
    } else if (key == "reservoir.cache") r.cache = parse_enum(key, value, kCache);
    else if (key == "reservoir.loss_chunks") {
        const long long n = parse_int(key, value);
        if (n < 1) throw ConfigError("reservoir.loss_chunks must be >= 1");
        r.transit.loss_chunks = static_cast<int>(n);
    } else if (key == "analysis.cat_k") {
        const long long k = parse_int(key, value);
        if (k != 0 && (k < 2 || k > 8)) throw ConfigError("analysis.cat_k must be 0 or in [2, 8]");
        c.analysis.cat_k = static_cast<int>(k);
    } else if (key == "analysis.squeezing") c.analysis.squeezing = parse_bool(key, value);
    else if (key == "analysis.wigner") {
        if (lower(value) == "auto") c.analysis.wigner.reset();
        else {
            try {
                c.analysis.wigner = GridSpec::parse(value);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("analysis.wigner: ") + e.what());
            }
        }
    } else throw ConfigError("unknown key '" + key + "'");
}

void validate(const ScenarioConfig& c) {
    try {
        c.reservoir.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::vector<std::pair<std::string, std::string>> split_lines(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

}  // namespace

double parse_quantity(const std::string& key, const std::string& value, double omega0) {
    const auto it = quantity_keys().find(key);
    if (it == quantity_keys().end()) throw ConfigError("'" + key + "' is not a quantity");
    const Dim dim = it->second;
    const std::string v = trim(value);
    if (dim == Dim::angle) {
        if (const auto x = parse_pi(key, v)) return *x;
    }
    std::size_t used = 0;
    const double x = parse_number(key, v, used);
    const std::string unit = lower(trim(v.substr(used)));
    if (dim == Dim::rate && unit == "omega0") {
        if (key == "profile.omega0") throw ConfigError("profile.omega0 cannot be given in units of itself");
        return x * omega0;
    }
    for (const Unit& u : unit_table().at(dim))
        if (unit == u.name) return x * u.scale;
    throw ConfigError(key + ": '" + value + "' is not " + dim_name(dim));
}

// --------------------------- Presets -----------------------------------------

std::vector<std::string> preset_names() { return {"cat2", "cat3", "squeeze", "banana"}; }

ScenarioConfig preset(const std::string& name) {
    ScenarioConfig c;
    c.name = name;
    c.hilbert = HilbertConfig(59);
    ReservoirConfig& r = c.reservoir;
    r.profile.omega0 = 2 * kPi * 50e3;
    r.profile.w = 6e-3;
    r.profile.window_factor = 1.5;
    r.cavity = CavityParams(0.13, 0.05);
    r.p_at = 0.3;
    r.n_samples = 200;
    c.output_dir = "run_" + name;
    if (name == "cat2" || name == "cat3") {
        r.profile.v = 70.0;
        r.profile.t_r = 5e-6;
        r.profile.delta_disp = (name == "cat2" ? 2.2 : 3.7) * r.profile.omega0;
        r.u = 0.45 * kPi;
        c.analysis.cat_k = name == "cat2" ? 2 : 3;
        c.analysis.wigner = GridSpec{-3.5, 3.5, 0.07};
    } else if (name == "squeeze") {
        r.profile.v = 300.0;
        r.profile.t_r = 1.7e-6;
        r.profile.delta_disp = 70.0 * r.profile.omega0;
        r.u = 0.5 * kPi;
        c.analysis.squeezing = true;
    } else if (name == "banana") {
        r.profile.v = 150.0;
        r.profile.t_r = 5e-6;
        r.profile.delta_disp = 7.0 * r.profile.omega0;
        r.u = 0.5 * kPi;
        c.analysis.wigner = GridSpec{-3.5, 3.5, 0.07};
    } else {
        throw ConfigError("unknown preset '" + name + "' (known: cat2, cat3, squeeze, banana)");
    }
    return c;
}

// --------------------------- Parse / serialize ------------------------------

ScenarioConfig parse_config(const std::string& text, const ScenarioConfig& base) {
    ScenarioConfig c = base;
    const auto kv = split_lines(text);
    // The coupling scale first, so `omega0` units resolve regardless of order.
    for (const auto& [k, v] : kv)
        if (k == "profile.omega0") set_key(c, k, v);
    for (const auto& [k, v] : kv)
        if (k != "profile.omega0") set_key(c, k, v);
    validate(c);
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& file, const ScenarioConfig& base) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file '" + file.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), base);
}

std::string serialize_config(const ScenarioConfig& c) {
    const ReservoirConfig& r = c.reservoir;
    std::ostringstream os;
    os << "name = " << c.name << '\n';
    os << "hilbert.n_max = " << c.hilbert.n_max << '\n';
    os << "profile.omega0 = " << fmt(r.profile.omega0) << " rad/s\n";
    os << "profile.w = " << fmt(r.profile.w) << " m\n";
    os << "profile.v = " << fmt(r.profile.v) << " m/s\n";
    os << "profile.delta = " << fmt(r.profile.delta_disp) << " rad/s\n";
    os << "profile.t_r = " << fmt(r.profile.t_r) << " s\n";
    os << "profile.window = " << fmt(r.profile.window_factor) << '\n';
    os << "cavity.T_c = " << fmt(r.cavity.T_c) << " s\n";
    os << "cavity.n_t = " << fmt(r.cavity.n_t) << '\n';
    os << "cavity.loss = " << enum_name(r.loss, kLoss) << '\n';
    os << "reservoir.p_at = " << fmt(r.p_at) << '\n';
    os << "reservoir.u = " << fmt(r.u) << " rad\n";
    os << "reservoir.n_samples = " << r.n_samples << '\n';
    os << "reservoir.backend = " << enum_name(r.backend, kBackend) << '\n';
    os << "reservoir.integrator = " << enum_name(r.transit.integrator, kIntegrator) << '\n';
    os << "reservoir.loss_chunks = " << r.transit.loss_chunks << '\n';
    os << "reservoir.mixing = " << enum_name(r.mixing, kMixing) << '\n';
    os << "reservoir.seed = " << r.seed << '\n';
    os << "reservoir.cache = " << enum_name(r.cache, kCache) << '\n';
    os << "analysis.cat_k = " << c.analysis.cat_k << '\n';
    os << "analysis.squeezing = " << (c.analysis.squeezing ? "true" : "false") << '\n';
    if (c.analysis.wigner)
        os << "analysis.wigner = " << fmt(c.analysis.wigner->min) << ':' << fmt(c.analysis.wigner->max) << ':'
           << fmt(c.analysis.wigner->step) << '\n';
    else
        os << "analysis.wigner = auto\n";
    os << "analysis.switch_off = " << fmt(c.analysis.switch_off) << " s\n";
    os << "output.dir = " << c.output_dir << '\n';
    return os.str();
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    set_key(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
    validate(cfg);
}

// --------------------------- State files ------------------------------------

void write_state(std::ostream& os, const FieldState& rho) {
    const ComplexMatrix& r = rho.matrix();
    os << "# dim " << r.rows() << '\n';
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            if (j) os << ' ';
            os << fmt(r(i, j).real()) << ',' << fmt(r(i, j).imag());
        }
        os << '\n';
    }
}

FieldState read_state(std::istream& is) {
    std::string line;
    Eigen::Index dim = -1;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream hs(line);
        std::string hash, word;
        if (!(hs >> hash >> word >> dim) || hash != "#" || word != "dim" || dim < 2)
            throw ConfigError("state file: expected '# dim N' header");
        break;
    }
    if (dim < 2) throw ConfigError("state file: missing header");
    ComplexMatrix r(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (!std::getline(is, line)) throw ConfigError("state file: too few rows");
        std::istringstream ls(line);
        for (Eigen::Index j = 0; j < dim; ++j) {
            std::string tok;
            if (!(ls >> tok)) throw ConfigError("state file: row " + std::to_string(i) + " too short");
            const auto comma = tok.find(',');
            if (comma == std::string::npos) throw ConfigError("state file: entries must be re,im");
            try {
                r(i, j) = cplx(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
            } catch (const std::exception&) {
                throw ConfigError("state file: bad number '" + tok + "'");
            }
        }
    }
    return FieldState(std::move(r));
}

// --------------------------- Run --------------------------------------------

RunArtifacts simulate(const ScenarioConfig& cfg) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const FieldState rho0 = FieldState::vacuum(cfg.hilbert);

    TrajectoryOptions topt;
    topt.keep_states = cfg.analysis.cat_k >= 2;
    TrajectoryResult traj = run_trajectory(rho0, cfg.reservoir, {}, topt);

    RunSummary s;
    s.name = cfg.name;
    s.n_samples = cfg.reservoir.n_samples;
    s.n_bar = mean_photon(traj.final_state);
    s.purity = purity(traj.final_state);
    s.truncation_peak = traj.truncation_peak;
    s.theta = theta_of(cfg.reservoir.profile);
    s.phi0 = cfg.reservoir.profile.delta_disp > 0 ? phi0_of(cfg.reservoir.profile, Segment::second) : 0.0;
    s.t_i = cfg.reservoir.period();
    s.seed = traj.seed;

    std::optional<PureFieldState> reference;
    if (cfg.analysis.cat_k >= 2) {
        s.cat = fit_cat(traj.final_state, cfg.analysis.cat_k);
        reference = s.cat->reference;
        refresh_fidelity(traj, *reference);
    }
    if (cfg.analysis.squeezing) s.squeezing = squeezing_db(traj.final_state);

    std::optional<TrajectoryResult> off;
    if (cfg.analysis.switch_off > 0) {
        TrajectoryOptions oopt;
        oopt.reference = reference;
        TrajectoryResult base = traj;
        base.states.clear();
        off = switch_off_decay(base, cfg.analysis.switch_off, cfg.reservoir, oopt);
        s.truncation_peak = std::max(s.truncation_peak, off->truncation_peak);
    }
    traj.states.clear();
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return RunArtifacts{std::move(traj), std::move(off), s};
}

namespace {

void write_summary(std::ostream& os, const RunSummary& s, const ScenarioConfig& cfg,
                   const std::vector<std::string>& overrides) {
    os << "name = " << s.name << '\n';
    os << "n_samples = " << s.n_samples << '\n';
    os << "nbar = " << fmt(s.n_bar) << '\n';
    os << "purity = " << fmt(s.purity) << '\n';
    if (s.cat) {
        os << "cat_k = " << cfg.analysis.cat_k << '\n';
        os << "fidelity = " << fmt(s.cat->fidelity) << '\n';
        os << "cat_alpha = " << fmt(s.cat->alpha.real()) << ',' << fmt(s.cat->alpha.imag()) << '\n';
        os << "cat_phases =";
        for (double p : s.cat->rel_phases) os << ' ' << fmt(p);
        os << '\n';
        os << "cat_fit_converged = " << (s.cat->converged ? "true" : "false") << '\n';
    }
    if (s.squeezing) {
        os << "squeezing_db = " << fmt(s.squeezing->db) << '\n';
        os << "squeezing_theta = " << fmt(s.squeezing->theta_min) << '\n';
    }
    os << "truncation_peak = " << fmt(s.truncation_peak) << '\n';
    os << "theta = " << fmt(s.theta) << '\n';
    os << "phi0 = " << fmt(s.phi0) << '\n';
    os << "t_i = " << fmt(s.t_i) << '\n';
    if (s.seed) os << "seed = " << *s.seed << '\n';
    os << "wall_time = see timing.txt\n";
    for (const std::string& o : overrides) os << "override = " << o << '\n';
    os << "# config\n" << serialize_config(cfg);
}

class StagedFiles {
public:
    explicit StagedFiles(std::filesystem::path dir) : dir_(std::move(dir)) {}
    ~StagedFiles() {
        for (const auto& [tmp, fin] : staged_) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
        }
    }
    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const auto fin = dir_ / name;
        auto tmp = fin;
        tmp += ".tmp";
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        body(out);
        out.close();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
        staged_.emplace_back(tmp, fin);
    }
    void commit() {
        for (const auto& [tmp, fin] : staged_) std::filesystem::rename(tmp, fin);
        staged_.clear();
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
};

GridSpec auto_grid(double nbar) {
    const double R = std::ceil((std::sqrt(std::max(nbar, 0.0)) + 3.0) * 2.0) / 2.0;
    return GridSpec{-R, R, R / 50.0};
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& cfg, const std::vector<std::string>& overrides) {
    const RunArtifacts art = simulate(cfg);
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);

    const FieldState& fin = art.trajectory.final_state;
    const GridSpec grid = cfg.analysis.wigner ? *cfg.analysis.wigner : auto_grid(art.summary.n_bar);

    StagedFiles files(dir);
    files.write("metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, art.trajectory.records); });
    files.write("wigner_final.txt", [&](std::ostream& os) { write_wigner(os, wigner(fin, grid)); });
    files.write("state_final.txt", [&](std::ostream& os) { write_state(os, fin); });
    files.write("summary.txt", [&](std::ostream& os) { write_summary(os, art.summary, cfg, overrides); });
    if (art.switch_off) {
        files.write("switch_off.csv", [&](std::ostream& os) {
            const auto& recs = art.switch_off->records;
            write_metrics_csv(os, std::vector<MetricsRecord>(recs.begin() + static_cast<long>(art.trajectory.records.size()), recs.end()));
        });
    }
    files.write("timing.txt", [&](std::ostream& os) { os << "wall_seconds = " << art.summary.wall_seconds << '\n'; });
    files.commit();
    return art.summary;
}

// --------------------------- Sweep ------------------------------------------

std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& param, const std::vector<std::string>& values,
                            int threads, bool write) {
    if (values.empty()) throw ConfigError("sweep: no values given");
    std::vector<ScenarioConfig> cfgs;
    for (const std::string& v : values) {
        ScenarioConfig c = base;
        apply_override(c, param + "=" + v);
        cfgs.push_back(std::move(c));
    }
    std::vector<std::optional<RunSummary>> results(values.size());
    std::vector<std::exception_ptr> errors(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfgs.size(); i = next++) {
            try {
                results[i] = simulate(cfgs[i]).summary;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::clamp(threads, 1, static_cast<int>(cfgs.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({trim(values[i]), *results[i]});
    if (write) {
        std::filesystem::create_directories(base.output_dir);
        StagedFiles files(base.output_dir);
        files.write("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, param, rows); });
        files.commit();
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::string& param, const std::vector<SweepRow>& rows) {
    os << "index,param,value,nbar,purity,fidelity,squeezing_db,truncation_peak\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const RunSummary& s = rows[i].summary;
        os << i << ',' << param << ",\"" << rows[i].value << "\"," << fmt(s.n_bar) << ',' << fmt(s.purity) << ','
           << (s.cat ? fmt(s.cat->fidelity) : "nan") << ',' << (s.squeezing ? fmt(s.squeezing->db) : "nan") << ','
           << fmt(s.truncation_peak) << '\n';
    }
}

}  // namespace catres
