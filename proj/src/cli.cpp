#include "evoctl/cli.hpp"

#include "evoctl/models.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace evoctl {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr uint64_t kDefaultSeed = 20240601;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string complex_fields(const Vec& x) {
    std::string s;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += "," + num(x(i).real()) + "," + num(x(i).imag());
    return s;
}

std::string complex_header(const std::string& name, Eigen::Index n) {
    std::string s;
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::string k = std::to_string(i);
        s += ",re(" + name + "_" + k + "),im(" + name + "_" + k + ")";
    }
    return s;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    return f;
}

// ------------------------------------------------------------------ config

json defaults() {
    return json::parse(R"({
      "preset": "wave-wt",
      "grid": {"a": 0.0, "b": 1.0, "n_cells": 32},
      "time": {"t_end": 2.0, "n_steps": 200, "nu": 1.0},
      "scheme": "implicit_midpoint",
      "input": {"kind": "sinusoid", "freq": 1.0, "amplitude": 1.0, "component": 0},
      "initial": {"kind": "bump", "amplitude": 1.0, "center": 0.5, "width": 0.1},
      "regions": {"elliptic": [0.0, 0.3333333333333333], "parabolic": [0.3333333333333333, 0.6666666666666666]},
      "nu_max": 10.0,
      "ledger_intervals": 4,
      "seed": 20240601,
      "output_dir": ".",
      "thresholds": {"ledger": 1e-9, "bd": 1e-10, "io": 1e-10}
    })");
}

void apply_override(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &cfg;
    std::stringstream ks(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ks, part, '.')) parts.push_back(part);
    for (size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    (*node)[parts.back()] = value;
}

json load_config(const std::string& path, const std::vector<std::string>& sets) {
    json cfg = defaults();
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot read config file " + path);
        json user;
        try {
            user = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        cfg.merge_patch(user);
    }
    for (const auto& s : sets) apply_override(cfg, s);
    return cfg;
}

double get_num(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw ConfigError(std::string("missing numeric field '") + key + "'");
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) throw ConfigError(std::string("field '") + key + "' is not finite");
    return v;
}

int get_int(const json& j, const char* key) {
    const double v = get_num(j, key);
    if (v != std::floor(v)) throw ConfigError(std::string("field '") + key + "' must be an integer");
    return static_cast<int>(v);
}

Grid1D grid_of(const json& cfg) {
    const auto& g = cfg["grid"];
    return Grid1D::make(get_num(g, "a"), get_num(g, "b"), get_int(g, "n_cells"));
}

TimeGrid time_of(const json& cfg) {
    const auto& t = cfg["time"];
    try {
        return TimeGrid::make(get_num(t, "t_end"), get_int(t, "n_steps"), get_num(t, "nu"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

uint64_t seed_of(const json& cfg) {
    if (const char* env = std::getenv("EVOCTL_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("EVOCTL_SEED must be an unsigned integer");
        }
    }
    return cfg.contains("seed") ? cfg["seed"].get<uint64_t>() : kDefaultSeed;
}

// Reads "t,u_0,u_1,..." rows and interpolates linearly (constant outside the table).
Sampler table_sampler(const std::string& path, int dim) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read input table " + path);
    std::vector<double> ts;
    std::vector<Vec> us;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != dim + 1) throw ConfigError("input table row has the wrong width");
        ts.push_back(row[0]);
        Vec u(dim);
        for (int i = 0; i < dim; ++i) u(i) = row[i + 1];
        us.push_back(u);
    }
    if (ts.empty()) throw ConfigError("input table is empty");
    return [ts, us](double t) -> Vec {
        if (t <= ts.front()) return us.front();
        if (t >= ts.back()) return us.back();
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const size_t i = static_cast<size_t>(it - ts.begin());
        const double s = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
        return (1.0 - s) * us[i - 1] + s * us[i];
    };
}

Sampler input_of(const json& cfg, int dim) {
    const auto& in = cfg["input"];
    const std::string kind = in.value("kind", "zero");
    if (kind == "zero") return zero_sampler(dim);
    if (kind == "sinusoid") {
        const double freq = get_num(in, "freq"), amp = get_num(in, "amplitude");
        const int comp = get_int(in, "component");
        if (comp < 0 || comp >= dim) throw ConfigError("input component out of range");
        return [=](double t) {
            Vec u = Vec::Zero(dim);
            u(comp) = amp * std::sin(2.0 * M_PI * freq * t);
            return u;
        };
    }
    if (kind == "constant") {
        const double amp = get_num(in, "amplitude");
        const int comp = get_int(in, "component");
        if (comp < 0 || comp >= dim) throw ConfigError("input component out of range");
        return [=](double) {
            Vec u = Vec::Zero(dim);
            u(comp) = amp;
            return u;
        };
    }
    if (kind == "table") return table_sampler(in.value("path", ""), dim);
    throw ConfigError("unknown input kind '" + kind + "'");
}

std::function<double(double)> profile_of(const json& cfg) {
    const auto& ini = cfg["initial"];
    const std::string kind = ini.value("kind", "zero");
    if (kind == "zero") return [](double) { return 0.0; };
    if (kind == "bump") {
        const double a = get_num(ini, "amplitude"), c = get_num(ini, "center"), w = get_num(ini, "width");
        if (!(w > 0.0)) throw ConfigError("bump width must be positive");
        return [=](double x) { return a * std::exp(-((x - c) / w) * ((x - c) / w)); };
    }
    throw ConfigError("unknown initial kind '" + kind + "'");
}

// ------------------------------------------------------------------ presets

struct ControlRun {
    ControlSystem sys;
    Vec x0;
};

RegionIndicators regions_of(const json& cfg, const Grid1D& g) {
    auto range = [&](const char* key) {
        const auto& r = cfg["regions"][key];
        if (!r.is_array() || r.size() != 2) throw ConfigError(std::string("regions.") + key + " must be [lo, hi]");
        return std::pair<double, double>{r[0].get<double>(), r[1].get<double>()};
    };
    const auto e = range("elliptic"), p = range("parabolic");
    return indicators_from(g, [=](double x) {
        if (x >= e.first && x < e.second) return Region::elliptic;
        if (x >= p.first && x < p.second) return Region::parabolic;
        return Region::hyperbolic;
    });
}

ControlRun control_preset(const json& cfg, bool zero_damping) {
    const std::string preset = cfg.value("preset", "");
    const Grid1D g = grid_of(cfg);
    const auto prof = profile_of(cfg);
    if (preset == "wave-wt" || preset == "wave-mixed") {
        WaveSpec spec;
        spec.grid = g;
        spec.zero_damping = zero_damping;
        const WaveModel m = preset == "wave-wt" ? build_weiss_tucsnak_wave(spec)
                                                : build_mixed_type_wave(spec, regions_of(cfg, g));
        Vec z1(g.n_nodes());
        for (int i = 0; i < g.n_nodes(); ++i) z1(i) = prof(g.node(i));
        return {m.sys, m.initial_state(z1, Vec())};
    }
    if (preset == "port-hamiltonian") {
        const double r2 = std::sqrt(2.0);
        const Mat I2 = Mat::Identity(2, 2);
        PortHamiltonianSpec spec;
        spec.grid = g;
        spec.N = Mat::Identity(1, 1);
        spec.H = [](double) { return Mat(Mat::Identity(2, 2)); };
        spec.P0 = Mat::Zero(2, 2);
        spec.M1_22 = I2;
        spec.M1_23 = Mat::Zero(2, 2);
        spec.M1_32 = zero_damping ? Mat(Mat::Zero(2, 2)) : Mat(r2 * I2);
        spec.M1_33 = zero_damping ? Mat(Mat::Zero(2, 2)) : I2;
        spec.B1 = -r2 * I2;
        spec.B2 = -I2;
        const auto m = build_port_hamiltonian(spec);
        Vec x0 = Vec::Zero(m.sys.part.dim());
        const double sh = std::sqrt(g.h());
        for (int j = 0; j < g.n_cells; ++j) x0(j) = sh * prof(g.midpoint(j));
        return {m.sys, x0};
    }
    throw ConfigError("unknown control preset '" + preset + "'");
}

bool is_maxwell(const json& cfg) { return cfg.value("preset", "") == "maxwell-lift-1d"; }

void check_preset_name(const json& cfg) {
    static const std::vector<std::string> names{"port-hamiltonian", "wave-wt", "wave-mixed", "maxwell-lift-1d"};
    const std::string p = cfg.value("preset", "");
    if (std::find(names.begin(), names.end(), p) == names.end()) throw ConfigError("unknown preset '" + p + "'");
}

fs::path out_dir(const json& cfg, const std::string& cli_dir) {
    return cli_dir.empty() ? fs::path(cfg.value("output_dir", ".")) : fs::path(cli_dir);
}

void write_trajectory(const fs::path& dir, const Trajectory& tr) {
    auto f = open_out(dir, "trajectory.csv");
    const Eigen::Index n = tr.states.front().size();
    f << "t" << complex_header("x", n) << "\n";
    for (int k = 0; k <= tr.grid.n_steps; ++k) f << num(tr.grid.t(k)) << complex_fields(tr.states[k]) << "\n";
}

// Index of the first grid point after any consistent-initialization step.
int ledger_start(const Trajectory& tr) {
    int s = 0;
    while (s < tr.n_steps() && tr.step_scheme[s] != tr.scheme) ++s;
    return s;
}

bool write_ledger(const fs::path& dir, const ControlSystem& sys, const Trajectory& tr, const json& cfg) {
    const auto u = control_samples(sys, tr);
    const int s = ledger_start(tr);
    const int parts = std::max(1, cfg.value("ledger_intervals", 4));
    const double thr = cfg["thresholds"].value("ledger", 1e-9);
    auto f = open_out(dir, "ledger.csv");
    f << "a,b,stored_drop,dissipation,supply,defect\n";
    bool ok = true;
    std::vector<std::pair<int, int>> spans{{s, tr.n_steps()}};
    const int len = tr.n_steps() - s;
    for (int i = 0; i < parts && len >= parts; ++i) spans.push_back({s + i * len / parts, s + (i + 1) * len / parts});
    for (auto [ia, ib] : spans) {
        if (ia >= ib) continue;
        const auto L = energy_ledger(sys, tr, u, tr.grid.t(ia), tr.grid.t(ib));
        f << num(L.a) << "," << num(L.b) << "," << num(L.stored_drop) << "," << num(L.dissipation) << ","
          << num(L.supply) << "," << num(L.defect) << "\n";
        const double scale = std::max(1.0, L.b - L.a);
        if (tr.scheme == Scheme::implicit_midpoint) ok = ok && std::abs(L.defect) <= thr * scale;
        else ok = ok && L.defect >= -1e-12 && std::abs(L.defect - L.artificial_dissipation) <= 1e-11 * std::max(1.0, std::abs(L.defect));
    }
    return ok;
}

bool write_io(const fs::path& dir, const ControlSystem& sys, const Trajectory& tr, const json& cfg) {
    const auto io = extract_io(sys, tr);
    auto f = open_out(dir, "io.csv");
    f << "t" << complex_header("u", sys.part.nu) << complex_header("y", sys.part.ny) << "\n";
    for (size_t k = 0; k < io.t.size(); ++k)
        f << num(io.t[k]) << complex_fields(tr.inputs[k].tail(sys.part.nu)) << complex_fields(io.y[k]) << "\n";
    return io.max_deviation <= cfg["thresholds"].value("io", 1e-10);
}

struct MaxwellRun {
    GradDivPair pair;
    Vec E0;
};

MaxwellRun maxwell_preset(const json& cfg) {
    const Grid1D g = grid_of(cfg);
    MaxwellRun r{build_sbp_pair_1d(g), Vec(g.n_nodes())};
    const auto prof = profile_of(cfg);
    for (int i = 0; i < g.n_nodes(); ++i) r.E0(i) = prof(g.node(i));
    return r;
}

// ------------------------------------------------------------------ commands

int cmd_wellposed(const json& cfg, const fs::path& dir, bool zero_damping) {
    check_preset_name(cfg);
    Mat M0, M1;
    if (is_maxwell(cfg)) {
        // Lifted system with ε = μ = 1: M₀ = I, M₁ = 0.
        const Grid1D g = grid_of(cfg);
        const int n = g.n_nodes() + g.n_cells - 2;
        M0 = Mat::Identity(n, n);
        M1 = Mat::Zero(n, n);
    } else {
        const auto run = control_preset(cfg, zero_damping);
        M0 = run.sys.M0;
        M1 = run.sys.M1;
    }
    const double nu_max = get_num(cfg, "nu_max");
    const auto rep = check_wellposed(M0, M1, nu_max);
    auto f = open_out(dir, "wellposed.csv");
    f << "# preset=" << cfg.value("preset", "") << " ok=" << (rep.ok ? 1 : 0) << " c=" << num(rep.c)
      << " nu0=" << num(rep.nu0) << "\n";
    f << "nu,c_min\n";
    constexpr int rows = 31;
    for (int i = 0; i < rows; ++i) {
        const double nu = nu_max * std::pow(10.0, -3.0 + 3.0 * i / (rows - 1));
        f << num(nu) << "," << num(coercivity(M0, M1, nu)) << "\n";
    }
    std::cout << "wellposed: ok=" << rep.ok << " c=" << num(rep.c) << " nu0=" << num(rep.nu0) << "\n";
    if (!rep.ok) {
        std::cerr << "well-posedness violated; witness direction:";
        for (Eigen::Index i = 0; i < rep.witness.size(); ++i)
            if (std::abs(rep.witness(i)) > 1e-12) std::cerr << " [" << i << "]=" << num(std::abs(rep.witness(i)));
        std::cerr << "\n";
        return 1;
    }
    return 0;
}

int cmd_simulate(const json& cfg, const fs::path& dir, bool zero_damping) {
    check_preset_name(cfg);
    const TimeGrid tg = time_of(cfg);
    const Scheme scheme = parse_scheme(cfg.value("scheme", "implicit_midpoint"));
    if (is_maxwell(cfg)) {
        const auto run = maxwell_preset(cfg);
        const auto u = input_of(cfg, 2);
        const auto res = maxwell_lift_solve(run.pair, Mat(), Mat(), u, run.E0, Vec::Zero(run.pair.n_cells()), tg, scheme);
        write_trajectory(dir, res.direct);
        auto f = open_out(dir, "lift.csv");
        f << "t,gap\n";
        for (int k = 0; k <= tg.n_steps; ++k) f << num(tg.t(k)) << "," << num(res.gap[k]) << "\n";
        const auto& th = cfg["thresholds"];
        return th.contains("lift") && res.max_gap > th["lift"].get<double>() ? 1 : 0;
    }
    const auto run = control_preset(cfg, zero_damping);
    const auto u = input_of(cfg, run.sys.part.nu);
    const auto tr = simulate(run.sys, run.x0, u, tg, scheme);
    write_trajectory(dir, tr);
    const bool ledger_ok = write_ledger(dir, run.sys, tr, cfg);
    const bool io_ok = write_io(dir, run.sys, tr, cfg);
    return ledger_ok && io_ok ? 0 : 1;
}

Trajectory read_trajectory(const fs::path& path, const ControlSystem& sys, const Sampler& u, const TimeGrid& tg,
                           Scheme scheme) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read trajectory " + path.string());
    Trajectory tr;
    tr.grid = tg;
    tr.scheme = scheme;
    std::string line;
    const int n = sys.part.dim();
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != 1 + 2 * n) throw ConfigError("trajectory width does not match the preset");
        Vec x(n);
        for (int i = 0; i < n; ++i) x(i) = cplx(row[1 + 2 * i], row[2 + 2 * i]);
        tr.states.push_back(x);
    }
    if (static_cast<int>(tr.states.size()) != tg.n_steps + 1)
        throw ConfigError("trajectory length does not match the time grid");
    // Reconstruct the step schedule exactly as the solver chooses it.
    Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(sys.M0), Eigen::EigenvaluesOnly);
    const bool singular = scheme == Scheme::implicit_midpoint &&
                          es.eigenvalues().cwiseAbs().minCoeff() <= 1e-12 * std::max(1.0, max_abs(sys.M0));
    const auto src = control_source(sys, u);
    for (int k = 0; k < tg.n_steps; ++k) {
        const bool be = scheme == Scheme::backward_euler || (k == 0 && singular);
        const double t = be ? tg.t(k + 1) : tg.t(k) + 0.5 * tg.tau();
        tr.step_scheme.push_back(be ? Scheme::backward_euler : Scheme::implicit_midpoint);
        tr.eval_times.push_back(t);
        tr.inputs.push_back(src(t));
    }
    return tr;
}

int cmd_energy(const json& cfg, const fs::path& dir, const std::string& traj_path, bool zero_damping) {
    check_preset_name(cfg);
    if (is_maxwell(cfg)) throw ConfigError("energy ledger needs a control-system preset");
    const TimeGrid tg = time_of(cfg);
    const Scheme scheme = parse_scheme(cfg.value("scheme", "implicit_midpoint"));
    const auto run = control_preset(cfg, zero_damping);
    const auto u = input_of(cfg, run.sys.part.nu);
    const fs::path tp = traj_path.empty() ? dir / "trajectory.csv" : fs::path(traj_path);
    const auto tr = read_trajectory(tp, run.sys, u, tg, scheme);
    return write_ledger(dir, run.sys, tr, cfg) ? 0 : 1;
}

int cmd_bdspace(const json& cfg, const fs::path& dir) {
    const Grid1D g = grid_of(cfg);
    const auto pair = build_sbp_pair_1d(g);
    const auto bdG = compute_bd_space(pair, BdSide::G);
    const auto bdD = compute_bd_space(pair, BdSide::D);
    const uint64_t seed = seed_of(cfg);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    auto rv = [&](int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
        return v;
    };

    {
        auto f = open_out(dir, "bd_basis.csv");
        f << "side,index,x";
        for (int c = 0; c < bdG.dim(); ++c) f << ",re(phi_" << c << "),im(phi_" << c << ")";
        f << "\n";
        for (int i = 0; i < pair.n_nodes(); ++i) f << "G," << i << "," << num(g.node(i)) << complex_fields(bdG.basis.row(i).transpose()) << "\n";
        for (int j = 0; j < pair.n_cells(); ++j) f << "D," << j << "," << num(g.midpoint(j)) << complex_fields(bdD.basis.row(j).transpose()) << "\n";
    }

    const int nn = pair.n_nodes(), nc = pair.n_cells(), d = bdG.dim();
    const Mat Q = dot_map(bdG, bdD, pair), Qd = dot_map(bdD, bdG, pair);
    const Mat Id = Mat::Identity(d, d);
    const double kernel = std::max(max_abs((Mat::Identity(nn, nn) - pair.D * pair.G) * bdG.basis),
                                   max_abs((Mat::Identity(nc, nc) - pair.G * pair.D) * bdD.basis));
    const double ortho = std::max(max_abs(bdG.basis.adjoint() * bdG.gram * bdG.basis - Id),
                                  max_abs(bdD.basis.adjoint() * bdD.gram * bdD.basis - Mat::Identity(bdD.dim(), bdD.dim())));
    const double unitarity = max_abs(Q.adjoint() * Q - Id);
    const double inverse = max_abs(Qd * Q - Id);
    double decomposition = 0.0, green = 0.0, riesz = 0.0;
    const Mat R = riesz_map(pair);
    for (int k = 0; k < 100; ++k) {
        const Vec u = rv(nn);
        const Vec ub = bdG.embedding * (bdG.projector * u);
        const Vec um = u - ub;
        decomposition = std::max({decomposition, std::abs(um(0)), std::abs(um(nn - 1)), std::abs(um.dot(bdG.gram * ub))});
        green = std::max(green, boundary_triple_defect(pair, bdG, bdD, u, rv(nc), rv(nn), rv(nc)));
        const Vec phi = rv(nn), psi = rv(nn);
        const Vec Rphi = R * phi;
        riesz = std::max(riesz, std::abs(psi.dot(bdG.gram * Rphi) - wdot(psi, pair.w0, phi)));
    }
    auto f = open_out(dir, "bd_defects.csv");
    f << "# seed=" << seed << "\n";
    f << "n_cells,dim_bd_g,dim_bd_d,kernel_residual,orthonormality,unitarity,inverse,decomposition,green_identity,riesz\n";
    f << g.n_cells << "," << bdG.dim() << "," << bdD.dim() << "," << num(kernel) << "," << num(ortho) << ","
      << num(unitarity) << "," << num(inverse) << "," << num(decomposition) << "," << num(green) << "," << num(riesz)
      << "\n";
    const double thr = cfg["thresholds"].value("bd", 1e-10);
    const bool ok = bdG.dim() == 2 && bdD.dim() == 2 &&
                    std::max({kernel, ortho, unitarity, inverse, decomposition, green, riesz}) <= thr;
    std::cout << "bdspace: dim=" << bdG.dim() << "/" << bdD.dim() << (ok ? " ok" : " FAILED") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

std::string default_config_json() { return defaults().dump(2); }

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"evoctl: boundary-controlled evolutionary systems"};
    app.require_subcommand(1);
    std::string config_path, dir_override, traj_path;
    std::vector<std::string> sets;
    bool zero_damping = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--set", sets, "override a config entry, key=value (dotted keys)");
        sub->add_option("--output-dir", dir_override, "directory for output files");
    };
    auto* wp = app.add_subcommand("wellposed", "certify nu*M0 + Re M1 >= c > 0");
    add_common(wp);
    wp->add_flag("--zero-damping", zero_damping, "drop the damping rows of the Y block");
    auto* sim = app.add_subcommand("simulate", "integrate a preset and write trajectory, ledger and io");
    add_common(sim);
    sim->add_flag("--zero-damping", zero_damping, "drop the damping rows of the Y block");
    auto* bd = app.add_subcommand("bdspace", "boundary data spaces and defect report");
    add_common(bd);
    auto* en = app.add_subcommand("energy", "energy ledger over a stored trajectory");
    add_common(en);
    en->add_option("--trajectory", traj_path, "trajectory.csv to read (default: output dir)");
    app.add_subcommand("print-config", "print the default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand("print-config")) {
            std::cout << default_config_json() << "\n";
            return 0;
        }
        const json cfg = load_config(config_path, sets);
        const fs::path dir = out_dir(cfg, dir_override);
        if (app.got_subcommand(wp)) return cmd_wellposed(cfg, dir, zero_damping);
        if (app.got_subcommand(sim)) return cmd_simulate(cfg, dir, zero_damping);
        if (app.got_subcommand(bd)) return cmd_bdspace(cfg, dir);
        if (app.got_subcommand(en)) return cmd_energy(cfg, dir, traj_path, zero_damping);
    } catch (const InvalidGridError& e) {
        std::cerr << "invalid grid: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const HypothesisViolation& e) {
        std::cerr << "hypothesis violated: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace evoctl
