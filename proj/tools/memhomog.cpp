// Batch front end: parses key=value configs, dispatches the regime pipelines,
// and writes machine-readable results (JSON for single runs, CSV for sweeps).

#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "memhomog/case4.hpp"
#include "memhomog/common.hpp"
#include "memhomog/ensemble.hpp"
#include "memhomog/fem.hpp"
#include "memhomog/helfrich.hpp"
#include "memhomog/io.hpp"
#include "memhomog/sde.hpp"
#include "memhomog/surface.hpp"

namespace {

using namespace memhomog;

using Scalars = std::vector<std::pair<std::string, double>>;

SurfaceSpec surface_from_config(const Config& cfg) {
    const std::string kind = cfg.get_string("surface.kind", "eggcarton");
    const double amplitude = cfg.get_double("surface.amplitude", 1.0);
    SurfaceSpec spec;
    if (kind == "eggcarton") {
        spec = EggCartonSurface{amplitude};
    } else if (kind == "mixedmode") {
        spec = MixedModeSurface{amplitude};
    } else if (kind == "onedim") {
        spec = OneDimSurface{amplitude};
    } else if (kind == "bump") {
        BumpSurface b;
        b.amplitude = amplitude;
        b.radius = cfg.get_double("surface.radius", 0.45);
        b.center = {cfg.get_double("surface.center_x", 0.5),
                    cfg.get_double("surface.center_y", 0.5)};
        spec = b;
    } else if (kind == "fourier") {
        FourierSurface f;
        const std::string modes = cfg.get_string("surface.modes", "");
        if (modes.empty()) throw ConfigError("surface.modes is required for kind=fourier");
        std::stringstream ss(modes);
        std::string item;
        while (std::getline(ss, item, ';')) {
            if (item.empty()) continue;
            FourierMode m;
            double k1 = 0.0, k2 = 0.0;
            std::stringstream ms(item);
            std::string field;
            double* slots[4] = {&k1, &k2, &m.cos_coeff, &m.sin_coeff};
            int got = 0;
            while (std::getline(ms, field, ',') && got < 4)
                *slots[got++] = Config::parse_double("surface.modes", field);
            if (got != 4)
                throw ConfigError("surface.modes entries need 4 fields (k1,k2,a,b)");
            m.k1 = static_cast<int>(k1);
            m.k2 = static_cast<int>(k2);
            f.modes.push_back(m);
        }
        spec = f;
    } else {
        throw ConfigError("unknown surface.kind '" + kind +
                          "' (eggcarton|mixedmode|bump|onedim|fourier)");
    }
    validate_surface(spec);
    return spec;
}

HelfrichParams helfrich_from_config(const Config& cfg) {
    HelfrichParams p;
    p.kappa_star = cfg.get_double("helfrich.kappa_star", 1.0);
    p.sigma_star = cfg.get_double("helfrich.sigma_star", 0.0);
    p.cutoff = cfg.get_double("helfrich.cutoff", 4.0);
    return p;
}

Scalars run_case0(const Config& cfg) {
    const SurfaceSpec spec = surface_from_config(cfg);
    const int mesh_m = static_cast<int>(cfg.get_int("mesh.resolution", 256));
    const double tol = cfg.get_double("solver.tol", 1e-10);
    const long itf = cfg.get_int("solver.max_iter_factor", 10);
    cfg.reject_unknown();

    const PeriodicMesh mesh(mesh_m);
    const EffectiveTensor t =
        effective_tensor(mesh, spec, tol, itf * static_cast<long>(mesh_m) * mesh_m);
    const EigenSummary eig = eigen_summary(t.D, t.Z);
    return {{"D11", t.D.a11},
            {"D12", t.D.a12},
            {"D22", t.D.a22},
            {"Z", t.Z},
            {"Das", t.area_scaling},
            {"lower11", t.lower.a11},
            {"lower22", t.lower.a22},
            {"upper11", t.upper.a11},
            {"upper22", t.upper.a22},
            {"lambda1", eig.lambda1},
            {"lambda2", eig.lambda2},
            {"det_residual", eig.det_residual},
            {"mesh_M", static_cast<double>(t.mesh_M)},
            {"cg_iters", static_cast<double>(t.cg_iterations)},
            {"cg_residual", t.cg_residual}};
}

Scalars run_quenched(const Config& cfg, std::string* samples_csv) {
    const HelfrichParams params = helfrich_from_config(cfg);
    const int n_samples = static_cast<int>(cfg.get_int("ensemble.samples", 100));
    const int mesh_m = static_cast<int>(cfg.get_int("ensemble.mesh", 128));
    const double tol = cfg.get_double("solver.tol", 1e-10);
    const std::uint64_t seed = cfg.get_u64("seed", 12345);
    const bool per_sample = cfg.get_bool("output.per_sample", false);
    cfg.reject_unknown();

    const EnsembleSummary s =
        quenched_average(params, n_samples, mesh_m, tol, seed, per_sample);
    if (per_sample && samples_csv) {
        CsvWriter csv({"seed", "D11", "D12", "D22", "Z"});
        for (const auto& r : s.per_sample)
            csv.add_row({static_cast<double>(r.stream), r.D.a11, r.D.a12, r.D.a22, r.Z});
        *samples_csv = csv.to_string();
    }
    return {{"mean_D11", s.mean_D.a11},
            {"mean_D12", s.mean_D.a12},
            {"mean_D22", s.mean_D.a22},
            {"std_D11", s.std_D.a11},
            {"std_D12", s.std_D.a12},
            {"std_D22", s.std_D.a22},
            {"mean_area_scaling", s.mean_area_scaling},
            {"delta", s.delta},
            {"n_samples", static_cast<double>(s.n_samples)},
            {"master_seed", static_cast<double>(s.master_seed)}};
}

Scalars run_annealed(const Config& cfg) {
    const HelfrichParams params = helfrich_from_config(cfg);
    const int n_samples = static_cast<int>(cfg.get_int("ensemble.samples", 100000));
    const int grid_n = static_cast<int>(cfg.get_int("ensemble.grid", 4));
    const std::uint64_t seed = cfg.get_u64("seed", 12345);
    cfg.reject_unknown();

    const AnnealedResult r = annealed_tensor(params, n_samples, grid_n, seed);
    return {{"D", r.D},
            {"stderr", r.stderr_D},
            {"delta", r.delta},
            {"weak_disorder_est", r.weak_disorder}};
}

Scalars run_case3drift(const Config& cfg) {
    SingleModeConfig mode;
    mode.kappa_star = cfg.get_double("helfrich.kappa_star", 1.0);
    mode.sigma_star = cfg.get_double("helfrich.sigma_star", 0.0);
    mode.k1 = static_cast<int>(cfg.get_int("case3.mode_k1", 1));
    mode.k2 = static_cast<int>(cfg.get_int("case3.mode_k2", 1));
    mode.asymmetric = cfg.get_bool("case3.asymmetric", false);
    const int mesh_m = static_cast<int>(cfg.get_int("case3.mesh", 128));
    const int n_eta = static_cast<int>(cfg.get_int("case3.eta_points", 17));
    const double span = cfg.get_double("case3.eta_span_sigmas", 5.0);
    const double tol = cfg.get_double("solver.tol", 1e-10);
    cfg.reject_unknown();

    const double hw = span * std::sqrt(mode.pi());
    std::vector<double> grid(n_eta);
    for (int j = 0; j < n_eta; ++j)
        grid[j] = -hw + 2.0 * hw * j / (n_eta - 1);
    const Case3DriftResult r = case3_drift_estimate(mode, mesh_m, grid, tol);
    return {{"Lx", r.L.x},
            {"Ly", r.L.y},
            {"eta_points", static_cast<double>(r.eta_points)},
            {"mesh_M", static_cast<double>(r.mesh_M)}};
}

Scalars run_case4_cmd(const Config& cfg, std::string* density_csv) {
    Case4Config c4;
    c4.mode.kappa_star = cfg.get_double("helfrich.kappa_star", 1.0);
    c4.mode.sigma_star = cfg.get_double("helfrich.sigma_star", 0.0);
    c4.mode.k1 = static_cast<int>(cfg.get_int("case4.mode_k1", 1));
    c4.mode.k2 = static_cast<int>(cfg.get_int("case4.mode_k2", 1));
    c4.mode.asymmetric = cfg.get_bool("case4.asymmetric", false);
    c4.mesh_y = static_cast<int>(cfg.get_int("case4.mesh_y", 32));
    c4.mesh_eta = static_cast<int>(cfg.get_int("case4.mesh_eta", 64));
    c4.eta_halfwidth = cfg.get_double("case4.eta_halfwidth", 0.0);
    c4.tol = cfg.get_double("solver.tol", 1e-10);
    c4.centering_gate = cfg.get_double("case4.centering_gate", 1e-6);
    const bool want_density = cfg.get_bool("output.density_csv", false);
    cfg.reject_unknown();

    const Case4System sys = assemble_generator(c4);
    const InvariantDensity density = solve_invariant_density(sys, c4.tol);
    const Vec2 centering = check_centering(sys, density);
    const CorrectorPair correctors = solve_corrector(sys, density, c4.tol);
    Case4Tensor t = effective_tensor_case4(sys, density, correctors);
    t.centering = centering;

    if (want_density && density_csv) {
        CsvWriter csv({"y1", "y2", "eta", "rho"});
        for (int i = 0; i < sys.my(); ++i)
            for (int j = 0; j < sys.my(); ++j)
                for (int k = 0; k <= sys.ke(); ++k)
                    csv.add_row({static_cast<double>(i) / sys.my(),
                                 static_cast<double>(j) / sys.my(), sys.eta_of(k),
                                 density.rho[sys.node_id(i, j, k)]});
        *density_csv = csv.to_string();
    }
    return {{"D11", t.D.a11},
            {"D12", t.D.a12},
            {"D22", t.D.a22},
            {"centering_x", t.centering.x},
            {"centering_y", t.centering.y},
            {"eig_residual", t.eig_residual},
            {"energy_identity_residual", t.energy_identity_residual},
            {"meshY", static_cast<double>(c4.mesh_y)},
            {"meshEta", static_cast<double>(c4.mesh_eta)},
            {"M", sys.halfwidth}};
}

Scalars run_simulate(const Config& cfg, std::string* paths_csv) {
    SimConfig sim;
    sim.regime = parse_regime(cfg.get_string("sim.regime", "case0"));
    sim.epsilon = cfg.get_double("sim.epsilon", 0.1);
    sim.dt = cfg.get_double("sim.dt", 1e-5);
    sim.t_final = cfg.get_double("sim.t_final", 1.0);
    sim.n_paths = static_cast<int>(cfg.get_int("sim.paths", 10000));
    sim.seed = cfg.get_u64("seed", 12345);
    sim.single_mode = cfg.get_bool("sim.single_mode", false);
    if (sim.regime == SimRegime::case0) {
        sim.surface = surface_from_config(cfg);
    } else if (sim.single_mode) {
        sim.mode.kappa_star = cfg.get_double("helfrich.kappa_star", 1.0);
        sim.mode.sigma_star = cfg.get_double("helfrich.sigma_star", 0.0);
        sim.mode.k1 = static_cast<int>(cfg.get_int("sim.mode_k1", 1));
        sim.mode.k2 = static_cast<int>(cfg.get_int("sim.mode_k2", 1));
    } else {
        sim.helfrich = helfrich_from_config(cfg);
    }
    const bool want_paths = cfg.get_bool("output.paths_csv", false);
    cfg.reject_unknown();

    const std::vector<Vec2> terminal = simulate_paths(sim);
    const DiffusionEstimate est = estimate_diffusion(terminal, sim.t_final);
    if (want_paths && paths_csv) {
        CsvWriter csv({"path", "x1", "x2"});
        for (std::size_t p = 0; p < terminal.size(); ++p)
            csv.add_row({static_cast<double>(p), terminal[p].x, terminal[p].y});
        *paths_csv = csv.to_string();
    }
    return {{"D11", est.D.a11},
            {"D12", est.D.a12},
            {"D22", est.D.a22},
            {"se11", est.stderr_D.a11},
            {"se12", est.stderr_D.a12},
            {"se22", est.stderr_D.a22},
            {"drift_x", est.drift.x},
            {"drift_y", est.drift.y},
            {"drift_se_x", est.stderr_drift.x},
            {"drift_se_y", est.stderr_drift.y},
            {"t_final", est.t_final},
            {"n_paths", static_cast<double>(est.n_paths)}};
}

Scalars dispatch(const std::string& command, const Config& cfg, std::string* aux_csv,
                 std::string* aux_name) {
    if (command == "case0") return run_case0(cfg);
    if (command == "quenched") {
        *aux_name = "samples.csv";
        return run_quenched(cfg, aux_csv);
    }
    if (command == "annealed") return run_annealed(cfg);
    if (command == "case3drift") return run_case3drift(cfg);
    if (command == "case4") {
        *aux_name = "density.csv";
        return run_case4_cmd(cfg, aux_csv);
    }
    if (command == "simulate") {
        *aux_name = "paths.csv";
        return run_simulate(cfg, aux_csv);
    }
    throw ConfigError("unknown command '" + command + "'");
}

std::vector<double> parse_sweep_values(const Config& cfg) {
    const std::string values = cfg.get_string("sweep.values", "");
    const std::string linrange = cfg.get_string("sweep.linrange", "");
    const std::string logrange = cfg.get_string("sweep.logrange", "");
    const int provided = (!values.empty()) + (!linrange.empty()) + (!logrange.empty());
    if (provided != 1)
        throw ConfigError("sweep needs exactly one of sweep.values, sweep.linrange, "
                          "sweep.logrange");
    std::vector<double> out;
    if (!values.empty()) {
        std::stringstream ss(values);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(Config::parse_double("sweep.values", item));
    } else {
        const std::string& spec = !linrange.empty() ? linrange : logrange;
        const auto dots = spec.find("..");
        const auto colon = spec.rfind(':');
        if (dots == std::string::npos || colon == std::string::npos || colon < dots)
            throw ConfigError("range syntax is lo..hi:count");
        const double lo = Config::parse_double("sweep range", spec.substr(0, dots));
        const double hi =
            Config::parse_double("sweep range", spec.substr(dots + 2, colon - dots - 2));
        long count = 0;
        try {
            count = std::stol(spec.substr(colon + 1));
        } catch (...) {
            throw ConfigError("range syntax is lo..hi:count");
        }
        if (count < 2) throw ConfigError("sweep range needs at least 2 points");
        for (long i = 0; i < count; ++i) {
            const double f = static_cast<double>(i) / (count - 1);
            if (!linrange.empty())
                out.push_back(lo + f * (hi - lo));
            else
                out.push_back(lo * std::pow(hi / lo, f));
        }
    }
    if (out.empty()) throw ConfigError("sweep produced an empty value list");
    return out;
}

int run_sweep(Config cfg, const std::string& outdir) {
    const std::string command = cfg.get_string("sweep.command", "");
    const std::string parameter = cfg.get_string("sweep.parameter", "");
    if (command.empty() || parameter.empty())
        throw ConfigError("sweep requires sweep.command and sweep.parameter");
    if (command == "sweep") throw ConfigError("cannot sweep a sweep");
    const std::vector<double> values = parse_sweep_values(cfg);

    std::vector<std::string> columns;
    CsvWriter* csv = nullptr;
    std::unique_ptr<CsvWriter> owned;
    for (const double v : values) {
        Config sub = cfg;  // sweep.* keys already consumed on the shared base
        sub.set(parameter, format_double(v));
        std::string aux, aux_name;
        const Scalars record = dispatch(command, sub, &aux, &aux_name);
        if (!csv) {
            columns.push_back(parameter);
            for (const auto& [k, unused] : record) columns.push_back(k);
            owned = std::make_unique<CsvWriter>(columns);
            csv = owned.get();
        }
        std::vector<double> row{v};
        for (const auto& [unused, val] : record) row.push_back(val);
        csv->add_row(row);
    }
    write_file(outdir + "/sweep.csv", csv->to_string());
    std::cout << "wrote " << outdir << "/sweep.csv (" << values.size() << " rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace memhomog;
    const std::string usage =
        "usage: memhomog <case0|quenched|annealed|case3drift|case4|simulate|sweep> "
        "[--config FILE] [key=value ...]\n";
    if (argc < 2) {
        std::cerr << usage;
        return 2;
    }
    const std::string command = argv[1];
    try {
        Config cfg;
        for (int i = 2; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config") {
                if (i + 1 >= argc) throw ConfigError("--config needs a file path");
                cfg.load_file(argv[++i]);
            } else if (arg.rfind("--config=", 0) == 0) {
                cfg.load_file(arg.substr(9));
            } else {
                cfg.parse_override(arg);
            }
        }
        const std::string outdir = cfg.get_string("output.dir", "out");

        if (command == "sweep") return run_sweep(std::move(cfg), outdir);

        std::string aux, aux_name;
        const Scalars record = dispatch(command, cfg, &aux, &aux_name);
        FlatRecord json;
        for (const auto& [k, v] : record) json.add(k, v);
        write_file(outdir + "/result.json", json.to_json());
        if (!aux.empty()) write_file(outdir + "/" + aux_name, aux);
        std::cout << json.to_json();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "{\"error\": \"config\", \"message\": \"" << e.what() << "\"}\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "{\"error\": \"numeric\", \"message\": \"" << e.what() << "\"}\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": \"internal\", \"message\": \"" << e.what() << "\"}\n";
        return 3;
    }
}
