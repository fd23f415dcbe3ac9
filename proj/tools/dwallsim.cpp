#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "dwallsim/dwallsim.hpp"

namespace fs = std::filesystem;
using namespace dwallsim;

namespace {

struct Context {
    RunConfig cfg;
    fs::path out;
    bool quiet = false;

    ModelParams params() const { return cfg.params(); }
    Grid1D grid() const { return cfg.grid.grid(); }
    const ExperimentSpec& exp() const { return cfg.experiment; }

    void say(const std::string& line) const {
        if (!quiet) std::cout << line << '\n';
    }
    std::string path(const std::string& name) const { return (out / name).string(); }
};

using Report = std::map<std::string, std::string>;

void write_report(const Context& ctx, const Report& rep, const std::string& name = "report.txt") {
    std::string text;
    for (const auto& [k, v] : rep) text += k + " = " + v + "\n";
    write_text(text, ctx.path(name));
    for (const auto& [k, v] : rep) ctx.say(k + " = " + v);
}

int sign_of(const ExperimentSpec& e, const std::string& key, int fallback) {
    const double v = e.number_or(key, fallback);
    if (v != 1.0 && v != -1.0) throw Error(ErrorCode::ValidationError, key + ": must be +1 or -1");
    return static_cast<int>(v);
}

WallPair pair_of(const ExperimentSpec& e) {
    return WallPair{sign_of(e, "sigma2", 1), sign_of(e, "sigma2_minus", 1)};
}

double symmetric_half_width(const GridSpec& g) {
    if (std::abs(g.x_min + g.x_max) > 1e-12 * g.x_max) {
        throw Error(ErrorCode::ValidationError, "x_min: this experiment needs a grid symmetric about 0");
    }
    return g.x_max;
}

/// initial = wall | two_wall | uniform | file
SpinField initial_state(const Context& ctx) {
    const ExperimentSpec& e = ctx.exp();
    const std::string kind = e.text_or("initial", "wall");
    const ModelParams params = ctx.params();
    const Grid1D grid = ctx.grid();
    if (kind == "wall") {
        const WallSign sigma(sign_of(e, "sigma1", 1), sign_of(e, "sigma2", 1));
        const Gauge g{e.number_or("y0", 0.0), e.number_or("phi0", 0.0)};
        return gauge_apply(g, AnalyticWall(sigma, params), grid);
    }
    if (kind == "two_wall") {
        const double L = e.number_or("L", 25.0);
        PerturbationSpec spec;
        spec.seed = ctx.cfg.seed;
        spec.delta = e.number_or("delta", 0.0);
        return perturbed_two_wall({e.number_or("y_plus", L), e.number_or("phi_plus", 0.0)},
                                  {e.number_or("y_minus", -L), e.number_or("phi_minus", 0.0)}, params, grid, spec,
                                  pair_of(e));
    }
    if (kind == "uniform") return SpinField::constant(grid, kE1);
    if (kind == "file") {
        const auto it = e.values.find("initial_file");
        if (it == e.values.end()) throw Error(ErrorCode::ValidationError, "initial_file: required for initial=file");
        return read_snapshot(it->second);
    }
    throw Error(ErrorCode::ValidationError, "initial: expected wall|two_wall|uniform|file, got '" + kind + "'");
}

SeriesColumns trajectory_columns(const Trajectory& traj) {
    SeriesColumns cols(traj.series.begin(), traj.series.end());
    cols["t"] = traj.times;
    return cols;
}

void write_trajectory(const Context& ctx, const Trajectory& traj) {
    if (traj.empty()) return;
    write_series(trajectory_columns(traj), ctx.path("series.csv"));
    fs::create_directories(ctx.out / "snapshots");
    char name[32];
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::snprintf(name, sizeof name, "snap_%06zu.txt", k);
        write_snapshot(traj.snapshots[k], (ctx.out / "snapshots" / name).string());
    }
    write_snapshot(traj.snapshots.back(), ctx.path("final.txt"));
}

/// Runs the configured simulation; partial output is written before any error propagates.
Trajectory simulate_into_files(const Context& ctx) {
    const SpinField m0 = initial_state(ctx);
    Trajectory traj;
    RunOptions opts;
    opts.warn = [&](const std::string& w) { std::cerr << "warning: " << w << '\n'; };
    try {
        run_into(traj, m0, ctx.params(), ctx.cfg.sim, opts);
    } catch (...) {
        write_trajectory(ctx, traj);
        throw;
    }
    write_trajectory(ctx, traj);
    return traj;
}

int cmd_simulate(const Context& ctx) {
    const Trajectory traj = simulate_into_files(ctx);
    const auto& e = traj.series.at("energy");
    ctx.say("snapshots = " + std::to_string(traj.size()));
    ctx.say("energy_initial = " + format_double(e.front()));
    ctx.say("energy_final = " + format_double(e.back()));
    return 0;
}

int cmd_modulate(const Context& ctx) {
    const ExperimentSpec& e = ctx.exp();
    const Trajectory traj = simulate_into_files(ctx);
    const double L = e.number_or("L", 25.0);
    TrajectoryDecompositionOptions opts;
    opts.modulation.pair = pair_of(e);
    opts.modulation.tol = e.number_or("tol", opts.modulation.tol);
    opts.modulation.max_iter = static_cast<int>(e.number_or("max_iter", opts.modulation.max_iter));
    const DecompositionSeries dec =
        decompose_trajectory(traj, ctx.params(), {e.number_or("y_plus", L), e.number_or("phi_plus", 0.0)},
                             {e.number_or("y_minus", -L), e.number_or("phi_minus", 0.0)}, opts);
    SeriesColumns cols = dec.series();
    cols["t"] = dec.times;
    write_series(cols, ctx.path("modulation.csv"));
    Report rep{{"decomposed", std::to_string(dec.states.size())}, {"snapshots", std::to_string(traj.size())}};
    if (dec.failed_at) rep["failed_at"] = std::to_string(*dec.failed_at);
    write_report(ctx, rep);
    if (dec.failed_at) {
        throw Error(ErrorCode::NoConvergence, "decomposition failed at snapshot " + std::to_string(*dec.failed_at));
    }
    return 0;
}

int cmd_spectrum(const Context& ctx) {
    const ModelParams params = ctx.params();
    const OperatorMatrix op = assemble_L(params, ctx.grid());
    const double k_raw = ctx.exp().number_or("k", 6);
    if (k_raw < 1 || k_raw > 10 || k_raw != std::floor(k_raw)) throw Error(ErrorCode::ValidationError, "k: must be in 1..10");
    const auto pairs = eigenpairs(op, static_cast<std::size_t>(k_raw));
    SeriesColumns spec, vecs;
    char name[16];
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        spec["index"].push_back(static_cast<double>(j + 1));
        spec["value"].push_back(pairs[j].value);
        std::snprintf(name, sizeof name, "v%02zu", j + 1);
        vecs[name] = pairs[j].vector;
    }
    std::vector<double> x(op.grid.n);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = op.grid.x(i);
    vecs["x"] = x;
    write_series(spec, ctx.path("spectrum.csv"));
    write_series(vecs, ctx.path("eigenvectors.csv"));
    Report rep{{"Gamma", format_double(params.Gamma())},
               {"lambda1", format_double(pairs.front().value)},
               {"lambda0_calibrated", format_double(calibrated_lambda0(op))},
               {"lambda0_certified_h1", format_double(certified_lambda0(op, NormOrder::H1))}};
    if (pairs.size() > 1) rep["lambda2"] = format_double(pairs[1].value);
    write_report(ctx, rep);
    return 0;
}

int cmd_verify_energy(const Context& ctx) {
    const ModelParams params = ctx.params();
    const Grid1D grid = ctx.grid();
    const SpinField w = wall_profile(WallSign(1, 1), params, grid);
    const double e_wall = energy_total(w, params).total;
    const Trajectory traj = simulate_into_files(ctx);
    const BalanceResidual bal = energy_balance_residual(traj, params);
    write_series({{"t", bal.times}, {"residual", bal.residual}}, ctx.path("energy_balance.csv"));
    write_report(ctx, {{"wall_energy", format_double(e_wall)},
                       {"wall_energy_exact", format_double(2.0 * params.Gamma())},
                       {"wall_energy_rel_error", format_double(e_wall / (2.0 * params.Gamma()) - 1.0)},
                       {"balance_max_abs", format_double(bal.max_abs)}});
    return 0;
}

TwoWallConfig two_wall_config(const Context& ctx) {
    const ExperimentSpec& e = ctx.exp();
    TwoWallConfig c;
    c.alpha = ctx.cfg.alpha;
    c.gamma = ctx.cfg.gamma;
    c.field = ctx.cfg.field;
    c.L = e.number_or("L", c.L);
    c.perturbation.seed = ctx.cfg.seed;
    c.perturbation.delta = e.number_or("delta", c.perturbation.delta);
    c.half_width = symmetric_half_width(ctx.cfg.grid);
    c.n = ctx.cfg.grid.n;
    c.t_end = ctx.cfg.sim.t_end;
    c.cfl = ctx.cfg.sim.cfl;
    c.scheme = ctx.cfg.sim.scheme;
    c.boundary = ctx.cfg.sim.boundary;
    c.snapshot_interval = e.number_or("snapshot_interval", c.snapshot_interval);
    if (auto l = e.number("lambda")) c.kappa_lambda = *l;
    c.pair = pair_of(e);
    c.tail_fraction = e.number_or("tail_fraction", c.tail_fraction);
    return c;
}

int cmd_stability(const Context& ctx) {
    const StabilityReport r = run_two_wall_experiment(two_wall_config(ctx));
    write_series({{"t", r.times},
                  {"eps_h1", r.eps_h1},
                  {"eps_h2", r.eps_h2},
                  {"kappa", r.kappa},
                  {"y_plus", r.y_plus},
                  {"phi_plus", r.phi_plus},
                  {"y_minus", r.y_minus},
                  {"phi_minus", r.phi_minus},
                  {"offset_y_plus", r.offset_y_plus},
                  {"offset_phi_plus", r.offset_phi_plus},
                  {"offset_y_minus", r.offset_y_minus},
                  {"offset_phi_minus", r.offset_phi_minus}},
                 ctx.path("stability.csv"));
    Report rep{{"stable", r.stable() ? "1" : "0"},
               {"envelope_A", format_double(r.envelope.A)},
               {"envelope_B", format_double(r.envelope.B)},
               {"envelope_lambda", format_double(r.envelope.lambda)},
               {"envelope_residual", format_double(r.envelope.residual)},
               {"kappa_lambda", format_double(r.kappa_lambda)},
               {"limit_y_plus", format_double(r.limit_plus.y)},
               {"limit_phi_plus", format_double(r.limit_plus.phi)},
               {"limit_y_minus", format_double(r.limit_minus.y)},
               {"limit_phi_minus", format_double(r.limit_minus.phi)},
               {"tail_plus", format_double(r.tail_plus)},
               {"tail_minus", format_double(r.tail_minus)},
               {"max_ortho_residual", format_double(r.max_ortho_residual)},
               {"gauge_velocity_constant", format_double(r.gauge_velocity_constant)}};
    if (r.decay) {
        rep["decay_rate"] = format_double(r.decay->rate);
        rep["decay_residual"] = format_double(r.decay->residual);
    }
    if (r.decomposition_failed_at) rep["decomposition_failed_at"] = std::to_string(*r.decomposition_failed_at);
    if (!r.error.empty()) rep["error"] = r.error;
    write_report(ctx, rep);
    if (r.blowup) throw Error(ErrorCode::Blowup, r.error);
    if (r.decomposition_failed_at) {
        throw Error(ErrorCode::NoConvergence,
                    "decomposition failed at snapshot " + std::to_string(*r.decomposition_failed_at));
    }
    return 0;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = parse_double(item);
        if (!v || !(*v > 0.0)) throw Error(ErrorCode::ValidationError, key + ": bad entry '" + item + "'");
        out.push_back(*v);
    }
    return out;
}

int cmd_coercivity(const Context& ctx) {
    const ExperimentSpec& e = ctx.exp();
    CoercivityConfig c;
    c.alpha = ctx.cfg.alpha;
    c.gamma = ctx.cfg.gamma;
    c.L = e.number_or("L", c.L);
    c.half_width = symmetric_half_width(ctx.cfg.grid);
    c.n = ctx.cfg.grid.n;
    c.seed = ctx.cfg.seed;
    if (auto it = e.values.find("amplitudes"); it != e.values.end()) c.amplitudes = parse_list("amplitudes", it->second);
    if (auto R = e.number("R")) c.R = *R;
    c.pair = pair_of(e);
    const CoercivityReport r = coercivity_experiment(c);
    write_series({{"amplitude", r.amplitudes}, {"excess", r.excess}, {"eps_h1_sq", r.eps_h1_sq}, {"ratio", r.ratio}},
                 ctx.path("coercivity.csv"));
    write_report(ctx, {{"reference_single", format_double(r.reference_single)},
                       {"slope", format_double(r.slope)},
                       {"lower", format_double(r.lower)},
                       {"upper", format_double(r.upper)},
                       {"tail_correction", format_double(r.tail_correction)},
                       {"zero_perturbation_excess", format_double(r.zero_perturbation_excess)}});
    return 0;
}

int cmd_dissipation(const Context& ctx) {
    const ExperimentSpec& e = ctx.exp();
    DissipationConfig c;
    c.run = two_wall_config(ctx);
    c.run.snapshot_interval = e.number_or("snapshot_interval", 0.05);
    c.window_fraction = e.number_or("window_fraction", c.window_fraction);
    if (auto R = e.number("R")) c.R = *R;
    const DissipationReport r = dissipation_experiment(c);
    write_series({{"t", r.times},
                  {"dEdt", r.dEdt},
                  {"eps_h1", r.eps_h1},
                  {"eps_h2", r.eps_h2},
                  {"envelope", r.envelope},
                  {"env_field", r.env_field},
                  {"env_cubic", r.env_cubic},
                  {"env_tails", r.env_tails},
                  {"env_q", r.env_q}},
                 ctx.path("dissipation.csv"));
    write_report(ctx, {{"c_fit", format_double(r.c_fit)},
                       {"max_dEdt", format_double(r.max_dEdt)},
                       {"largest_violation", format_double(r.largest_violation)},
                       {"window", std::to_string(r.window)}});
    return 0;
}

int cmd_kappa(const Context& ctx) {
    const ExperimentSpec& e = ctx.exp();
    const ModelParams params = ctx.params();
    const double t_max = e.number_or("t_max", ctx.cfg.sim.t_end);
    const double dt_out = e.number_or("dt_out", 0.1);
    if (!(t_max > 0.0)) throw Error(ErrorCode::ValidationError, "t_max: must be > 0");
    if (!(dt_out > 0.0)) throw Error(ErrorCode::ValidationError, "dt_out: must be > 0");
    double lambda = 0.0;
    if (auto l = e.number("lambda")) {
        lambda = *l;
    } else {
        lambda = params.alpha() * calibrated_lambda0(assemble_L(params, Grid1D::symmetric(40.0 / params.Gamma(), 2001)));
    }
    if (!(lambda > 0.0)) throw Error(ErrorCode::ValidationError, "lambda: must be > 0");
    std::vector<double> t;
    const auto count = static_cast<std::size_t>(std::floor(t_max / dt_out + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) t.push_back(static_cast<double>(k) * dt_out);
    const auto kap = kappa_series(t, InteractionSpec{lambda}, params);
    std::vector<double> q(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) q[k] = q_interaction(2.0 * wall_drift(params, t[k]), params.Gamma());
    write_series({{"t", t}, {"kappa", kap}, {"q", q}}, ctx.path("kappa.csv"));
    write_report(ctx, {{"lambda", format_double(lambda)},
                       {"kappa_final", format_double(kap.back())},
                       {"q_quasi_invariance_constant", format_double(q_quasi_invariance_constant(params.Gamma()))}});
    return 0;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::ValidationError: return 1;
        default: return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1D LLG domain-wall simulator and verification toolkit"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    const std::map<std::string, std::function<int(const Context&)>> commands{
        {"simulate", cmd_simulate},       {"modulate", cmd_modulate},       {"spectrum", cmd_spectrum},
        {"verify-energy", cmd_verify_energy}, {"stability", cmd_stability}, {"coercivity", cmd_coercivity},
        {"dissipation", cmd_dissipation}, {"kappa", cmd_kappa},
    };
    const std::map<std::string, std::string> help{
        {"simulate", "integrate the flow and write series and snapshots"},
        {"modulate", "integrate, then decompose every snapshot into gauges plus remainder"},
        {"spectrum", "lowest eigenpairs of the linearized operator"},
        {"verify-energy", "wall energy and the energy balance residual along a run"},
        {"stability", "two-wall stability experiment"},
        {"coercivity", "energy excess versus remainder norm over an amplitude sweep"},
        {"dissipation", "localized dissipation inequality along a run"},
        {"kappa", "interaction envelope kappa(t) and q(2 y*(t))"},
    };
    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
        sub->add_option("--seed", seed, "RNG seed (overrides [experiment] seed)");
        sub->add_flag("--quiet", quiet, "suppress the stdout summary");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    try {
        Context ctx;
        ctx.cfg = parse_config(config_path);
        if (seed) ctx.cfg.seed = *seed;
        if (!out_dir.empty()) ctx.cfg.output.dir = out_dir;
        ctx.out = ctx.cfg.output.dir;
        ctx.quiet = quiet;
        fs::create_directories(ctx.out);
        write_text(serialize_config(ctx.cfg), ctx.path("config.resolved.cfg"));
        return commands.at(chosen->get_name())(ctx);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "IO_ERROR: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
