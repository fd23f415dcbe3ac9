#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "test_util.hpp"

using namespace dwallsim;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"([model]
alpha = 0.5
gamma = 0.6

[grid]
x_min = -20
x_max = 20
n = 401

[sim]
t_end = 1
)";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dwallsim_io_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ErrorCode code_of(const std::function<void()>& fn, std::string* message = nullptr) {
    try {
        fn();
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(DWALLSIM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header) {
        std::stringstream hs(line);
        std::string h;
        while (std::getline(hs, h, ',')) header->push_back(h);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string cell;
        rows.emplace_back();
        while (std::getline(ls, cell, ',')) rows.back().push_back(*parse_double(cell));
    }
    return rows;
}

}  // namespace

TEST(Config, MinimalDefaults) {
    const RunConfig c = parse_config_text(kMinimal);
    EXPECT_EQ(c.alpha, 0.5);
    EXPECT_EQ(c.gamma, 0.6);
    EXPECT_EQ(c.grid.n, 401u);
    EXPECT_EQ(c.sim.scheme, Scheme::Rk4Project);
    EXPECT_EQ(c.sim.boundary, Boundary::Neumann);
    EXPECT_FALSE(c.sim.dt.has_value());
    EXPECT_EQ(c.field(3.0), 0.0);
    EXPECT_EQ(c.experiment.name, "simulate");
}

TEST(Config, RoundTrip) {
    RunConfig c = parse_config_text(kMinimal);
    EXPECT_EQ(parse_config_text(serialize_config(c)), c);
    c.gamma = -0.1 / 3.0;
    c.field = AppliedField::ramp({{0.0, 0.0}, {1.0 / 3.0, -0.07}});
    c.sim.dt = 1e-3 / 7.0;
    c.sim.scheme = Scheme::HeunProject;
    c.sim.boundary = Boundary::ClampE1;
    c.experiment.name = "stability";
    c.experiment.values["L"] = "18.75";
    c.seed = 12345;
    c.output.stride = 7;
    c.sim.snapshot_stride = 7;
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config_text(text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(serialize_config(back), text);
}

TEST(Config, PiecewiseFieldIsLeftClosedSteps) {
    const RunConfig c = parse_config_text(std::string(kMinimal) + "\n[field]\nkind = piecewise\nvalues = 0:-0.1, 5:0\n");
    EXPECT_EQ(c.field(0.0), -0.1);
    EXPECT_EQ(c.field(2.0), -0.1);
    EXPECT_EQ(c.field(5.0), 0.0);
    EXPECT_EQ(c.field(6.0), 0.0);
}

TEST(Config, GammaOutOfRangeNamesKey) {
    std::string text = kMinimal;
    text.replace(text.find("gamma = 0.6"), 11, "gamma = 1.2");
    std::string msg;
    EXPECT_EQ(code_of([&] { parse_config_text(text); }, &msg), ErrorCode::ValidationError);
    EXPECT_NE(msg.find("gamma"), std::string::npos) << msg;
}

TEST(Config, Rejections) {
    std::string msg;
    EXPECT_EQ(code_of([&] { parse_config_text(std::string(kMinimal) + "[sim2]\nx = 1\n"); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([&] { parse_config_text(std::string(kMinimal) + "[output]\nstrid = 3\n"); }, &msg),
              ErrorCode::ValidationError);
    EXPECT_NE(msg.find("strid"), std::string::npos);
    std::string no_alpha = kMinimal;
    no_alpha.erase(no_alpha.find("alpha = 0.5"), 11);
    EXPECT_EQ(code_of([&] { parse_config_text(no_alpha); }, &msg), ErrorCode::ValidationError);
    EXPECT_NE(msg.find("alpha"), std::string::npos);
    EXPECT_EQ(code_of([&] { parse_config_text(std::string(kMinimal) + "[field]\nkind = sine\n"); }),
              ErrorCode::ValidationError);
    EXPECT_EQ(code_of([&] { parse_config_text(std::string(kMinimal) + "[field]\nkind = piecewise\nvalues = 0-1\n"); }),
              ErrorCode::ValidationError);
    EXPECT_EQ(code_of([&] { parse_config_text(std::string(kMinimal) + "[experiment]\nL = abc\n"); }),
              ErrorCode::ValidationError);
    EXPECT_EQ(code_of([] { parse_config("/nonexistent/dir/x.cfg"); }), ErrorCode::IoError);
}

TEST(Config, SyntaxErrorReportsLine) {
    std::string msg;
    const std::string text = "[model]\nalpha = 0.5\n[grid\nn = 3\n";
    EXPECT_EQ(code_of([&] { parse_config_text(text); }, &msg), ErrorCode::ParseError);
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, ShippedConfigsParse) {
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(DWALLSIM_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        EXPECT_NO_THROW(parse_config(entry.path().string())) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 5u);
}

TEST(Snapshot, TextAndBinaryRoundTripBitIdentical) {
    const fs::path dir = scratch("snap");
    const Grid1D g{-7.25, 1.0 / 3.0, 101};
    const SpinField m = testutil::perturbed_unit(SpinField::constant(g, normalized(Vec3{1, 2, 3})), 9, 0.3);
    for (auto fmt : {SnapshotFormat::Text, SnapshotFormat::Binary}) {
        const fs::path p = dir / (fmt == SnapshotFormat::Text ? "m.txt" : "m.bin");
        write_snapshot(m, p.string(), fmt);
        const SpinField back = read_snapshot(p.string());
        EXPECT_EQ(back.grid().n, g.n);
        EXPECT_EQ(back.grid().x_min, g.x_min);
        EXPECT_EQ(back.grid().dx, g.dx);
        for (std::size_t i = 0; i < g.n; ++i) ASSERT_EQ(back[i], m[i]) << i;
    }
}

TEST(Snapshot, CorruptedHeader) {
    const fs::path dir = scratch("corrupt");
    const Grid1D g = Grid1D::symmetric(5.0, 11);
    write_snapshot(SpinField::constant(g, kE1), (dir / "ok.txt").string());
    const std::string body = slurp(dir / "ok.txt");
    const std::string rows = body.substr(body.find('\n'));
    for (const std::string bad : {"DWALLSIN v1 n=11 x_min=-5 dx=1", "DWALLSIM v2 n=11 x_min=-5 dx=1",
                                  "DWALLSIM v1 n=abc x_min=-5 dx=1", "DWALLSIM v1 n=11 dx=1",
                                  "DWALLSIM v1 n=11 x_min=-5 dx=1 colour=red", ""}) {
        write_text(bad + rows, (dir / "bad.txt").string());
        EXPECT_EQ(code_of([&] { read_snapshot((dir / "bad.txt").string()); }), ErrorCode::FormatError) << bad;
    }
    // declared n larger than the body
    std::string text = body;
    text.replace(text.find("n=11"), 4, "n=12");
    write_text(text, (dir / "short.txt").string());
    EXPECT_EQ(code_of([&] { read_snapshot((dir / "short.txt").string()); }), ErrorCode::FormatError);
    // truncated binary payload
    write_snapshot(SpinField::constant(g, kE1), (dir / "ok.bin").string(), SnapshotFormat::Binary);
    const std::string bin = slurp(dir / "ok.bin");
    write_text(bin.substr(0, bin.size() - 5), (dir / "trunc.bin").string());
    EXPECT_EQ(code_of([&] { read_snapshot((dir / "trunc.bin").string()); }), ErrorCode::FormatError);
    EXPECT_EQ(code_of([&] { read_snapshot((dir / "missing.txt").string()); }), ErrorCode::IoError);
}

TEST(Snapshot, NormViolationNamesRow) {
    const fs::path dir = scratch("norm");
    const Grid1D g = Grid1D::symmetric(5.0, 11);
    Field3 v(g.n, kE1);
    v[6] = Vec3{0.9, 0.0, 0.0};
    write_snapshot(std::span<const Vec3>(v), g, (dir / "m.txt").string());
    std::string msg;
    EXPECT_EQ(code_of([&] { read_snapshot((dir / "m.txt").string()); }, &msg), ErrorCode::NormViolation);
    EXPECT_NE(msg.find("row 7"), std::string::npos) << msg;
}

TEST(Series, LayoutAndNan) {
    const std::string csv = format_series({{"t", {0.0, 0.5}}, {"b", {1.0, std::nan("")}}, {"a", {0.1, 0.2}}});
    EXPECT_EQ(csv, "t,a,b\n0,0.10000000000000001,1\n0.5,0.20000000000000001,nan\n");
    EXPECT_EQ(code_of([] { format_series({{"t", {0.0}}, {"a", {1.0, 2.0}}}); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([] { format_series({{"a,b", {1.0}}}); }), ErrorCode::ValidationError);
}

TEST(Series, ThreeStepRunGivesFourRows) {
    const fs::path dir = scratch("series");
    const ModelParams p(0.5, 0.6, AppliedField::constant(0.0));
    const Grid1D g = Grid1D::symmetric(20.0, 201);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.03;
    cfg.snapshot_stride = 1;
    const Trajectory traj = run(wall_profile(WallSign(1, 1), p, g), p, cfg);
    SeriesColumns cols(traj.series.begin(), traj.series.end());
    cols["t"] = traj.times;
    write_series(cols, (dir / "s.csv").string());
    std::vector<std::string> header;
    const auto rows = read_csv(dir / "s.csv", &header);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(header.front(), "t");
    for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(rows[k][0], 0.01 * static_cast<double>(k));
}

TEST(Number, SeventeenDigitRoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int k = 0; k < 1000; ++k) {
        const double v = u(rng) * std::pow(10.0, static_cast<double>(k % 40 - 20));
        EXPECT_EQ(*parse_double(format_double(v)), v);
    }
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_TRUE(std::isnan(*parse_double("nan")));
    EXPECT_FALSE(parse_double("1.5x").has_value());
}

TEST(Cli, SimulateStationaryWall) {
    const fs::path dir = scratch("cli_sim");
    const int rc = run_cli("simulate --quiet --config " + std::string(DWALLSIM_CONFIG_DIR) + "/stationary_wall.cfg --out " +
                               dir.string(),
                           dir / "log.txt");
    ASSERT_EQ(rc, 0) << slurp(dir / "log.txt");
    std::vector<std::string> header;
    const auto rows = read_csv(dir / "series.csv", &header);
    const auto col = std::find(header.begin(), header.end(), "energy") - header.begin();
    ASSERT_LT(static_cast<std::size_t>(col), header.size());
    ASSERT_GT(rows.size(), 2u);
    const double e0 = rows.front()[col];
    EXPECT_NEAR(e0, 2.0 * 0.8, 1e-3);
    for (const auto& r : rows) EXPECT_NEAR(r[col], e0, 1e-6 * e0);
    EXPECT_TRUE(fs::exists(dir / "final.txt"));
    EXPECT_TRUE(fs::exists(dir / "config.resolved.cfg"));
    EXPECT_NO_THROW(read_snapshot((dir / "final.txt").string()));
    EXPECT_EQ(parse_config((dir / "config.resolved.cfg").string()).grid.n, 1201u);
}

TEST(Cli, UsageErrors) {
    const fs::path dir = scratch("cli_usage");
    EXPECT_EQ(run_cli("frobnicate --config x.cfg", dir / "a.txt"), 1);
    EXPECT_NE(slurp(dir / "a.txt").find("simulate"), std::string::npos);
    EXPECT_EQ(run_cli("", dir / "b.txt"), 1);
    EXPECT_EQ(run_cli("simulate", dir / "c.txt"), 1);
    write_text("[model]\nalpha = 0.5\ngamma = 1.2\n", (dir / "bad.cfg").string());
    EXPECT_EQ(run_cli("simulate --config " + (dir / "bad.cfg").string() + " --out " + dir.string(), dir / "d.txt"), 1);
    EXPECT_NE(slurp(dir / "d.txt").find("gamma"), std::string::npos);
    EXPECT_EQ(run_cli("simulate --config " + (dir / "missing.cfg").string(), dir / "e.txt"), 2);
}

TEST(Cli, NoConvergenceExitsTwoWithPartialReport) {
    const fs::path dir = scratch("cli_noconv");
    std::string cfg = slurp(fs::path(DWALLSIM_CONFIG_DIR) / "two_wall_quick.cfg");
    cfg.insert(cfg.find("snapshot_interval"), "max_iter = 0\n");
    cfg.replace(cfg.find("t_end = 3"), 9, "t_end = 0.5");
    write_text(cfg, (dir / "q.cfg").string());
    const int rc = run_cli("modulate --quiet --config " + (dir / "q.cfg").string() + " --out " + dir.string(), dir / "log.txt");
    EXPECT_EQ(rc, 2) << slurp(dir / "log.txt");
    EXPECT_NE(slurp(dir / "log.txt").find("NO_CONVERGENCE"), std::string::npos);
    const std::string report = slurp(dir / "report.txt");
    EXPECT_NE(report.find("failed_at = 0"), std::string::npos) << report;
    EXPECT_TRUE(fs::exists(dir / "series.csv"));
    EXPECT_TRUE(fs::exists(dir / "modulation.csv"));
}

TEST(Cli, SeedOverrideIsDeterministic) {
    const fs::path a = scratch("cli_seed_a"), b = scratch("cli_seed_b"), c = scratch("cli_seed_c");
    std::string cfg = slurp(fs::path(DWALLSIM_CONFIG_DIR) / "two_wall_quick.cfg");
    cfg.replace(cfg.find("t_end = 3"), 9, "t_end = 0.2");
    cfg.replace(cfg.find("name = modulate"), 15, "name = simulate");
    write_text(cfg, (a / "q.cfg").string());
    const std::string base = "simulate --quiet --config " + (a / "q.cfg").string();
    ASSERT_EQ(run_cli(base + " --seed 11 --out " + a.string(), a / "log.txt"), 0);
    ASSERT_EQ(run_cli(base + " --seed 11 --out " + b.string(), b / "log.txt"), 0);
    ASSERT_EQ(run_cli(base + " --seed 12 --out " + c.string(), c / "log.txt"), 0);
    EXPECT_EQ(slurp(a / "series.csv"), slurp(b / "series.csv"));
    EXPECT_NE(slurp(a / "series.csv"), slurp(c / "series.csv"));
}
