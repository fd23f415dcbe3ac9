#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

using namespace dwallsim;

namespace {

ModelParams P(double gamma, double h = 0.0) { return ModelParams(0.5, gamma, AppliedField::constant(h)); }

double max_abs4(const Vec4& v) { return max_abs(v); }

Field3 bump_field(const Grid1D& g, double center, double width, const Vec3& dir) {
    Field3 f(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        f[i] = std::exp(-0.5 * (x - center) * (x - center) / (width * width)) * dir;
    }
    return f;
}

/// Analytic two-wall state plus a smooth bump, normalized; usable under any gauge.
struct BumpedTwoWall {
    TwoWallProfile P;
    double amp;

    Vec3 operator()(double x) const {
        const Vec3 b{std::exp(-0.5 * (x - 3.0) * (x - 3.0)), 0.5 * std::exp(-0.5 * (x + 4.0) * (x + 4.0) / 4.0),
                     -std::exp(-0.5 * x * x / 2.25)};
        return normalized(P(x) + amp * b);
    }
};

}  // namespace

TEST(MatrixA, DeterminantIsSixteen) {
    for (double gamma : {0.0, 0.3, -0.6, 0.95}) EXPECT_NEAR(determinant(matrix_A(P(gamma))), 16.0, 1e-11) << gamma;
}

TEST(MatrixA, InverseClosedForm) {
    for (double gamma : {0.0, 0.6, -0.45}) {
        const Mat4 prod = matrix_A(P(gamma)) * matrix_A_inverse(P(gamma));
        const Mat4 I = identity4();
        Mat4 diff{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) diff[i][j] = prod[i][j] - I[i][j];
        EXPECT_LT(norm_inf(diff), 1e-14) << gamma;
    }
    const Mat4 A = matrix_A(P(0.0));
    EXPECT_DOUBLE_EQ(A[0][0], 2.0);
    EXPECT_DOUBLE_EQ(A[1][1], -2.0);
    EXPECT_DOUBLE_EQ(A[0][1], 0.0);
    EXPECT_DOUBLE_EQ(A[0][2], 0.0);
}

TEST(MatrixA, MatchesFiniteDifferenceJacobianOfF) {
    // For far walls dF/dp at the exact profile is A up to q-size cross terms.
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(50.0, 5001);
    const Gauge gp{14.0, 0.4}, gm{-13.0, -0.2};
    const Field3 m = two_wall_profile(gp, gm, p, g);
    const Mat4 A = matrix_A(p);
    const double hs = 1e-5;
    for (int j = 0; j < 4; ++j) {
        Vec4 a = {gp.y, gp.phi, gm.y, gm.phi}, b = a;
        a[j] += hs;
        b[j] -= hs;
        const Vec4 Fa = orthogonality_F(m, g, {a[0], a[1]}, {a[2], a[3]}, p);
        const Vec4 Fb = orthogonality_F(m, g, {b[0], b[1]}, {b[2], b[3]}, p);
        for (int i = 0; i < 4; ++i) EXPECT_NEAR((Fa[i] - Fb[i]) / (2 * hs), A[i][j], 1e-4) << i << "," << j;
    }
}

TEST(OrthogonalityF, ZeroOnExactProfile) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const Gauge gp{12.0, 0.4}, gm{-9.0, -0.2};
    EXPECT_LT(max_abs4(orthogonality_F(two_wall_profile(gp, gm, p, g), g, gp, gm, p)), 1e-12);
}

TEST(OrthogonalityF, BarIsLinear) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const Gauge gp{12.0, 0.4}, gm{-9.0, -0.2};
    const Field3 f = testutil::random_bumps(g, 1, 1.0, 15.0), h = testutil::random_bumps(g, 2, 1.0, 15.0);
    const double a = 0.7, b = -1.9;
    Field3 comb(g.n);
    for (std::size_t i = 0; i < g.n; ++i) comb[i] = a * f[i] + b * h[i];
    const Vec4 lhs = orthogonality_Fbar(comb, g, gp, gm, p);
    const Vec4 Ff = orthogonality_Fbar(f, g, gp, gm, p), Fh = orthogonality_Fbar(h, g, gp, gm, p);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(lhs[i], a * Ff[i] + b * Fh[i], 1e-12);
}

TEST(OrthogonalityF, TranslationModeGivesTwoOverGamma) {
    // m = P + c g+.d_x w+ : the first component is c * 2/Gamma up to cross terms of size q(separation).
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(50.0, 5001);
    const Gauge gp{15.0, 0.4}, gm{-15.0, -0.2};
    const AnalyticWall wp(WallSign(1, 1), p);
    Field3 m = two_wall_profile(gp, gm, p, g);
    const double c = 0.01;
    for (std::size_t i = 0; i < g.n; ++i) m[i] += c * rotate_e1(wp.derivative(g.x(i) - gp.y), gp.phi);
    const Vec4 F = orthogonality_F(m, g, gp, gm, p);
    EXPECT_NEAR(F[0], c * 2.0 / p.Gamma(), 1e-8);
    // second component: c * ∫ w'.(e1^w) = -c * 2 gamma / Gamma
    EXPECT_NEAR(F[1], -c * 2.0 * 0.6 / p.Gamma(), 1e-8);
    EXPECT_LT(std::abs(F[2]) + std::abs(F[3]), c * q_interaction(30.0, p.Gamma()) * 10.0);
}

TEST(OrthogonalityF, OffGridGaugeRejected) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(20.0, 401);
    const Field3 m(g.n, kE1);
    EXPECT_THROW(orthogonality_F(m, g, {25.0, 0.0}, {-5.0, 0.0}, p), Error);
}

TEST(DecomposeStatic, ExactProfileRecovered) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const Gauge gp{12.0, 0.4}, gm{-9.0, -0.2};
    const Field3 m = two_wall_profile(gp, gm, p, g);
    const ModulationState st = decompose_static(m, g, gp, gm, p);
    EXPECT_TRUE(st.converged);
    EXPECT_LE(st.iterations, 2);
    EXPECT_LT(gauge_norm(difference(st.g_plus, gp)), 1e-9);
    EXPECT_LT(gauge_norm(difference(st.g_minus, gm)), 1e-9);
    EXPECT_LT(st.eps_h1, 1e-8);
}

TEST(DecomposeStatic, ShiftedGuessSameFixedPoint) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const Gauge gp{12.0, 0.4}, gm{-9.0, -0.2};
    const Field3 m = two_wall_profile(gp, gm, p, g);
    for (double s : {0.5, -0.5}) {
        const ModulationState st = decompose_static(m, g, {gp.y + s, gp.phi - s}, {gm.y - s, gm.phi + s}, p);
        EXPECT_TRUE(st.converged);
        EXPECT_LT(gauge_norm(difference(st.g_plus, gp)), 1e-9);
        EXPECT_LT(gauge_norm(difference(st.g_minus, gm)), 1e-9);
        EXPECT_LT(st.contraction_ratio, 1.0);
        EXPECT_FALSE(st.used_newton);
    }
}

TEST(DecomposeStatic, SmallBumpMovesGaugesLinearly) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const Gauge gp{12.0, 0.4}, gm{-9.0, -0.2};
    const Field3 P0 = two_wall_profile(gp, gm, p, g);
    const Field3 b = bump_field(g, 11.0, 1.5, {0.3, 1.0, -0.5});
    auto shift = [&](double delta) {
        Field3 m = P0;
        for (std::size_t i = 0; i < g.n; ++i) m[i] += delta * b[i];
        const ModulationState st = decompose_static(m, g, gp, gm, p);
        EXPECT_TRUE(st.converged);
        EXPECT_LT(max_abs4(st.ortho_residual), 1e-10);
        return gauge_norm(difference(st.g_plus, gp)) + gauge_norm(difference(st.g_minus, gm));
    };
    const double s1 = shift(1e-3), s2 = shift(2e-3);
    // C fitted at delta=1e-3; the map is linear to leading order.
    EXPECT_LT(s1, 3.0 * 1e-3);
    EXPECT_NEAR(s2 / s1, 2.0, 0.01);
}

TEST(DecomposeStatic, SeparationFloor) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 801);
    const Field3 m = two_wall_profile({4.0, 0}, {-4.0, 0}, p, g);
    try {
        decompose_static(m, g, {4.0, 0}, {-4.0, 0}, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SeparationTooSmall);
    }
    ModulationOptions o;
    o.separation_floor = 5.0;
    EXPECT_TRUE(decompose_static(m, g, {4.0, 0}, {-4.0, 0}, p, o).converged);
}

TEST(DecomposeStatic, NonConvergenceReportsBestIterate) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const Gauge gp{12.0, 0.4}, gm{-9.0, -0.2};
    Field3 m = two_wall_profile(gp, gm, p, g);
    const Field3 b = bump_field(g, 11.0, 1.5, {0.3, 1.0, -0.5});
    for (std::size_t i = 0; i < g.n; ++i) m[i] += 0.05 * b[i];
    ModulationOptions o;
    o.max_iter = 1;
    o.tol = 1e-14;
    const ModulationState st = decompose_static(m, g, {gp.y + 0.5, gp.phi}, gm, p, o);
    EXPECT_FALSE(st.converged);
    EXPECT_EQ(st.iterations, 1);
    EXPECT_LT(max_abs4(st.ortho_residual), max_abs4(orthogonality_F(m, g, {gp.y + 0.5, gp.phi}, gm, p)));
}

TEST(DecomposeStatic, ReconstructionIdentity) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const BumpedTwoWall src{TwoWallProfile({12.0, 0.4}, {-9.0, -0.2}, p), 0.05};
    const Field3 m = sample(src, g);
    const ModulationState st = decompose_static(m, g, {12.0, 0.4}, {-9.0, -0.2}, p);
    const Field3 back = reconstruct(st, p);
    // eps is m - P, so adding P back is exact up to one rounding per component
    for (std::size_t i = 0; i < g.n; ++i) ASSERT_LE(norm(back[i] - m[i]), 4e-16);
}

TEST(DecomposeStatic, GaugeCovariance) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const BumpedTwoWall src{TwoWallProfile({12.0, 0.4}, {-9.0, -0.2}, p), 0.05};
    const ModulationState base = decompose_static(sample(src, g), g, {12.0, 0.4}, {-9.0, -0.2}, p);
    ASSERT_TRUE(base.converged);
    const Gauge shift{1.7, 0.9};
    const Field3 moved = sample(gauged(shift, src), g);
    const ModulationState st =
        decompose_static(moved, g, compose(shift, base.g_plus), compose(shift, {base.g_minus.y, base.g_minus.phi}), p);
    ASSERT_TRUE(st.converged);
    EXPECT_LT(gauge_norm(difference(st.g_plus, compose(shift, base.g_plus))), 1e-8);
    EXPECT_LT(gauge_norm(difference(st.g_minus, compose(shift, base.g_minus))), 1e-8);
    EXPECT_NEAR(st.eps_h1, base.eps_h1, 1e-6);
}

TEST(DecomposeStatic, MirrorSymmetry) {
    // x -> -x with gamma -> -gamma swaps the walls: new g+ = (-y-, phi-), new g- = (-y+, phi+), sigma2 swapped.
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const ModelParams p = P(0.6), q = P(-0.6);
    WallPair pair{1, -1}, mirrored{-1, 1};
    const Gauge gp{12.0, 0.4}, gm{-9.0, -0.2};
    Field3 m = two_wall_profile(gp, gm, p, g, pair);
    const Field3 b = bump_field(g, 2.0, 2.0, {0.2, 0.5, 0.7});
    for (std::size_t i = 0; i < g.n; ++i) m[i] = normalized(m[i] + 0.05 * b[i]);
    Field3 r(g.n);
    for (std::size_t i = 0; i < g.n; ++i) r[i] = m[g.n - 1 - i];
    ModulationOptions o;
    o.pair = pair;
    const ModulationState a = decompose_static(m, g, gp, gm, p, o);
    o.pair = mirrored;
    const ModulationState c = decompose_static(r, g, {-gm.y, gm.phi}, {-gp.y, gp.phi}, q, o);
    ASSERT_TRUE(a.converged && c.converged);
    EXPECT_NEAR(c.g_plus.y, -a.g_minus.y, 1e-8);
    EXPECT_NEAR(c.g_plus.phi, a.g_minus.phi, 1e-8);
    EXPECT_NEAR(c.g_minus.y, -a.g_plus.y, 1e-8);
    EXPECT_NEAR(c.g_minus.phi, a.g_plus.phi, 1e-8);
}

TEST(DecomposeTrajectory, SuperposedPrecessingWalls) {
    const ModelParams p = P(0.6, -0.05);
    const Grid1D g = Grid1D::symmetric(40.0, 1601);
    const Gauge gp0{12.0, 0.3}, gm0{-12.0, -0.1};
    const SpinField m0 = SpinField::project(g, two_wall_profile(gp0, gm0, p, g));
    SimConfig c;
    c.t_end = 3.0;
    c.cfl = 0.4;
    c.snapshot_stride = 100;
    const Trajectory tr = run(m0, p, c);
    const DecompositionSeries s = decompose_trajectory(tr, p, gp0, gm0);
    ASSERT_FALSE(s.failed_at.has_value());
    ASSERT_EQ(s.states.size(), tr.size());
    const double y0p = s.states[0].g_plus.y, y0m = s.states[0].g_minus.y;
    for (std::size_t k = 0; k < s.states.size(); ++k) {
        const double ys = wall_drift(p, s.times[k]);
        EXPECT_LT(std::abs(s.states[k].g_plus.y - (y0p + ys)), 1e-3) << k;
        EXPECT_LT(std::abs(s.states[k].g_minus.y - (y0m - ys)), 1e-3) << k;
        if (k > 0) {
            EXPECT_LT(std::abs(s.states[k].g_plus.phi - s.states[k - 1].g_plus.phi), std::numbers::pi);
            EXPECT_LT(std::abs(s.states[k].g_minus.phi - s.states[k - 1].g_minus.phi), std::numbers::pi);
        }
    }
    const auto r = gauge_velocity_residual(s, p);
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        const double scale = s.states[k].eps_h1 + q_interaction(s.states[k].g_plus.y - s.states[k].g_minus.y, p.Gamma());
        EXPECT_LT(r.plus[k], 5.0 * scale + 1e-4) << k;
        EXPECT_LT(r.minus[k], 5.0 * scale + 1e-4) << k;
    }
    const auto cols = s.series();
    EXPECT_EQ(cols.size(), 7u);
    EXPECT_EQ(cols.at("y_plus").size(), tr.size());
}

TEST(DecomposeTrajectory, PhaseUnwrappedOverFullTurns) {
    // Fast precession: phi advances by more than 2 pi, the series must stay continuous.
    const ModelParams p = P(0.6, -3.0);
    const Grid1D g = Grid1D::symmetric(40.0, 801);
    const Gauge gp0{12.0, 0.0}, gm0{-12.0, 0.0};
    Trajectory tr;
    for (int k = 0; k <= 40; ++k) {
        const double t = 0.1 * k;
        const Gauge a = compose(gp0, precessing_gauge(WallSign(1, 1), p, t));
        const Gauge b = compose(gm0, precessing_gauge(WallSign(-1, 1), p, t));
        tr.record(t, SpinField::project(g, two_wall_profile(a, b, p, g)));
    }
    const DecompositionSeries s = decompose_trajectory(tr, p, gp0, gm0);
    ASSERT_FALSE(s.failed_at.has_value());
    const double want = precessing_gauge(WallSign(1, 1), p, 4.0).phi;
    EXPECT_GT(std::abs(want), 2.0 * std::numbers::pi);
    EXPECT_NEAR(s.states.back().g_plus.phi, want, 1e-6);
}

TEST(FrameCoefficients, ZeroEta) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(10.0, 101);
    const Field3 eta(g.n);
    const auto c = frame_coefficients(eta, WallSign(1, 1), p, g);
    EXPECT_EQ(testutil::max_abs(c.mu) + testutil::max_abs(c.nu) + testutil::max_abs(c.rho), 0.0);
}

TEST(FrameCoefficients, SphereConstraintAndRhoIdentity) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(15.0, 601);
    for (auto s : {WallSign(1, 1), WallSign(1, -1), WallSign(-1, 1), WallSign(-1, -1)}) {
        const SpinField w = wall_profile(s, p, g);
        const SpinField m = testutil::perturbed_unit(w, 9, 0.6);
        Field3 eta(g.n);
        for (std::size_t i = 0; i < g.n; ++i) eta[i] = m[i] - w[i];
        const auto c = frame_coefficients(eta, s, p, g);
        const AnalyticWall wall(s, p);
        for (std::size_t i = 0; i < g.n; ++i) {
            ASSERT_LE(std::abs(c.mu[i] + 0.5 * norm2(eta[i])), 1e-12);
            const double rhs = dot(eta[i], e1_cross(w[i]));
            ASSERT_LE(std::abs(c.rho[i] * wall.sin_theta(g.x(i)) - rhs), 1e-12);
        }
    }
}

TEST(AlmostOrth, DecaysLikeInteraction) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(60.0, 4801);
    double prev = 1.0;
    for (double L : {10.0, 15.0, 20.0}) {
        const Field3 m = two_wall_profile({L, 0.3}, {-L, 0.3}, p, g);
        const ModulationState st = decompose_static(m, g, {L, 0.3}, {-L, 0.3}, p);
        const auto r = almost_orth_residual(st, wall_cutoff(st, 4.0), p);
        const double worst = std::max({r[0][0], r[0][1], r[1][0], r[1][1]});
        EXPECT_LT(worst, 3.0 * q_interaction(2.0 * L, p.Gamma())) << L;
        EXPECT_LT(worst, 1e-2 * prev);
        prev = worst;
    }
}

TEST(AlmostOrth, InsensitiveToCutoffRadius) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(60.0, 4801);
    const Field3 m = two_wall_profile({10.0, 0.3}, {-10.0, 0.3}, p, g);
    const ModulationState st = decompose_static(m, g, {10.0, 0.3}, {-10.0, 0.3}, p);
    const auto a = almost_orth_residual(st, wall_cutoff(st, 3.0), p);
    const auto b = almost_orth_residual(st, wall_cutoff(st, 6.0), p);
    // doubling R may cost at most the e^{Gamma R} growth factor of the bound
    EXPECT_LT(b[0][0] / a[0][0], std::exp(p.Gamma() * 3.0));
    EXPECT_LT(b[0][1] / a[0][1], std::exp(p.Gamma() * 3.0));
}

TEST(AlmostOrth, SymmetricConfigurationEqualResiduals) {
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(60.0, 4801);
    for (double phi : {0.0, 0.3, 1.0}) {
        const Field3 m = two_wall_profile({10.0, phi}, {-10.0, phi}, p, g);
        const ModulationState st = decompose_static(m, g, {10.0, phi}, {-10.0, phi}, p);
        const auto r = almost_orth_residual(st, wall_cutoff(st, 4.0), p);
        EXPECT_NEAR(r[0][0], r[1][0], 1e-8);
        EXPECT_NEAR(r[0][1], r[1][1], 1e-8);
    }
}

TEST(LocalizedFrameNorms, TrackEpsNorm) {
    // Equivalence of norms: the ratio stays within a fixed band across a perturbation sweep.
    const ModelParams p = P(0.6);
    const Grid1D g = Grid1D::symmetric(40.0, 2001);
    const Gauge gp{12.0, 0.4}, gm{-12.0, -0.2};
    std::vector<double> ratios;
    for (double amp : {0.003, 0.01, 0.03}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const Field3 b = testutil::random_bumps(g, seed, amp, 14.0, 6);
            Field3 m = two_wall_profile(gp, gm, p, g);
            for (std::size_t i = 0; i < g.n; ++i) m[i] = normalized(m[i] + b[i]);
            const ModulationState st = decompose_static(m, g, gp, gm, p);
            ASSERT_TRUE(st.converged);
            const auto n = localized_frame_norms(st, wall_cutoff(st, 4.0), p, NormOrder::H1);
            ratios.push_back(std::hypot(n[0], n[1]) / st.eps_h1);
        }
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    EXPECT_GT(*lo, 0.2);
    EXPECT_LT(*hi / *lo, 5.0);
}
