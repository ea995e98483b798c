#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace s2ml;

namespace {

// State positioned at an arbitrary w (run_solver always starts at 0).
SolverState state_at(const Problem& p, const SolverConfig& cfg, Vector w) {
    SolverState st = initial_state(p, cfg);
    st.w = std::move(w);
    st.grad = p.gradient(st.w);
    st.objective = p.objective(st.w);
    st.grad_norm = st.grad_norm0 = norm2(st.grad);
    return st;
}

SolverConfig with_method(Method m) {
    SolverConfig cfg;
    cfg.method = m;
    return cfg;
}

// Wraps a problem but replaces its Hessian with −I.
class NegatedHessian final : public Problem {
public:
    explicit NegatedHessian(const Problem& inner) : inner_(inner) {}
    std::size_t dimension() const override { return inner_.dimension(); }
    std::size_t num_samples() const override { return inner_.num_samples(); }
    double objective(std::span<const double> w, const Batch& b) const override { return inner_.objective(w, b); }
    void gradient(std::span<const double> w, const Batch& b, std::span<double> out) const override {
        inner_.gradient(w, b, out);
    }
    HessianOperator hessian_at(std::span<const double>, const Batch&) const override {
        return HessianOperator(
            [](std::span<const double> v, std::span<double> out) {
                for (std::size_t j = 0; j < v.size(); ++j) out[j] = -v[j];
            },
            1);
    }

private:
    const Problem& inner_;
};

std::unique_ptr<Problem> logistic(const Dataset& ds, double lambda, ExecutionPolicy policy = {}) {
    return make_problem(ProblemConfig{ProblemKind::logistic, lambda, false}, ds, policy);
}

Dataset synthetic(std::size_t n, std::size_t d, std::uint64_t seed, double density = 0.5) {
    SyntheticSpec spec;
    spec.n_rows = n;
    spec.n_cols = d;
    spec.density = density;
    spec.label_noise = 0.1;
    spec.seed = seed;
    return make_synthetic_dataset(spec);
}

std::vector<IterationSnapshot> trajectory(const Problem& p, const SolverConfig& cfg, SolverResult* out = nullptr) {
    std::vector<IterationSnapshot> snaps;
    SolverResult r = run_solver(p, cfg, [&](const IterationSnapshot& s) {
        snaps.push_back(s);
        snaps.back().w = {};  // the view dies with the run
    });
    if (out) *out = std::move(r);
    return snaps;
}

}  // namespace

TEST(Tron, QuadraticExactStepInsideRegion) {
    const QuadraticProblem q = QuadraticProblem::centered({0.0, 0.0});
    SolverConfig cfg = with_method(Method::tron);
    cfg.tr_radius0 = 10.0;
    SolverState st = state_at(q, cfg, {3.0, 4.0});
    const IterationSnapshot snap = tron_step(q, st, cfg);
    EXPECT_TRUE(snap.step_accepted);
    EXPECT_NEAR(st.w[0], 0.0, 1e-15);
    EXPECT_NEAR(st.w[1], 0.0, 1e-15);
    EXPECT_NEAR(st.objective, 0.0, 1e-15);
    EXPECT_EQ(st.tr_radius, 10.0);  // interior step with ρ = 1: radius unchanged
}

TEST(Tron, QuadraticBoundaryStepExpandsRadius) {
    const QuadraticProblem q = QuadraticProblem::centered({0.0, 0.0});
    SolverConfig cfg = with_method(Method::tron);
    cfg.tr_radius0 = 1.0;
    SolverState st = state_at(q, cfg, {3.0, 4.0});
    const IterationSnapshot snap = tron_step(q, st, cfg);
    EXPECT_TRUE(snap.step_accepted);
    EXPECT_NEAR(st.w[0], 3.0 - 0.6, 1e-15);
    EXPECT_NEAR(st.w[1], 4.0 - 0.8, 1e-15);
    EXPECT_EQ(st.tr_radius, 4.0);
    EXPECT_EQ(snap.tr_radius_or_step, 4.0);
    EXPECT_EQ(snap.rows_touched, snap.cg_iters_used);  // one "row" per product
}

TEST(Tron, LogisticAcceptedObjectivesDecrease) {
    const Dataset ds = synthetic(50, 5, 31);
    const auto p = logistic(ds, 0.01);
    SolverConfig cfg = with_method(Method::tron);
    cfg.grad_tol = 1e-10;
    SolverResult r;
    const auto snaps = trajectory(*p, cfg, &r);
    EXPECT_EQ(r.termination, Termination::converged);
    // Near the optimum the decrease drops below one ulp of F, so strictness is
    // only checked while it is resolvable.
    double last = snaps.front().objective;
    double last_grad = snaps.front().grad_norm;
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        if (!snaps[k].step_accepted) {
            EXPECT_EQ(snaps[k].objective, last);
            continue;
        }
        EXPECT_LE(snaps[k].objective, last) << k;
        if (last_grad > 1e-6) EXPECT_LT(snaps[k].objective, last) << k;
        last = snaps[k].objective;
        last_grad = snaps[k].grad_norm;
    }
    // The tracked objective agrees with a fresh evaluation.
    EXPECT_NEAR(r.objective, p->objective(r.w), 1e-14);
}

TEST(Tron, PoorModelRejectsAndShrinks) {
    // Hessian −I makes the model decrease unbounded on the ball while F is convex:
    // the predicted reduction is large, the actual one small.
    const QuadraticProblem q = QuadraticProblem::diagonal({1.0, 1.0});
    const NegatedHessian bad(q);
    SolverConfig cfg = with_method(Method::tron);
    cfg.tr_radius0 = 100.0;
    SolverState st = state_at(bad, cfg, {1.0, 0.0});
    const IterationSnapshot snap = tron_step(bad, st, cfg);
    EXPECT_FALSE(snap.step_accepted);
    EXPECT_EQ(st.w, (Vector{1.0, 0.0}));
    EXPECT_EQ(st.tr_radius, 50.0);
    EXPECT_EQ(st.consecutive_rejections, 1u);
}

TEST(Stron, BatchSizeSchedule) {
    const Dataset ds = synthetic(100, 5, 32);
    const auto p = logistic(ds, 0.01);
    SolverConfig cfg = with_method(Method::stron);
    SolverState st = initial_state(*p, cfg);
    std::vector<std::size_t> sizes;
    for (int k = 0; k < 9; ++k) {
        sizes.push_back(st.batch_size);
        stron_step(*p, st, cfg);
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{10, 15, 23, 35, 53, 80, 100, 100, 100}));
}

TEST(Stron, BatchSizeHelpers) {
    EXPECT_EQ(initial_batch_size(100, 0.1), 10u);
    EXPECT_EQ(initial_batch_size(5, 0.1), 1u);
    EXPECT_EQ(initial_batch_size(7, 1.0), 7u);
    EXPECT_EQ(grow_batch_size(80, 100, 1.5), 100u);
    EXPECT_EQ(grow_batch_size(100, 100, 1.5), 100u);
    EXPECT_EQ(grow_batch_size(3, 100, 1.0), 3u);
}

TEST(Stron, HessianRowsAreSampledWithoutReplacement) {
    SolverState st;
    st.rng.seed(5);
    st.batch_size = 30;
    const Batch b = sample_hessian_batch(st, 100);
    ASSERT_FALSE(b.is_full());
    EXPECT_EQ(b.size(100), 30u);
    for (std::size_t k = 1; k < 30; ++k) EXPECT_LT(b.row(k - 1), b.row(k));
    st.batch_size = 100;
    EXPECT_TRUE(sample_hessian_batch(st, 100).is_full());
}

TEST(Stron, FullBatchReproducesTron) {
    const Dataset ds = synthetic(300, 15, 33);
    const auto p = logistic(ds, 0.01, {3, true});
    SolverConfig tron = with_method(Method::tron);
    tron.grad_tol = 1e-10;
    SolverConfig stron = tron;
    stron.method = Method::stron;
    stron.batch0_frac = 1.0;
    SolverResult rt, rs;
    const auto a = trajectory(*p, tron, &rt);
    const auto b = trajectory(*p, stron, &rs);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].objective, b[k].objective) << k;
        EXPECT_EQ(a[k].grad_norm, b[k].grad_norm) << k;
        EXPECT_EQ(a[k].rows_touched, b[k].rows_touched) << k;
    }
    EXPECT_EQ(rt.w, rs.w);
}

TEST(Stron, ConvergesToTronObjective) {
    const Dataset ds = synthetic(200, 20, 34);
    const auto p = logistic(ds, 0.01);
    SolverConfig cfg = with_method(Method::tron);
    cfg.grad_tol = 1e-10;
    const SolverResult tron = run_solver(*p, cfg);
    cfg.method = Method::stron;
    const SolverResult stron = run_solver(*p, cfg);
    EXPECT_EQ(stron.termination, Termination::converged);
    EXPECT_NEAR(stron.objective, tron.objective, 1e-6);
}

TEST(NewtonCg, QuadraticOneStep) {
    const QuadraticProblem q = QuadraticProblem::centered({0.0, 0.0});
    const SolverConfig cfg = with_method(Method::newton_cg);
    SolverState st = state_at(q, cfg, {3.0, 4.0});
    const IterationSnapshot snap = newton_cg_step(q, st, cfg);
    EXPECT_TRUE(snap.step_accepted);
    EXPECT_EQ(snap.cg_iters_used, 1u);
    EXPECT_EQ(snap.tr_radius_or_step, 1.0);
    EXPECT_NEAR(st.w[0], 0.0, 1e-15);
    EXPECT_NEAR(st.w[1], 0.0, 1e-15);
}

TEST(NewtonCg, AscentDirectionFallsBackToSteepestDescent) {
    const QuadraticProblem q = QuadraticProblem::diagonal({1.0, 2.0});
    const NegatedHessian bad(q);
    const SolverConfig cfg = with_method(Method::newton_cg);
    SolverState st = state_at(bad, cfg, {1.0, 1.0});
    const Vector g = st.grad;
    const double before = st.objective;
    const IterationSnapshot snap = newton_cg_step(bad, st, cfg);
    ASSERT_TRUE(snap.step_accepted);
    // The move is parallel to −g.
    const double t = snap.tr_radius_or_step;
    EXPECT_NEAR(st.w[0], 1.0 - t * g[0], 1e-15);
    EXPECT_NEAR(st.w[1], 1.0 - t * g[1], 1e-15);
    EXPECT_LT(st.objective, before);
}

TEST(NewtonCg, LogisticConvergesQuickly) {
    const Dataset ds = synthetic(50, 5, 35);
    const auto p = logistic(ds, 0.01);
    SolverConfig cfg = with_method(Method::newton_cg);
    cfg.grad_tol = 1e-8;
    cfg.max_iters = 30;
    const SolverResult r = run_solver(*p, cfg);
    EXPECT_EQ(r.termination, Termination::converged);
    EXPECT_LE(r.iterations, 30u);
}

TEST(Lbfgs, EmptyMemoryIsSteepestDescent) {
    std::mt19937_64 rng(40);
    const Vector g = oracle::random_vector(rng, 7);
    EXPECT_EQ(lbfgs_two_loop({}, g), g);
}

TEST(Lbfgs, TwoLoopMatchesDenseBfgs) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + rng() % 12;
        const std::size_t m = 1 + rng() % 8;
        const auto pairs = oracle::random_memory(rng, d, m);
        const Vector g = oracle::random_vector(rng, d);
        const Vector expect = oracle::mat_vec(oracle::dense_bfgs_inverse(pairs, d), g);
        EXPECT_LT(oracle::max_rel_error(lbfgs_two_loop(pairs, g), expect), 1e-10) << trial;
    }
}

TEST(Lbfgs, CurvatureSafeguard) {
    EXPECT_TRUE(curvature_ok(Vector{1.0, 0.0}, Vector{1.0, 0.0}));
    EXPECT_FALSE(curvature_ok(Vector{1.0, 0.0}, Vector{0.0, 1.0}));
    EXPECT_FALSE(curvature_ok(Vector{1.0, 0.0}, Vector{-1.0, 0.0}));
}

TEST(Lbfgs, DiagonalQuadraticConverges) {
    const QuadraticProblem q({{1.0, 0.0}, {0.0, 10.0}}, {1.0, 1.0});  // minimum away from w₀ = 0
    SolverConfig cfg = with_method(Method::lbfgs);
    cfg.grad_tol = 1e-300;
    cfg.max_iters = 20;
    SolverState st = initial_state(q, cfg);
    std::size_t iters = 0;
    while (st.grad_norm >= 1e-10 && iters < 20) {
        lbfgs_step(q, st, cfg);
        ++iters;
        EXPECT_LE(st.lbfgs_pairs.size(), cfg.lbfgs_memory);
    }
    EXPECT_LT(st.grad_norm, 1e-10);
    EXPECT_LE(iters, 20u);
}

TEST(Lbfgs, MemoryIsBounded) {
    const Dataset ds = synthetic(80, 10, 42);
    const auto p = logistic(ds, 0.001);
    SolverConfig cfg = with_method(Method::lbfgs);
    cfg.lbfgs_memory = 3;
    SolverState st = initial_state(*p, cfg);
    for (int k = 0; k < 15; ++k) {
        const IterationSnapshot snap = lbfgs_step(*p, st, cfg);
        EXPECT_EQ(snap.rows_touched, 0u);
        EXPECT_LE(st.lbfgs_pairs.size(), 3u);
        for (const auto& [s, y] : st.lbfgs_pairs) EXPECT_TRUE(curvature_ok(s, y));
    }
}

TEST(RunSolver, GradTolOneStopsAtStart) {
    const Dataset ds = synthetic(30, 4, 50);
    const auto p = logistic(ds, 0.1);
    for (Method m : {Method::tron, Method::stron, Method::newton_cg, Method::lbfgs}) {
        SolverConfig cfg = with_method(m);
        cfg.grad_tol = 1.0;
        std::size_t calls = 0;
        const SolverResult r = run_solver(*p, cfg, [&](const IterationSnapshot& s) {
            EXPECT_EQ(s.iter, 0u);
            ++calls;
        });
        EXPECT_EQ(r.termination, Termination::converged);
        EXPECT_EQ(r.iterations, 0u);
        EXPECT_EQ(calls, 1u);
    }
}

TEST(RunSolver, ZeroIterationCap) {
    const Dataset ds = synthetic(30, 4, 51);
    const auto p = logistic(ds, 0.1);
    SolverConfig cfg;
    cfg.max_iters = 0;
    const SolverResult r = run_solver(*p, cfg);
    EXPECT_EQ(r.termination, Termination::max_iters);
    EXPECT_EQ(r.w, Vector(4, 0.0));
    EXPECT_DOUBLE_EQ(r.objective, std::log(2.0));
}

TEST(RunSolver, CallbackFailureAbortsCleanly) {
    const Dataset ds = synthetic(30, 4, 52);
    const auto p = logistic(ds, 0.1);
    SolverConfig cfg;
    cfg.grad_tol = 1e-12;
    const SolverResult r = run_solver(*p, cfg, [](const IterationSnapshot& s) {
        if (s.iter == 2) throw std::runtime_error("sink full");
    });
    EXPECT_EQ(r.termination, Termination::aborted);
    EXPECT_EQ(r.abort_reason, "sink full");
    EXPECT_EQ(r.iterations, 2u);
}

TEST(RunSolver, StallsAfterConsecutiveRejections) {
    // A −I Hessian with a huge radius keeps proposing steps whose ρ is tiny.
    const QuadraticProblem q = QuadraticProblem::centered({5.0, 5.0});
    const NegatedHessian bad(q);
    SolverConfig cfg = with_method(Method::tron);
    cfg.tr_radius0 = 1e10;
    cfg.max_rejections = 3;
    cfg.max_iters = 100;
    std::vector<bool> accepted;
    const SolverResult r = run_solver(bad, cfg, [&](const IterationSnapshot& s) {
        if (s.iter > 0) accepted.push_back(s.step_accepted);
    });
    // ρ stays negative until the radius has halved down to about ‖c‖, far more than 3 times.
    EXPECT_EQ(r.termination, Termination::stalled);
    EXPECT_EQ(accepted, (std::vector<bool>{false, false, false}));
    EXPECT_EQ(r.w, (Vector{0.0, 0.0}));
}

TEST(RunSolver, InvalidConfigThrows) {
    const QuadraticProblem q = QuadraticProblem::centered({1.0});
    SolverConfig cfg;
    cfg.eta1 = 0.9;  // η₁ > η₂
    EXPECT_THROW(run_solver(q, cfg), Error);
    cfg = SolverConfig{};
    cfg.sigma3 = 0.9;
    EXPECT_THROW(run_solver(q, cfg), Error);
    cfg = SolverConfig{};
    cfg.cg_rtol = 1.0;
    EXPECT_THROW(run_solver(q, cfg), Error);
}

TEST(Agreement, AllMethodsReachSameObjective) {
    const Dataset ds = synthetic(200, 20, 60);
    for (ProblemKind kind : {ProblemKind::logistic, ProblemKind::svm_l2}) {
        const auto p = make_problem(ProblemConfig{kind, 0.01, false}, ds);
        std::vector<double> finals;
        for (Method m : {Method::tron, Method::stron, Method::newton_cg, Method::lbfgs}) {
            SolverConfig cfg = with_method(m);
            cfg.grad_tol = 1e-10;
            cfg.max_iters = 2000;
            const SolverResult r = run_solver(*p, cfg);
            EXPECT_EQ(r.termination, Termination::converged) << to_string(kind) << " " << to_string(m);
            finals.push_back(r.objective);
        }
        for (double f : finals) EXPECT_NEAR(f, finals.front(), 1e-8) << to_string(kind);
    }
}

TEST(Determinism, TrajectoriesIndependentOfThreads) {
    const Dataset ds = synthetic(2500, 30, 61, 0.3);
    for (Method m : {Method::tron, Method::stron, Method::newton_cg, Method::lbfgs}) {
        SolverConfig cfg = with_method(m);
        cfg.grad_tol = 1e-8;
        const auto p1 = logistic(ds, 1e-3, {1, true});
        const auto p4 = logistic(ds, 1e-3, {4, true});
        SolverResult r1, r4;
        const auto a = trajectory(*p1, cfg, &r1);
        const auto b = trajectory(*p4, cfg, &r4);
        ASSERT_EQ(a.size(), b.size()) << to_string(m);
        for (std::size_t k = 0; k < a.size(); ++k) {
            EXPECT_EQ(a[k].objective, b[k].objective);
            EXPECT_EQ(a[k].grad_norm, b[k].grad_norm);
        }
        EXPECT_EQ(r1.w, r4.w);
    }
}

TEST(Fixture, TronConvergesOnBundledData) {
    LoadOptions o;
    o.on_warning = nullptr;
    const Dataset ds = load_dataset(std::string(S2ML_TEST_DATA_DIR) + "/fixture_1000.libsvm", o);
    ASSERT_EQ(ds.n_rows(), 1000u);
    const auto p = make_problem(ProblemConfig{}, ds);
    SolverConfig cfg;
    cfg.grad_tol = 1e-6;
    const SolverResult r = run_solver(*p, cfg);
    EXPECT_EQ(r.termination, Termination::converged);
    EXPECT_LT(r.objective, std::log(2.0));
}
