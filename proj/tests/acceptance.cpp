// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "cli.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

using namespace s2ml;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    const char* name;
    double budget_s;
    std::function<Verdict()> check;
};

Dataset synthetic(std::size_t n, std::size_t d, std::uint64_t seed, double density = 0.5) {
    SyntheticSpec spec;
    spec.n_rows = n;
    spec.n_cols = d;
    spec.density = density;
    spec.label_noise = 0.1;
    spec.seed = seed;
    return make_synthetic_dataset(spec);
}

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Shared by the gradient and Hessian criteria.
struct Instance {
    Dataset data;
    ProblemKind kind;
    double lambda;
    Vector w;
};

std::vector<Instance> fd_instances() {
    std::mt19937_64 rng(2024);
    std::vector<Instance> out;
    const double lambdas[] = {0.0, 0.1, 1.0};
    for (ProblemKind kind : {ProblemKind::logistic, ProblemKind::svm_l2})
        for (int k = 0; k < 50; ++k) {
            const std::size_t n = 1 + rng() % 60, d = 1 + rng() % 12;
            Instance inst{oracle::random_dataset(rng, n, d), kind, lambdas[k % 3], {}};
            inst.w = oracle::random_vector(rng, d, 0.5);
            out.push_back(std::move(inst));
        }
    return out;
}

Verdict gradient_check() {
    double worst = 0.0;
    for (const auto& inst : fd_instances()) {
        const auto p = make_problem(ProblemConfig{inst.kind, inst.lambda, false}, inst.data);
        worst = std::max(worst, oracle::max_rel_error(p->gradient(inst.w), oracle::fd_gradient(*p, inst.w, 1e-6)));
    }
    return {worst < 1e-6, "100 instances, max rel err " + g(worst) + " (< 1e-6)"};
}

bool near_kink(const Problem& p, const Dataset& ds, const Vector& w) {
    const auto* svm = dynamic_cast<const SquaredHingeSvm*>(&p);
    if (!svm) return false;
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        if (std::abs(svm->margin(i, w) - 1.0) < 1e-3) return true;
    return false;
}

Verdict hessian_check() {
    std::mt19937_64 rng(7);
    double fd = 0.0, lin = 0.0, sym = 0.0;
    std::size_t used = 0;
    for (auto inst : fd_instances()) {
        const auto p = make_problem(ProblemConfig{inst.kind, inst.lambda, false}, inst.data);
        // Nudge svm-l2 points off the kinks; give up on an instance after a few tries.
        for (int tries = 0; tries < 20 && near_kink(*p, inst.data, inst.w); ++tries)
            inst.w = oracle::random_vector(rng, inst.w.size(), 0.5);
        if (near_kink(*p, inst.data, inst.w)) continue;
        ++used;
        const std::size_t d = inst.w.size();
        const Vector u = oracle::random_vector(rng, d), v = oracle::random_vector(rng, d);
        const HessianOperator h = p->hessian_at(inst.w, Batch::full());
        const Vector hu = h(u), hv = h(v);
        fd = std::max(fd, oracle::max_rel_error(hv, oracle::fd_hess_vec(*p, inst.w, v, 1e-5)));
        const double a = 0.7, b = -1.3;
        Vector mix(d), combo(d);
        for (std::size_t j = 0; j < d; ++j) {
            mix[j] = a * u[j] + b * v[j];
            combo[j] = a * hu[j] + b * hv[j];
        }
        lin = std::max(lin, oracle::max_rel_error(h(mix), combo));
        const double uhv = dot(u, hv), vhu = dot(v, hu);
        const double scale = std::max({std::abs(uhv), std::abs(vhu), norm2(u) * norm2(hv), 1e-300});
        sym = std::max(sym, std::abs(uhv - vhu) / scale);
    }
    const bool pass = fd < 1e-5 && lin < 1e-12 && sym < 1e-12 && used >= 90;
    return {pass, std::to_string(used) + " instances, fd " + g(fd) + " (< 1e-5), linearity " + g(lin) +
                      ", symmetry " + g(sym) + " (< 1e-12)"};
}

Verdict steihaug_check() {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> radius_dist(0.05, 4.0);
    // Equivalence needs a converged solve; the loose default only bounds the residual.
    double worst = 0.0, worst_loose = 0.0;
    int indefinite = 0;
    for (int k = 0; k < 200; ++k) {
        const oracle::Quadratic2 q{{normal(rng), normal(rng), normal(rng)}, {normal(rng), normal(rng)}};
        const double radius = radius_dist(rng);
        indefinite += q.h[0] * q.h[2] - q.h[1] * q.h[1] < 0.0 || q.h[0] < 0.0;
        auto hv = [&](std::span<const double> v, std::span<double> out) {
            out[0] = q.h[0] * v[0] + q.h[1] * v[1];
            out[1] = q.h[1] * v[0] + q.h[2] * v[1];
        };
        const double brute = oracle::brute_force_disk_min(q, radius);
        const TrustRegionStep r = steihaug_cg(hv, Vector{q.g[0], q.g[1]}, radius, 1e-12, 25);
        worst = std::max(worst, std::abs(q.model(r.step[0], r.step[1]) - brute));
        const TrustRegionStep loose = steihaug_cg(hv, Vector{q.g[0], q.g[1]}, radius, 0.1, 25);
        worst_loose = std::max(worst_loose, std::abs(q.model(loose.step[0], loose.step[1]) - brute));
        if (norm2(loose.step) > radius + 1e-12) return {false, "loose step outside the region on trial " + std::to_string(k)};
        if (norm2(r.step) > radius + 1e-12) return {false, "step outside the region on trial " + std::to_string(k)};
    }
    return {worst <= 1e-6,
            "200 quadratics (" + std::to_string(indefinite) + " indefinite), max |m(s) - brute| " + g(worst) + " (<= 1e-6) at rtol 1e-12; " + g(worst_loose) + " at rtol 0.1 (informational)"};
}

Verdict lbfgs_check() {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t d = 1 + rng() % 12, m = 1 + rng() % 8;
        const auto pairs = oracle::random_memory(rng, d, m);
        const Vector gv = oracle::random_vector(rng, d);
        const Vector expect = oracle::mat_vec(oracle::dense_bfgs_inverse(pairs, d), gv);
        worst = std::max(worst, oracle::max_rel_error(lbfgs_two_loop(pairs, gv), expect));
    }
    return {worst < 1e-10, "200 memories, max rel err " + g(worst) + " (< 1e-10)"};
}

Verdict agreement_check() {
    const Dataset ds = synthetic(200, 20, 12345);
    const auto p = make_problem(ProblemConfig{ProblemKind::logistic, 0.01, false}, ds);
    std::vector<double> finals;
    std::string detail;
    bool pass = true;
    bool monotone = true;
    for (Method m : {Method::tron, Method::stron, Method::newton_cg, Method::lbfgs}) {
        SolverConfig cfg;
        cfg.method = m;
        cfg.grad_tol = 1e-10;
        cfg.max_iters = 2000;
        double last = std::numeric_limits<double>::infinity();
        const SolverResult r = run_solver(*p, cfg, [&](const IterationSnapshot& s) {
            if (m == Method::tron && (s.step_accepted || s.iter == 0)) {
                monotone = monotone && s.objective <= last;
                last = s.objective;
            }
        });
        pass = pass && r.termination == Termination::converged;
        finals.push_back(r.objective);
    }
    const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
    pass = pass && *hi - *lo <= 1e-8 && monotone;
    return {pass, "spread " + g(*hi - *lo) + " (<= 1e-8), tron monotone " + (monotone ? "yes" : "no")};
}

Verdict degeneracy_check() {
    const Dataset ds = synthetic(500, 30, 777);
    const auto p = make_problem(ProblemConfig{ProblemKind::logistic, 1e-3, false}, ds, ExecutionPolicy{2, true});
    auto run = [&](Method m) {
        SolverConfig cfg;
        cfg.method = m;
        cfg.grad_tol = 1e-10;
        cfg.batch0_frac = 1.0;
        std::vector<std::pair<std::size_t, double>> traj;
        run_solver(*p, cfg, [&](const IterationSnapshot& s) { traj.emplace_back(s.iter, s.objective); });
        return traj;
    };
    const auto a = run(Method::tron), b = run(Method::stron);
    return {a == b && a.size() > 2, std::to_string(a.size()) + " snapshots, identical " + (a == b ? "yes" : "no")};
}

Verdict stron_rows_check() {
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed : {1, 2, 3}) {
        const Dataset ds = synthetic(5000, 200, 500 + seed, 0.1);
        const ProblemConfig pc{ProblemKind::logistic, std::nullopt, false};
        const auto p = make_problem(pc, ds);
        const double f_star = compute_f_star(*p);
        struct Hit {
            std::optional<std::size_t> rows;
            double time = 0.0;
        };
        auto run = [&](Method m) {
            SolverConfig cfg;
            cfg.method = m;
            cfg.grad_tol = 1e-8;
            cfg.rng_seed = seed;
            Hit hit;
            std::size_t rows = 0;
            const auto t0 = std::chrono::steady_clock::now();
            run_solver(*p, cfg, [&](const IterationSnapshot& s) {
                rows += s.rows_touched;
                if (!hit.rows && s.objective - f_star <= 1e-3) {
                    hit.rows = rows;
                    hit.time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                }
            });
            return hit;
        };
        const Hit tron = run(Method::tron), stron = run(Method::stron);
        const bool win = tron.rows && stron.rows && *stron.rows <= *tron.rows;
        wins += win;
        detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": stron " +
                  (stron.rows ? std::to_string(*stron.rows) : "-") + " rows/" + g(stron.time) + " s vs tron " +
                  (tron.rows ? std::to_string(*tron.rows) : "-") + " rows/" + g(tron.time) + " s";
    }
    return {wins >= 2, std::to_string(wins) + "/3 seeds (need >= 2); " + detail};
}

Verdict roundtrip_check() {
    std::mt19937_64 rng(31337);
    LoadOptions quiet;
    quiet.on_warning = nullptr;
    for (int k = 0; k < 500; ++k) {
        const std::size_t n = rng() % 40, d = 1 + rng() % 50;
        DatasetBuilder b;
        std::normal_distribution<double> normal;
        for (std::size_t i = 0; i < n; ++i) {
            LibsvmRow row{static_cast<signed char>(rng() % 2 ? 1 : -1), {}};
            for (std::size_t j = 1; j <= d; ++j)
                if (rng() % 4 == 0) row.entries.push_back({j, std::ldexp(normal(rng), static_cast<int>(rng() % 200) - 100)});
            b.add_row(std::move(row));
        }
        const Dataset ds = std::move(b).finish(d);
        LoadOptions o = quiet;
        o.n_cols_hint = d;
        if (!(load_dataset_text(serialize_dataset(ds), o) == ds))
            return {false, "random dataset " + std::to_string(k) + " did not round-trip"};
    }
    const fs::path dir(S2ML_TEST_DATA_DIR);
    try {
        const Dataset c = load_dataset((dir / "comments.libsvm").string(), quiet);
        const Dataset z = load_dataset((dir / "zero_labels.libsvm").string(), quiet);
        const Dataset o = load_dataset((dir / "out_of_order.libsvm").string(), quiet);
        for (const Dataset* ds : {&c, &z, &o}) {
            LoadOptions lo = quiet;
            lo.n_cols_hint = ds->n_cols();
            if (!(load_dataset_text(serialize_dataset(*ds), lo) == *ds)) return {false, "fixture did not round-trip"};
        }
        if (z.labels != std::vector<signed char>{-1, 1, -1, 1}) return {false, "label 0 not mapped to -1"};
    } catch (const std::exception& e) {
        return {false, std::string("fixture rejected: ") + e.what()};
    }
    try {
        load_dataset((dir / "duplicate.libsvm").string(), quiet);
        return {false, "duplicate index accepted"};
    } catch (const ParseError&) {
    }
    return {true, "500 random datasets + 4 fixtures"};
}

// Minimal XML well-formedness: declaration, balanced tags, one root.
bool well_formed_xml(const std::string& s) {
    if (s.rfind("<?xml", 0) != 0) return false;
    std::vector<std::string> stack;
    int roots = 0;
    for (std::size_t pos = s.find('<', 1); pos != std::string::npos; pos = s.find('<', pos + 1)) {
        const std::size_t end = s.find('>', pos);
        if (end == std::string::npos) return false;
        const std::string tag = s.substr(pos + 1, end - pos - 1);
        if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        if (stack.empty()) ++roots;
        if (tag.back() == '/') continue;
        stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
    return stack.empty() && roots == 1;
}

Verdict cli_check() {
    const fs::path dir = fs::temp_directory_path() / ("s2ml_acceptance_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    fs::copy_file(fs::path(S2ML_TEST_DATA_DIR) / "fixture_1000.libsvm", dir / "train.libsvm");
    std::ostringstream out, err;
    const int code = cli::run({"benchmark", "--data", (dir / "train.libsvm").string(), "--test-data",
                               (dir / "train.libsvm").string(), "--solver", "tron", "--solver", "stron", "--solver",
                               "lbfgs", "--out-dir", (dir / "results").string()},
                              out, err);
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), {});
    };
    Verdict v;
    if (code != 0) {
        v = {false, "exit " + std::to_string(code) + ": " + err.str()};
    } else {
        const std::string csv = slurp(dir / "results" / "traces.csv");
        const bool header = csv.substr(0, csv.find('\n')) ==
                            "solver,rep,iter,wall_time_s,objective,optimality_gap,test_accuracy,grad_norm,rows_touched";
        bool lossless = false;
        try {
            lossless = format_trace_csv(parse_trace_csv(csv)) == csv;
        } catch (const std::exception&) {
        }
        const bool svg = well_formed_xml(slurp(dir / "results" / "gap.svg")) &&
                         well_formed_xml(slurp(dir / "results" / "accuracy.svg"));
        v = {header && lossless && svg, std::string("header ") + (header ? "ok" : "BAD") + ", csv round-trip " +
                                            (lossless ? "ok" : "BAD") + ", svg " + (svg ? "ok" : "BAD")};
    }
    fs::remove_all(dir);
    return v;
}

Verdict anchor_check() {
    std::mt19937_64 rng(4);
    double worst_log = 0.0, worst_svm = 0.0;
    std::vector<Dataset> sets;
    for (int k = 0; k < 50; ++k) sets.push_back(oracle::random_dataset(rng, 1 + rng() % 3000, 1 + rng() % 40));
    LoadOptions quiet;
    quiet.on_warning = nullptr;
    sets.push_back(load_dataset(std::string(S2ML_TEST_DATA_DIR) + "/fixture_1000.libsvm", quiet));
    for (const auto& ds : sets) {
        const Vector zero(ds.n_cols(), 0.0);
        const auto lp = make_problem(ProblemConfig{ProblemKind::logistic, 0.0, false}, ds);
        const auto sp = make_problem(ProblemConfig{ProblemKind::svm_l2, 0.0, false}, ds);
        worst_log = std::max(worst_log, std::abs(lp->objective(zero) - 0.6931471805599453));
        worst_svm = std::max(worst_svm, std::abs(sp->objective(zero) - 1.0));
    }
    return {worst_log <= 1e-15 && worst_svm <= 1e-15,
            std::to_string(sets.size()) + " datasets, |F-ln2| " + g(worst_log) + ", |F-1| " + g(worst_svm)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"gradient correctness", 5, gradient_check},
        {"hessian-vector correctness", 5, hessian_check},
        {"steihaug vs brute force", 10, steihaug_check},
        {"l-bfgs two-loop equivalence", 5, lbfgs_check},
        {"solver agreement", 10, agreement_check},
        {"stron full-batch degeneracy", 5, degeneracy_check},
        {"stron vs tron hessian rows", 60, stron_rows_check},
        {"data round-trip", 5, roundtrip_check},
        {"cli benchmark smoke", 10, cli_check},
        {"objective anchors", 5, anchor_check},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = v.pass && in_time;
        failures += !pass;
        std::printf("%s  %-30s %6.2fs/%gs  %s%s\n", pass ? "PASS" : "FAIL", c.name, secs, c.budget_s,
                    v.detail.c_str(), in_time ? "" : "  [over time budget]");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
