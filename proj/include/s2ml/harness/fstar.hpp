#pragma once

#include "s2ml/problems/config.hpp"
#include "s2ml/solvers/run.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace s2ml {

struct FStarOptions {
    double grad_tol = 1e-12;
    std::size_t max_iters = 1000;
    /// A stalled run still counts as converged below this relative gradient norm.
    double stall_accept_tol = 1e-8;
};

/// Reference optimum F* from a tightly converged TRON run.
inline double compute_f_star(const Problem& problem, const FStarOptions& opts = {}) {
    SolverConfig cfg;
    cfg.method = Method::tron;
    cfg.grad_tol = opts.grad_tol;
    cfg.max_iters = opts.max_iters;
    const SolverResult res = run_solver(problem, cfg);
    const bool ok = res.termination == Termination::converged ||
                    (res.termination == Termination::stalled &&
                     res.grad_norm <= opts.stall_accept_tol * norm2(problem.gradient(Vector(problem.dimension(), 0.0))));
    if (!ok)
        throw Error("F* computation did not converge (" + std::string(to_string(res.termination)) + " after " +
                    std::to_string(res.iterations) + " iterations, |g| = " + std::to_string(res.grad_norm) +
                    "); use a larger lambda or a higher iteration cap");
    return res.objective;
}

namespace detail {

struct Fnv1a {
    std::uint64_t h = 1469598103934665603ull;
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t k = 0; k < n; ++k) {
            h ^= b[k];
            h *= 1099511628211ull;
        }
    }
    template <class T>
    void value(const T& v) {
        bytes(&v, sizeof v);
    }
    template <class T>
    void range(const std::vector<T>& v) {
        value(v.size());
        if (!v.empty()) bytes(v.data(), v.size() * sizeof(T));
    }
};

}  // namespace detail

/// 16 hex digits identifying (dataset contents, problem configuration).
inline std::string problem_digest(const Dataset& data, const ProblemConfig& config) {
    detail::Fnv1a f;
    f.value(data.features.n_rows);
    f.value(data.features.n_cols);
    f.range(data.features.row_offsets);
    f.range(data.features.col_indices);
    f.range(data.features.values);
    f.range(data.labels);
    f.value(static_cast<int>(config.kind));
    f.value(config.resolved_lambda(data.n_rows()));
    f.value(static_cast<unsigned char>(config.add_bias));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
    return buf;
}

/// F* values keyed by problem_digest, in memory and optionally as
/// `<digest>.fstar` files in a directory.
class FStarCache {
public:
    double get_or_compute(const Problem& problem, const Dataset& data, const ProblemConfig& config,
                          const std::optional<std::filesystem::path>& dir = std::nullopt,
                          const FStarOptions& opts = {}) {
        const std::string key = problem_digest(data, config);
        {
            std::lock_guard lock(mutex_);
            if (auto it = memory_.find(key); it != memory_.end()) return it->second;
        }
        if (dir) {
            if (auto v = read_file(*dir / (key + ".fstar"))) {
                std::lock_guard lock(mutex_);
                return memory_.emplace(key, *v).first->second;
            }
        }
        const double value = compute_f_star(problem, opts);
        if (dir) write_file(*dir / (key + ".fstar"), value);
        std::lock_guard lock(mutex_);
        return memory_.emplace(key, value).first->second;
    }

    static std::optional<double> read_file(const std::filesystem::path& path) {
        std::ifstream f(path);
        if (!f) return std::nullopt;
        std::string text;
        std::getline(f, text);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    }

    /// Best effort: an unwritable directory leaves only the in-memory entry.
    static bool write_file(const std::filesystem::path& path, double value) {
        std::ofstream f(path);
        if (!f) return false;
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g\n", value);
        f << buf;
        return static_cast<bool>(f);
    }

private:
    std::mutex mutex_;
    std::map<std::string, double> memory_;
};

}  // namespace s2ml
