#pragma once

#include "s2ml/data/sparse_matrix.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace s2ml {

struct TraceRecord {
    std::size_t iter = 0;
    double wall_time_s = 0.0;
    double objective = 0.0;
    double optimality_gap = 0.0;
    std::optional<double> test_accuracy;
    double grad_norm = 0.0;
    /// Cumulative Hessian-vector rows since the start of the run.
    std::size_t rows_touched = 0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// All records of one (solver, repetition) run.
struct SolverTrace {
    std::string solver;
    std::size_t rep = 0;
    std::vector<TraceRecord> records;

    friend bool operator==(const SolverTrace&, const SolverTrace&) = default;
};

inline constexpr std::string_view kTraceCsvHeader =
    "solver,rep,iter,wall_time_s,objective,optimality_gap,test_accuracy,grad_norm,rows_touched";

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_csv_real(std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error("trace csv line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return v;
}

inline std::size_t parse_csv_count(std::string_view s, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error("trace csv line " + std::to_string(line) + ": bad count '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

inline std::string format_trace_csv(const std::vector<SolverTrace>& traces) {
    std::string out(kTraceCsvHeader);
    out += '\n';
    for (const auto& t : traces) {
        for (const auto& r : t.records) {
            out += t.solver;
            out += ',' + std::to_string(t.rep);
            out += ',' + std::to_string(r.iter);
            out += ',' + detail::format_g17(r.wall_time_s);
            out += ',' + detail::format_g17(r.objective);
            out += ',' + detail::format_g17(r.optimality_gap);
            out += ',';
            if (r.test_accuracy) out += detail::format_g17(*r.test_accuracy);
            out += ',' + detail::format_g17(r.grad_norm);
            out += ',' + std::to_string(r.rows_touched);
            out += '\n';
        }
    }
    return out;
}

/// Parses the combined CSV; rows are grouped into traces by consecutive (solver, rep).
inline std::vector<SolverTrace> parse_trace_csv(std::string_view text) {
    std::vector<SolverTrace> traces;
    std::size_t line_no = 0;
    bool header_seen = false;
    for (std::size_t pos = 0; pos < text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (line != kTraceCsvHeader) throw Error("trace csv: unexpected header '" + std::string(line) + "'");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        std::vector<std::string_view> f;
        for (std::size_t start = 0;;) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (f.size() != 9)
            throw Error("trace csv line " + std::to_string(line_no) + ": expected 9 fields, found " +
                        std::to_string(f.size()));

        const std::string solver(f[0]);
        const std::size_t rep = detail::parse_csv_count(f[1], line_no);
        if (traces.empty() || traces.back().solver != solver || traces.back().rep != rep)
            traces.push_back({solver, rep, {}});

        TraceRecord r;
        r.iter = detail::parse_csv_count(f[2], line_no);
        r.wall_time_s = detail::parse_csv_real(f[3], line_no);
        r.objective = detail::parse_csv_real(f[4], line_no);
        r.optimality_gap = detail::parse_csv_real(f[5], line_no);
        if (!f[6].empty()) r.test_accuracy = detail::parse_csv_real(f[6], line_no);
        r.grad_norm = detail::parse_csv_real(f[7], line_no);
        r.rows_touched = detail::parse_csv_count(f[8], line_no);
        traces.back().records.push_back(r);
    }
    if (!header_seen) throw Error("trace csv: missing header");
    return traces;
}

inline void write_trace_csv(const std::vector<SolverTrace>& traces, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << format_trace_csv(traces);
    if (!f) throw Error("write failed on '" + path + "'");
}

inline std::vector<SolverTrace> read_trace_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_trace_csv(ss.str());
}

}  // namespace s2ml
