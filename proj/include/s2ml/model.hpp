#pragma once

#include "s2ml/problems/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace s2ml {

/// Trained weights plus the problem they were fitted for. `lambda` is the resolved value.
struct Model {
    ProblemKind kind = ProblemKind::logistic;
    double lambda = 0.0;
    bool add_bias = false;
    Vector w;

    ProblemConfig problem_config() const { return {kind, lambda, add_bias}; }
    friend bool operator==(const Model&, const Model&) = default;
};

inline constexpr std::string_view kModelMagic = "s2ml-model v1";

/// Line 1 magic, line 2 `kind=.. lambda=.. bias=0|1 dim=d`, then one
/// coefficient per line at 17 significant digits.
inline std::string format_model(const Model& m) {
    auto g17 = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::string out(kModelMagic);
    out += '\n';
    out += "kind=" + std::string(to_string(m.kind)) + " lambda=" + g17(m.lambda) + " bias=" + (m.add_bias ? "1" : "0") +
           " dim=" + std::to_string(m.w.size()) + '\n';
    for (double v : m.w) out += g17(v) + '\n';
    return out;
}

inline Model parse_model(std::string_view text) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    auto fail = [](const std::string& msg) -> Model { throw Error("model: " + msg); };

    if (lines.empty() || lines[0] != kModelMagic)
        return fail("expected first line '" + std::string(kModelMagic) + "'");
    if (lines.size() < 2) return fail("missing header line (expected at least 2 lines, found 1)");

    Model m;
    std::size_t dim = 0;
    {
        const std::string header(lines[1]);
        char kind[16] = {};
        char lambda_buf[48] = {};
        int bias = -1;
        int consumed = 0;
        if (std::sscanf(header.c_str(), "kind=%15s lambda=%47s bias=%d dim=%zu%n", kind, lambda_buf, &bias, &dim,
                        &consumed) != 4 ||
            static_cast<std::size_t>(consumed) != header.size())
            return fail("malformed header '" + header + "'");
        const auto k = parse_problem_kind(kind);
        if (!k) return fail("unknown kind '" + std::string(kind) + "'");
        m.kind = *k;
        if (bias != 0 && bias != 1) return fail("bias must be 0 or 1");
        m.add_bias = bias == 1;
        const std::string_view lv(lambda_buf);
        const auto [ptr, ec] = std::from_chars(lv.data(), lv.data() + lv.size(), m.lambda);
        if (ec != std::errc{} || ptr != lv.data() + lv.size() || !(m.lambda >= 0.0))
            return fail("bad lambda '" + std::string(lv) + "'");
    }

    const std::size_t expected = dim + 2;
    if (lines.size() != expected)
        return fail("expected " + std::to_string(expected) + " lines (" + std::to_string(dim) +
                    " coefficients), found " + std::to_string(lines.size()));
    m.w.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const std::string_view s = lines[j + 2];
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), m.w[j]);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
            return fail("bad coefficient on line " + std::to_string(j + 3));
    }
    return m;
}

inline void write_model(const Model& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << format_model(m);
    if (!f) throw Error("write failed on '" + path + "'");
}

inline Model read_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_model(ss.str());
}

}  // namespace s2ml
