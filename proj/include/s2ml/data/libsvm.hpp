#pragma once

#include "s2ml/data/sparse_matrix.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace s2ml {

/// A malformed LIBSVM line. `line()` is 1-based; 0 when parsing a standalone line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct LibsvmEntry {
    std::size_t index;  // 1-based, as written in the file
    double value;
    friend bool operator==(const LibsvmEntry&, const LibsvmEntry&) = default;
};

struct LibsvmRow {
    signed char label;
    std::vector<LibsvmEntry> entries;
    bool label_was_zero = false;
    friend bool operator==(const LibsvmRow&, const LibsvmRow&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\v\f");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\v\f");
    return s.substr(first, last - first + 1);
}

inline std::string_view strip_comment(std::string_view s) {
    const auto hash = s.find('#');
    return hash == std::string_view::npos ? s : s.substr(0, hash);
}

// from_chars rejects a leading '+', LIBSVM files use it freely.
inline std::optional<double> parse_real(std::string_view tok) {
    if (!tok.empty() && tok.front() == '+') {
        tok.remove_prefix(1);
        if (!tok.empty() && (tok.front() == '+' || tok.front() == '-')) return std::nullopt;
    }
    if (tok.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::size_t> parse_index(std::string_view tok) {
    if (tok.empty() || tok.front() < '0' || tok.front() > '9') return std::nullopt;
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) return std::nullopt;
    return v;
}

}  // namespace detail

/// Parses `label index:value ...`. Text after '#' is ignored. Index order is not checked here.
inline LibsvmRow parse_libsvm_line(std::string_view line, std::size_t line_no = 0) {
    std::string_view body = detail::trim(detail::strip_comment(line));
    if (body.empty()) throw ParseError(line_no, "missing label");

    LibsvmRow row{};
    bool first = true;
    while (!body.empty()) {
        const auto end = body.find_first_of(" \t");
        const std::string_view tok = body.substr(0, end);
        body = end == std::string_view::npos ? std::string_view{} : detail::trim(body.substr(end));

        if (first) {
            first = false;
            if (tok.find(':') != std::string_view::npos)
                throw ParseError(line_no, "first token '" + std::string(tok) + "' is not a label");
            const auto label = detail::parse_real(tok);
            if (!label) throw ParseError(line_no, "invalid label '" + std::string(tok) + "'");
            if (*label == 1.0) {
                row.label = 1;
            } else if (*label == -1.0) {
                row.label = -1;
            } else if (*label == 0.0) {
                row.label = -1;
                row.label_was_zero = true;
            } else {
                throw ParseError(line_no, "label '" + std::string(tok) + "' is not one of +1, -1, 0");
            }
            continue;
        }

        const auto colon = tok.find(':');
        if (colon == std::string_view::npos)
            throw ParseError(line_no, "token '" + std::string(tok) + "' has no ':'");
        const auto index = detail::parse_index(tok.substr(0, colon));
        if (!index) throw ParseError(line_no, "non-numeric index in '" + std::string(tok) + "'");
        if (*index < 1) throw ParseError(line_no, "index < 1 in '" + std::string(tok) + "'");
        const auto value = detail::parse_real(tok.substr(colon + 1));
        if (!value) throw ParseError(line_no, "non-numeric value in '" + std::string(tok) + "'");
        row.entries.push_back({*index, *value});
    }
    return row;
}

/// Appends rows in order, sorting each row's entries and rejecting duplicate indices.
class DatasetBuilder {
public:
    void add_row(LibsvmRow row, std::size_t line_no = 0) {
        auto& e = row.entries;
        if (!std::is_sorted(e.begin(), e.end(), [](auto& a, auto& b) { return a.index < b.index; }))
            std::sort(e.begin(), e.end(), [](auto& a, auto& b) { return a.index < b.index; });
        for (std::size_t k = 1; k < e.size(); ++k)
            if (e[k].index == e[k - 1].index)
                throw ParseError(line_no, "duplicate feature index " + std::to_string(e[k].index));
        for (const auto& [index, value] : e) {
            if (index > std::numeric_limits<std::uint32_t>::max())
                throw ParseError(line_no, "feature index " + std::to_string(index) + " too large");
            ds_.features.col_indices.push_back(static_cast<std::uint32_t>(index - 1));
            ds_.features.values.push_back(value);
            max_index_ = std::max(max_index_, index);
        }
        ds_.features.row_offsets.push_back(ds_.features.values.size());
        ds_.labels.push_back(row.label);
        ++ds_.features.n_rows;
    }

    Dataset finish(std::optional<std::size_t> n_cols_hint = std::nullopt) && {
        ds_.features.n_cols = std::max(n_cols_hint.value_or(0), max_index_);
        return std::move(ds_);
    }

private:
    Dataset ds_;
    std::size_t max_index_ = 0;
};

struct LoadOptions {
    std::optional<std::size_t> n_cols_hint;
    /// Worker threads for parsing. Rows are assembled in file order regardless.
    std::size_t threads = 1;
    /// Receives non-fatal diagnostics (at most one per kind per file).
    std::function<void(const std::string&)> on_warning = [](const std::string& msg) {
        std::clog << "warning: " << msg << '\n';
    };
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw Error("cannot open '" + path + "'");
    std::array<unsigned char, 2> magic{};
    probe.read(reinterpret_cast<char*>(magic.data()), 2);
    const bool gzipped = probe.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;

    std::string text;
    if (!gzipped) {
        probe.clear();
        probe.seekg(0, std::ios::end);
        text.resize(static_cast<std::size_t>(probe.tellg()));
        probe.seekg(0);
        probe.read(text.data(), static_cast<std::streamsize>(text.size()));
        if (!probe) throw Error("read failed on '" + path + "'");
        return text;
    }

    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw Error("cannot open '" + path + "' as gzip");
    std::array<char, 1 << 16> buf{};
    for (;;) {
        const int got = gzread(gz, buf.data(), static_cast<unsigned>(buf.size()));
        if (got < 0) {
            int errnum = 0;
            std::string msg = gzerror(gz, &errnum);
            gzclose(gz);
            throw Error("gzip read failed on '" + path + "': " + msg);
        }
        if (got == 0) break;
        text.append(buf.data(), static_cast<std::size_t>(got));
    }
    gzclose(gz);
    return text;
}

}  // namespace detail

/// Loads a LIBSVM file (plain or gzip). Label 0 is mapped to -1 with one warning per file.
inline Dataset load_dataset_text(std::string_view text, const LoadOptions& opts = {}) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }

    // Blank and comment-only lines parse to nullopt.
    std::vector<std::optional<LibsvmRow>> parsed(lines.size());
    std::vector<std::optional<ParseError>> errors(lines.size());
    auto parse_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (detail::trim(detail::strip_comment(lines[i])).empty()) continue;
            try {
                parsed[i] = parse_libsvm_line(lines[i], i + 1);
            } catch (const ParseError& e) {
                errors[i] = e;
                return;
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(opts.threads, 1, std::max<std::size_t>(1, lines.size() / 4096));
    if (workers == 1) {
        parse_range(0, lines.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (lines.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(parse_range, std::min(lines.size(), w * chunk),
                              std::min(lines.size(), (w + 1) * chunk));
    }

    DatasetBuilder builder;
    bool warned_zero = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (errors[i]) throw *errors[i];
        if (!parsed[i]) continue;
        if (parsed[i]->label_was_zero && !warned_zero) {
            warned_zero = true;
            if (opts.on_warning) opts.on_warning("label 0 mapped to -1 (first at line " + std::to_string(i + 1) + ")");
        }
        builder.add_row(std::move(*parsed[i]), i + 1);
    }
    return std::move(builder).finish(opts.n_cols_hint);
}

inline Dataset load_dataset(const std::string& path, const LoadOptions& opts = {}) {
    const std::string text = detail::read_file(path);
    try {
        return load_dataset_text(text, opts);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + std::string(e.what()));
    }
}

namespace detail {

/// Shortest decimal that parses back to the same double.
inline void append_shortest(std::string& out, double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), ptr);
}

}  // namespace detail

/// One row in canonical form, without a trailing newline.
inline std::string serialize_row(const Dataset& ds, std::size_t row) {
    std::string out = ds.labels[row] > 0 ? "+1" : "-1";
    const auto idx = ds.features.row_indices(row);
    const auto val = ds.features.row_values(row);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out += ' ';
        out += std::to_string(std::size_t{idx[k]} + 1);
        out += ':';
        detail::append_shortest(out, val[k]);
    }
    return out;
}

/// Canonical LIBSVM text, one newline-terminated line per row.
inline std::string serialize_dataset(const Dataset& ds) {
    std::string out;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        out += serialize_row(ds, i);
        out += '\n';
    }
    return out;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << serialize_dataset(ds);
    if (!f) throw Error("write failed on '" + path + "'");
}

}  // namespace s2ml
