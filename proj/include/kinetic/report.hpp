#pragma once

// Experiment reports and deterministic emission. Same report in, same bytes
// out: object keys ride on std::map ordering and every float is rendered
// with %.17g. Timing never enters report.json (reruns must be byte-equal);
// it goes to stdout.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "kinetic/errors.hpp"
#include "kinetic/pde.hpp"

namespace kinetic {

inline std::string format_g17(double x) {
    if (!std::isfinite(x)) return x > 0 ? "1e9999" : (x < 0 ? "-1e9999" : "null");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

struct ExperimentReport {
    std::string experiment;
    std::string model;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string code_version = "0.1.0";
    std::map<std::string, double> metrics;
    std::map<std::string, double> thresholds;
    std::map<std::string, bool> verdicts;
    std::map<std::string, std::string> notes;

    bool all_pass() const {
        for (const auto& [k, v] : verdicts)
            if (!v) return false;
        return true;
    }
};

namespace detail {
inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}
} // namespace detail

inline std::string report_to_json(const ExperimentReport& r) {
    std::string out = "{\n";
    out += "  \"experiment\": \"" + detail::json_escape(r.experiment) + "\",\n";
    out += "  \"model\": \"" + detail::json_escape(r.model) + "\",\n";
    out += "  \"seed\": " + std::to_string(r.seed) + ",\n";
    out += "  \"config_hash\": \"" + r.config_hash + "\",\n";
    out += "  \"code_version\": \"" + r.code_version + "\",\n";
    auto emit_map = [&out](const std::string& name, const auto& m, auto fmt, bool last) {
        out += "  \"" + name + "\": {";
        bool first = true;
        for (const auto& [k, v] : m) {
            out += first ? "\n" : ",\n";
            out += "    \"" + detail::json_escape(k) + "\": " + fmt(v);
            first = false;
        }
        out += m.empty() ? "}" : "\n  }";
        out += last ? "\n" : ",\n";
    };
    emit_map("metrics", r.metrics, [](double v) { return format_g17(v); }, false);
    emit_map("thresholds", r.thresholds, [](double v) { return format_g17(v); }, false);
    emit_map("verdicts", r.verdicts, [](bool v) { return std::string(v ? "true" : "false"); },
             false);
    emit_map("notes", r.notes,
             [](const std::string& v) { return "\"" + detail::json_escape(v) + "\""; }, true);
    out += "}\n";
    return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

inline void write_report_json(const ExperimentReport& r, const std::filesystem::path& path) {
    write_text_file(path, report_to_json(r));
}

/// CSV table with a fixed header; cells already formatted by the caller.
inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::string text = header + "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ",";
            text += row[i];
        }
        text += "\n";
    }
    write_text_file(path, text);
}

/// Density snapshot: one row per cell, header "x,u" or "x,y,u".
inline void write_density_csv(const DensityGrid& g, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    if (g.spec.dim == 1) {
        for (int i = 0; i < g.spec.nx; ++i)
            rows.push_back({format_g17(g.xc(i)), format_g17(g.values[i])});
        write_csv(path, "x,u", rows);
    } else {
        for (int i = 0; i < g.spec.nx; ++i)
            for (int j = 0; j < g.spec.ny; ++j)
                rows.push_back({format_g17(g.xc(i)), format_g17(g.yc(j)),
                                format_g17(g.values[g.index(i, j)])});
        write_csv(path, "x,y,u", rows);
    }
}

namespace detail {
inline std::string svg_color(double t) {
    // compact dark-blue -> yellow ramp
    t = std::max(0.0, std::min(1.0, t));
    const int r = static_cast<int>(255 * t);
    const int g = static_cast<int>(32 + 192 * t);
    const int b = static_cast<int>(96 + 120 * (1.0 - t));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return std::string(buf);
}
} // namespace detail

/// Self-contained heatmap (2D) or filled curve (1D) of a density grid.
inline void write_density_svg(const DensityGrid& g, const std::filesystem::path& path) {
    const int w = 640, h = 480, m = 40;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                    "\" height=\"" + std::to_string(h) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    double vmax = 0;
    for (double v : g.values) vmax = std::max(vmax, v);
    if (vmax <= 0) vmax = 1;
    if (g.spec.dim == 1) {
        s += "<polyline fill=\"none\" stroke=\"#205080\" stroke-width=\"1.5\" points=\"";
        for (int i = 0; i < g.spec.nx; ++i) {
            const double px = m + (g.xc(i) + g.spec.L) / (2 * g.spec.L) * (w - 2 * m);
            const double py = h - m - std::max(0.0, g.values[i]) / vmax * (h - 2 * m);
            s += format_g17(px) + "," + format_g17(py) + " ";
        }
        s += "\"/>\n";
    } else {
        const double cw = static_cast<double>(w - 2 * m) / g.spec.nx;
        const double ch = static_cast<double>(h - 2 * m) / g.spec.ny;
        for (int i = 0; i < g.spec.nx; ++i)
            for (int j = 0; j < g.spec.ny; ++j) {
                const double v = std::max(0.0, g.values[g.index(i, j)]) / vmax;
                s += "<rect x=\"" + format_g17(m + i * cw) + "\" y=\"" +
                     format_g17(h - m - (j + 1) * ch) + "\" width=\"" + format_g17(cw + 0.5) +
                     "\" height=\"" + format_g17(ch + 0.5) + "\" fill=\"" +
                     detail::svg_color(v) + "\"/>\n";
            }
    }
    // axis labels carry the domain extent
    s += "<text x=\"" + std::to_string(m) + "\" y=\"" + std::to_string(h - 12) +
         "\" font-size=\"12\">-L = " + format_g17(-g.spec.L) + "</text>\n";
    s += "<text x=\"" + std::to_string(w - m - 60) + "\" y=\"" + std::to_string(h - 12) +
         "\" font-size=\"12\">L = " + format_g17(g.spec.L) + "</text>\n";
    s += "</svg>\n";
    write_text_file(path, s);
}

/// Log-log residual curves, one polyline per series.
inline void write_series_svg(const std::filesystem::path& path,
                             const std::vector<double>& xs,
                             const std::map<std::string, std::vector<double>>& series) {
    const int w = 640, h = 480, m = 50;
    double lxmin = 1e300, lxmax = -1e300, lymin = 1e300, lymax = -1e300;
    auto lg = [](double v) { return std::log10(std::max(v, 1e-300)); };
    for (double x : xs) {
        lxmin = std::min(lxmin, lg(x));
        lxmax = std::max(lxmax, lg(x));
    }
    for (const auto& [name, ys] : series)
        for (double y : ys) {
            lymin = std::min(lymin, lg(y));
            lymax = std::max(lymax, lg(y));
        }
    if (lxmax <= lxmin) lxmax = lxmin + 1;
    if (lymax <= lymin) lymax = lymin + 1;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                    "\" height=\"" + std::to_string(h) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const char* colors[] = {"#205080", "#a03030", "#308040", "#806020", "#603080", "#208080"};
    int ci = 0;
    for (const auto& [name, ys] : series) {
        s += "<polyline fill=\"none\" stroke=\"";
        s += colors[ci % 6];
        s += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
            const double px = m + (lg(xs[i]) - lxmin) / (lxmax - lxmin) * (w - 2 * m);
            const double py = h - m - (lg(ys[i]) - lymin) / (lymax - lymin) * (h - 2 * m);
            s += format_g17(px) + "," + format_g17(py) + " ";
        }
        s += "\"/>\n";
        s += "<text x=\"" + std::to_string(w - m - 150) + "\" y=\"" +
             std::to_string(m + 16 * ci) + "\" font-size=\"12\" fill=\"";
        s += colors[ci % 6];
        s += "\">" + detail::json_escape(name) + "</text>\n";
        ++ci;
    }
    s += "</svg>\n";
    write_text_file(path, s);
}

} // namespace kinetic
