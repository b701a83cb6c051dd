#pragma once

#include "qlink/error.hpp"
#include "qlink/experiment.hpp"
#include "qlink/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qlink {

inline constexpr std::string_view kTableHeader = "level_index,target_p,replication,kind,da,r2_oos,theo_r2";

/// One parsed row of the result table.
struct TableRow {
    std::size_t level_index = 0;
    double target_p = 0.0;
    std::size_t replication = 0;
    ForecastKind kind = ForecastKind::Type1;
    double da = 0.0;
    double r2_oos = 0.0;
    double theo_r2 = 0.0;
};

namespace detail {

[[nodiscard]] inline std::string fmt_sig10(double v) {
    if (!std::isfinite(v)) {
        throw Error(ErrorCode::IoError, "report", "refusing to serialize a non-finite value");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

[[nodiscard]] inline std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    return s == "-0.00" ? "0.00" : s;
}

[[nodiscard]] inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

/// Writes `content` to a temporary sibling and renames it over `path`, so a
/// reader never sees a partial file.
inline std::size_t atomic_write(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::random_device rd;
    char suffix[24];
    std::snprintf(suffix, sizeof suffix, ".tmp%08x", rd());
    fs::path tmp = path;
    tmp += suffix;
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw Error(ErrorCode::IoError, "report", "cannot open " + tmp.string() + " for writing");
        }
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        os.flush();
        if (!os) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorCode::IoError, "report", "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "report", "cannot move output into place at " + path.string());
    }
    return content.size();
}

[[nodiscard]] inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error(ErrorCode::IoError, "report", "cannot read " + path.string());
    }
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

[[nodiscard]] inline std::string render_table(const ExperimentResult& result) {
    const double kappa = result.kappa.kappa_hat;
    std::string out(kTableHeader);
    out += '\n';
    for (const auto& p : result.points) {
        out += std::to_string(p.level);
        out += ',';
        out += detail::fmt_sig10(p.target_p);
        out += ',';
        out += std::to_string(p.replication);
        out += ',';
        out += to_string(p.kind);
        out += ',';
        out += detail::fmt_sig10(p.da);
        out += ',';
        out += detail::fmt_sig10(p.r2_oos);
        out += ',';
        out += detail::fmt_sig10(theoretical_r2(p.da, kappa));
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline std::vector<TableRow> parse_table(std::string_view text) {
    std::vector<TableRow> rows;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line_no == 1) {
            if (line != kTableHeader) {
                throw Error(ErrorCode::MalformedHeader, "report", "unexpected table header");
            }
            continue;
        }
        if (line.empty()) continue;
        auto f = detail::split_fields(line, ',');
        auto bad = [&] { return Error(ErrorCode::UnparseableRow, "report", "table row " + std::to_string(line_no)); };
        if (f.size() != 7) throw bad();
        auto num = [&](std::string_view s) {
            auto v = detail::parse_double(s);
            if (!v) throw bad();
            return *v;
        };
        auto kind = parse_forecast_kind(f[3]);
        if (!kind) throw bad();
        rows.push_back({static_cast<std::size_t>(num(f[0])), num(f[1]), static_cast<std::size_t>(num(f[2])), *kind,
                        num(f[4]), num(f[5]), num(f[6])});
    }
    return rows;
}

[[nodiscard]] inline nlohmann::ordered_json metadata_json(const ExperimentResult& result, std::string_view dataset) {
    nlohmann::ordered_json j;
    j["dataset"] = std::string(dataset);
    j["kappa_hat"] = result.kappa.kappa_hat;
    j["z_bar"] = result.kappa.z_bar;
    j["t_oos"] = result.kappa.t_oos;
    j["seed"] = result.config.seed;
    j["levels"] = result.config.levels;
    j["reps"] = result.config.reps;
    j["split_fraction"] = result.config.split_fraction;
    auto kinds = nlohmann::ordered_json::array();
    for (auto k : result.config.kinds) kinds.push_back(std::string(to_string(k)));
    j["kinds"] = kinds;
    j["lambda_window"] = std::string(to_string(result.config.lambda_window));
    j["demean"] = result.config.demean;
    j["garch"] = {{"omega", result.garch.omega}, {"alpha", result.garch.alpha}, {"beta", result.garch.beta}};
    return j;
}

[[nodiscard]] inline std::string render_metadata(const ExperimentResult& result, std::string_view dataset) {
    return metadata_json(result, dataset).dump(2) + "\n";
}

/// Sibling metadata path for a table: "runs/spx.csv" -> "runs/spx.meta.json".
[[nodiscard]] inline std::filesystem::path metadata_path_for(const std::filesystem::path& table) {
    auto p = table;
    p.replace_extension(".meta.json");
    return p;
}

/// Writes the table and its sibling metadata document. Returns the table's byte count.
inline std::size_t write_table(const ExperimentResult& result, const std::filesystem::path& destination,
                               std::string_view dataset = "dataset") {
    if (result.points.empty()) {
        throw Error(ErrorCode::EmptyResult, "report", "result has no points");
    }
    const auto table = render_table(result);
    const auto meta = render_metadata(result, dataset);
    const auto n = atomic_write(destination, table);
    atomic_write(metadata_path_for(destination), meta);
    return n;
}

/// Pixel geometry of the chart: data coordinates map linearly into the plot box.
struct PlotFrame {
    double width = 820.0;
    double height = 560.0;
    double left = 80.0;
    double right = 200.0;
    double top = 60.0;
    double bottom = 70.0;
    double x_min = 0.5;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    [[nodiscard]] double px(double x) const { return left + (x - x_min) / (x_max - x_min) * (width - left - right); }
    [[nodiscard]] double py(double y) const {
        return top + (y_max - y) / (y_max - y_min) * (height - top - bottom);
    }
};

[[nodiscard]] inline PlotFrame make_plot_frame(const ExperimentResult& result) {
    PlotFrame f;
    double da_lo = 0.5;
    double lo = 0.0;
    double hi = result.kappa.kappa_hat;
    for (const auto& p : result.points) {
        da_lo = std::min(da_lo, p.da);
        lo = std::min(lo, p.r2_oos);
        hi = std::max(hi, p.r2_oos);
    }
    f.x_min = std::floor(da_lo * 20.0 + 1e-9) / 20.0;
    const double pad = 0.05 * (hi - lo > 0.0 ? hi - lo : 1.0);
    f.y_min = lo - pad;
    f.y_max = hi + pad;
    return f;
}

namespace detail {

[[nodiscard]] inline double nice_step(double span, int target_ticks) {
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

struct MarkerStyle {
    const char* color;
    const char* label;
};

[[nodiscard]] inline MarkerStyle marker_style(ForecastKind k) {
    switch (k) {
    case ForecastKind::Type1: return {"#1f77b4", "Type 1 (OLS scaling)"};
    case ForecastKind::Type2: return {"#d62728", "Type 2 (constant scaling)"};
    case ForecastKind::Type3: return {"#2ca02c", "Type 3 (timing weights)"};
    }
    return {"#000000", "?"};
}

// Path data centered at (x, y): the leading "M x,y" is the marker's anchor.
[[nodiscard]] inline std::string marker_path(ForecastKind k, double x, double y) {
    std::string d = "M" + fmt_px(x) + "," + fmt_px(y);
    switch (k) {
    case ForecastKind::Type1: d += " m-3.5,0 a3.5,3.5 0 1,0 7,0 a3.5,3.5 0 1,0 -7,0z"; break;
    case ForecastKind::Type2: d += " m-3,-3 h6 v6 h-6z"; break;
    case ForecastKind::Type3: d += " m0,-4.5 l4,7 h-8z"; break;
    }
    return d;
}

} // namespace detail

/// Scatter of (DA, R^2) per forecast kind over the quadratic benchmark curve,
/// as a standalone SVG document.
[[nodiscard]] inline std::string render_svg(const ExperimentResult& result, std::string_view dataset = "dataset") {
    if (result.points.empty()) {
        throw Error(ErrorCode::EmptyResult, "report", "nothing to plot");
    }
    using detail::fmt_px;
    const auto f = make_plot_frame(result);
    const double kappa = result.kappa.kappa_hat;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
       << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"Helvetica, Arial, sans-serif\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << f.width << "\" height=\"" << f.height << "\" fill=\"#ffffff\"/>\n";

    char title[256];
    std::snprintf(title, sizeof title, "%s: out-of-sample R\xC2\xB2 vs directional accuracy (\xCE\xBA\xCC\x82 = %.4f)",
                  detail::xml_escape(dataset).c_str(), kappa);
    os << "<text class=\"title\" x=\"" << fmt_px(f.width / 2.0) << "\" y=\"32\" text-anchor=\"middle\" font-size=\"16\">"
       << title << "</text>\n";

    const double x0 = f.px(f.x_min);
    const double x1 = f.px(f.x_max);
    const double y0 = f.py(f.y_min);
    const double y1 = f.py(f.y_max);
    os << "<g class=\"axes\" stroke=\"#333333\" stroke-width=\"1\" fill=\"none\">\n"
       << "<rect x=\"" << fmt_px(x0) << "\" y=\"" << fmt_px(y1) << "\" width=\"" << fmt_px(x1 - x0) << "\" height=\""
       << fmt_px(y0 - y1) << "\"/>\n</g>\n";

    os << "<g class=\"ticks\" font-size=\"11\" fill=\"#333333\">\n";
    for (int k = 0;; ++k) {
        const double x = std::ceil(f.x_min * 20.0 - 1e-9) / 20.0 + 0.05 * k;
        if (x > f.x_max + 1e-9) break;
        char label[16];
        std::snprintf(label, sizeof label, "%.2f", x);
        os << "<line x1=\"" << fmt_px(f.px(x)) << "\" y1=\"" << fmt_px(y0) << "\" x2=\"" << fmt_px(f.px(x))
           << "\" y2=\"" << fmt_px(y0 + 5) << "\" stroke=\"#333333\"/>"
           << "<text x=\"" << fmt_px(f.px(x)) << "\" y=\"" << fmt_px(y0 + 18) << "\" text-anchor=\"middle\">" << label
           << "</text>\n";
    }
    const double ystep = detail::nice_step(f.y_max - f.y_min, 6);
    for (double y = std::ceil(f.y_min / ystep) * ystep; y <= f.y_max + 1e-12; y += ystep) {
        const double yy = std::abs(y) < ystep * 1e-6 ? 0.0 : y;
        char label[16];
        std::snprintf(label, sizeof label, "%.2f", yy);
        os << "<line x1=\"" << fmt_px(x0 - 5) << "\" y1=\"" << fmt_px(f.py(yy)) << "\" x2=\"" << fmt_px(x0)
           << "\" y2=\"" << fmt_px(f.py(yy)) << "\" stroke=\"#333333\"/>"
           << "<text x=\"" << fmt_px(x0 - 8) << "\" y=\"" << fmt_px(f.py(yy) + 4) << "\" text-anchor=\"end\">" << label
           << "</text>\n";
    }
    os << "</g>\n";
    os << "<text class=\"xlabel\" x=\"" << fmt_px((x0 + x1) / 2.0) << "\" y=\"" << fmt_px(f.height - 22)
       << "\" text-anchor=\"middle\" font-size=\"13\">Directional accuracy</text>\n"
       << "<text class=\"ylabel\" x=\"22\" y=\"" << fmt_px((y0 + y1) / 2.0)
       << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 22 " << fmt_px((y0 + y1) / 2.0)
       << ")\">Out-of-sample R\xC2\xB2</text>\n";

    os << "<line class=\"zero\" x1=\"" << fmt_px(x0) << "\" y1=\"" << fmt_px(f.py(0.0)) << "\" x2=\"" << fmt_px(x1)
       << "\" y2=\"" << fmt_px(f.py(0.0)) << "\" stroke=\"#777777\" stroke-dasharray=\"4 3\"/>\n";

    os << "<g class=\"points\" fill-opacity=\"0.55\" stroke-width=\"0.6\">\n";
    for (const auto& p : result.points) {
        const auto style = detail::marker_style(p.kind);
        os << "<path class=\"pt " << to_string(p.kind) << "\" fill=\"" << style.color << "\" stroke=\"" << style.color
           << "\" d=\"" << detail::marker_path(p.kind, f.px(p.da), f.py(p.r2_oos)) << "\"/>\n";
    }
    os << "</g>\n";

    // The curve always has vertices at DA = 0.5 and DA = 1.0.
    std::vector<double> xs;
    constexpr int samples = 200;
    for (int k = 0; k <= samples; ++k) {
        xs.push_back(f.x_min + (f.x_max - f.x_min) * k / samples);
    }
    xs.push_back(0.5);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), xs.end());
    os << "<polyline class=\"curve\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.6\" points=\"";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) os << ' ';
        os << fmt_px(f.px(xs[k])) << ',' << fmt_px(f.py(theoretical_r2(xs[k], kappa)));
    }
    os << "\"/>\n";

    const double lx = x1 + 16.0;
    double ly = f.top + 12.0;
    os << "<g class=\"legend\" font-size=\"12\">\n";
    for (auto k : {ForecastKind::Type1, ForecastKind::Type2, ForecastKind::Type3}) {
        const auto style = detail::marker_style(k);
        os << "<path fill=\"" << style.color << "\" stroke=\"" << style.color << "\" d=\""
           << detail::marker_path(k, lx + 6, ly) << "\"/>"
           << "<text x=\"" << fmt_px(lx + 18) << "\" y=\"" << fmt_px(ly + 4) << "\">" << style.label << "</text>\n";
        ly += 20.0;
    }
    os << "<line x1=\"" << fmt_px(lx) << "\" y1=\"" << fmt_px(ly) << "\" x2=\"" << fmt_px(lx + 12) << "\" y2=\""
       << fmt_px(ly) << "\" stroke=\"#000000\" stroke-width=\"1.6\"/>"
       << "<text x=\"" << fmt_px(lx + 18) << "\" y=\"" << fmt_px(ly + 4)
       << "\">\xCE\xBA\xCC\x82\xC2\xB7(2DA\xE2\x88\x92" "1)\xC2\xB2</text>\n";
    os << "</g>\n</svg>\n";
    return os.str();
}

inline std::size_t render_plot(const ExperimentResult& result, const std::filesystem::path& destination,
                               std::string_view dataset = "dataset") {
    return atomic_write(destination, render_svg(result, dataset));
}

} // namespace qlink
