#include "dmfp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "dmfp/errors.hpp"
#include "json.hpp"

namespace dmfp {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
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

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void render_svg(const std::vector<SvgSeries>& series, const std::string& path, const std::string& title,
                const std::string& x_label, const std::string& y_label) {
    const double width = 640.0;
    const double height = 480.0;
    const double ml = 70.0, mr = 20.0, mt = title.empty() ? 20.0 : 40.0, mb = 50.0;
    const double plot_w = width - ml - mr;
    const double plot_h = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double xpad = 0.04 * (xmax - xmin);
    const double ypad = 0.06 * (ymax - ymin);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double v) { return mt + plot_h - (v - ymin) / (ymax - ymin) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    if (!title.empty())
        svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"16\">"
            << xml_escape(title) << "</text>\n";

    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w << "\" y2=\""
        << mt + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + plot_h
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        const double px = sx(fx);
        const double py = sy(fy);
        svg << "<line x1=\"" << px << "\" y1=\"" << mt + plot_h << "\" x2=\"" << px << "\" y2=\""
            << mt + plot_h + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px << "\" y=\"" << mt + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(fx)
            << "</text>\n";
        svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(fy)
            << "</text>\n";
    }
    if (!x_label.empty())
        svg << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 12
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
            << xml_escape(x_label) << "</text>\n";
    if (!y_label.empty())
        svg << "<text x=\"16\" y=\"" << mt + plot_h / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 "
               "16 "
            << mt + plot_h / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

    for (size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
        svg << " points=\"";
        for (size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (k) svg << ' ';
            svg << sx(s.x[k]) << ',' << sy(s.y[k]);
        }
        svg << "\"/>\n";
        if (s.markers) {
            for (size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
                svg << "<circle cx=\"" << sx(s.x[k]) << "\" cy=\"" << sy(s.y[k]) << "\" r=\"2.5\" fill=\""
                    << color << "\"/>\n";
        }
        svg << "<text x=\"" << ml + plot_w - 8 << "\" y=\"" << mt + 16 + 16 * static_cast<double>(i)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
            << xml_escape(s.name) << "</text>\n";
    }
    svg << "</svg>\n";

    auto out = open_out(path);
    out << svg.str();
}

void write_report(const ComparisonReport& report, const std::string& dir) {
    fs::create_directories(dir);

    {
        auto out = open_out((fs::path(dir) / "trajectory.csv").string());
        out << "iteration,s,a,emp_mean,emp_var,theory_mean,theory_var,rel_err_mean,rel_err_var\n";
        const int A = report.num_actions;
        for (const auto& snap : report.snapshots) {
            for (int s = 0; s < report.num_states; ++s) {
                for (int a = 0; a < A; ++a) {
                    const size_t i = static_cast<size_t>(s) * A + a;
                    out << snap.iteration << ',' << s << ',' << a << ',' << format_double(snap.emp_mean[i])
                        << ',' << format_double(snap.emp_var[i]) << ','
                        << format_double(snap.theory_mean[i]) << ',' << format_double(snap.theory_var[i])
                        << ',' << format_double(snap.rel_err_mean[i]) << ','
                        << format_double(snap.rel_err_var[i]) << '\n';
                }
            }
        }
    }

    {
        auto out = open_out((fs::path(dir) / "qq.csv").string());
        out << "theoretical_q,sample_q\n";
        for (const auto& [tq, sq] : report.qq)
            out << format_double(tq) << ',' << format_double(sq) << '\n';
    }

    {
        nlohmann::json j;
        j["num_states"] = report.num_states;
        j["num_actions"] = report.num_actions;
        j["replicates"] = report.replicates;
        j["seed"] = report.seed;
        j["config_digest"] = report.config_digest;
        j["wall_seconds"] = report.wall_seconds;
        j["median_abs_correlation"] = report.median_abs_correlation;
        auto& snaps = j["snapshots"] = nlohmann::json::array();
        for (const auto& snap : report.snapshots) {
            nlohmann::json e;
            e["iteration"] = snap.iteration;
            e["median_rel_err_mean"] = snap.median_rel_err_mean;
            e["p90_rel_err_mean"] = snap.p90_rel_err_mean;
            e["max_rel_err_mean"] = snap.max_rel_err_mean;
            e["median_rel_err_var"] = snap.median_rel_err_var;
            e["p90_rel_err_var"] = snap.p90_rel_err_var;
            e["max_rel_err_var"] = snap.max_rel_err_var;
            snaps.push_back(std::move(e));
        }
        auto& ks = j["ks"] = nlohmann::json::array();
        for (const auto& k : report.ks)
            ks.push_back({{"s", k.s}, {"a", k.a}, {"statistic", k.statistic}, {"p_value", k.p_value}});
        auto& corr = j["correlations"] = nlohmann::json::array();
        for (const auto& c : report.correlations)
            corr.push_back(
                {{"s1", c.s1}, {"a1", c.a1}, {"s2", c.s2}, {"a2", c.a2}, {"corr", c.corr}});
        auto out = open_out((fs::path(dir) / "summary.json").string());
        out << j.dump(2) << '\n';
    }

    // figure-style plots for the first retained pair: the converged slot is
    // excluded, series share the snapshot iterations on the x axis
    {
        std::vector<double> iters;
        std::vector<double> emp_mean, th_mean, emp_var, th_var;
        for (const auto& snap : report.snapshots) {
            if (snap.iteration < 0 || snap.emp_mean.empty()) continue;
            iters.push_back(snap.iteration);
            emp_mean.push_back(snap.emp_mean.front());
            th_mean.push_back(snap.theory_mean.front());
            emp_var.push_back(snap.emp_var.front());
            th_var.push_back(snap.theory_var.front());
        }
        render_svg({{"empirical", iters, emp_mean, false, true}, {"theory", iters, th_mean, true, false}},
                   (fs::path(dir) / "mean_trajectory.svg").string(), "Q-value mean vs iteration",
                   "iteration", "mean");
        render_svg({{"empirical", iters, emp_var, false, true}, {"theory", iters, th_var, true, false}},
                   (fs::path(dir) / "var_trajectory.svg").string(), "Q-value variance vs iteration",
                   "iteration", "variance");
    }
    if (!report.qq.empty()) {
        std::vector<double> tq, sq;
        for (const auto& [t, s] : report.qq) {
            tq.push_back(t);
            sq.push_back(s);
        }
        const double lo = *std::min_element(tq.begin(), tq.end());
        const double hi = *std::max_element(tq.begin(), tq.end());
        render_svg({{"samples", tq, sq, false, true}, {"diagonal", {lo, hi}, {lo, hi}, true, false}},
                   (fs::path(dir) / "qq.svg").string(), "Normal Q-Q plot", "normal quantile",
                   "sample quantile");
    }
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty trajectory csv: " + path);
    std::vector<TrajectoryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 9) throw io_error("bad trajectory csv row in " + path);
        TrajectoryRow r;
        r.iteration = std::stoi(cells[0]);
        r.s = std::stoi(cells[1]);
        r.a = std::stoi(cells[2]);
        r.emp_mean = std::stod(cells[3]);
        r.emp_var = std::stod(cells[4]);
        r.theory_mean = std::stod(cells[5]);
        r.theory_var = std::stod(cells[6]);
        r.rel_err_mean = std::stod(cells[7]);
        r.rel_err_var = std::stod(cells[8]);
        rows.push_back(r);
    }
    return rows;
}

void write_manifest(const std::string& dir, const std::string& subcommand,
                    const std::string& config_digest, std::uint64_t seed, int workers,
                    double wall_seconds) {
    fs::create_directories(dir);
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["config_digest"] = config_digest;
    j["seed"] = seed;
    j["version"] = "0.1.0";
    j["workers"] = workers;
    j["wall_seconds"] = wall_seconds;
    auto out = open_out((fs::path(dir) / "manifest.json").string());
    out << j.dump(2) << '\n';
}

}  // namespace dmfp
