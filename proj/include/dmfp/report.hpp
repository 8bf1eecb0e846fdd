#pragma once

#include <string>
#include <vector>

#include "dmfp/harness.hpp"

namespace dmfp {

/// One plotted series; rendered as a single polyline (dashed when `dashed`),
/// optionally with circle markers at the points.
struct SvgSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
    bool markers = false;
};

/// Writes a self-contained SVG line plot (no external references): axes with
/// tick labels, one polyline per series, and a legend. An empty series list
/// yields a valid plot with axes only.
void render_svg(const std::vector<SvgSeries>& series, const std::string& path,
                const std::string& title = "", const std::string& x_label = "",
                const std::string& y_label = "");

/// Writes trajectory.csv, qq.csv, summary.json and the SVG plots into `dir`.
/// trajectory.csv header:
///   iteration,s,a,emp_mean,emp_var,theory_mean,theory_var,rel_err_mean,rel_err_var
/// with iteration -1 denoting the converged slot; numbers are printed with 17
/// significant digits so a re-parse reproduces the in-memory values exactly.
void write_report(const ComparisonReport& report, const std::string& dir);

/// Row of trajectory.csv, parsed back.
struct TrajectoryRow {
    int iteration = 0;
    int s = 0, a = 0;
    double emp_mean = 0, emp_var = 0, theory_mean = 0, theory_var = 0;
    double rel_err_mean = 0, rel_err_var = 0;  // NaN where not computed
};

std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path);

/// Run provenance: subcommand, config digest, seed, version, worker count,
/// wall time. Every subcommand writes one next to its outputs.
void write_manifest(const std::string& dir, const std::string& subcommand,
                    const std::string& config_digest, std::uint64_t seed, int workers,
                    double wall_seconds);

/// 17-significant-digit formatting used for all numeric CSV output.
std::string format_double(double v);

}  // namespace dmfp
