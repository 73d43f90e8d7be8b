#pragma once

#include <filesystem>
#include <string>

#include "deepex/harness/metrics.hpp"

namespace deepex::harness {

/// Learning-curve SVG: mean life-cycle reward per life-cycle index, one
/// polyline per agent with a shaded +-standard-error band and a legend.
/// Throws ValidationError when there is nothing to plot.
std::string render_learning_curve(const MetricsTable& table, const std::string& title = "");

void emit_plot(const std::filesystem::path& records_csv, const std::filesystem::path& svg_out);

}  // namespace deepex::harness
