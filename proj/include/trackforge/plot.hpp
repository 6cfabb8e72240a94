#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trackforge/trainer.hpp"

namespace trackforge {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double stroke_width = 1.5;
  double opacity = 1.0;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::optional<double> y_min;
  std::optional<double> y_max;
  int width = 800;
  int height = 480;
};

std::string render_line_chart(const std::vector<PlotSeries>& series, const ChartOptions& options);

// Trailing moving average; entry i averages the last min(i + 1, window)
// values.
std::vector<double> moving_average(const std::vector<double>& values, int window);

// Writes reward_curve.svg and success_rate.svg into out_dir.
void write_training_plots(const std::vector<MetricsRow>& rows, const std::filesystem::path& out_dir);

std::string svg_escape(const std::string& text);

}  // namespace trackforge
