#pragma once

#include <optional>
#include <string>

#include "tneb/filtering.hpp"
#include "tneb/mixture.hpp"

namespace tneb {

struct NebConfig {
  std::size_t n_path_points = 1024;
  std::size_t n_steps = 100;
  // Adam step size; when unset it is step_scale times the initial segment length.
  std::optional<double> step_size;
  double step_scale = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool keep_best = true;  // return the path with the highest bottleneck seen

  void validate() const;
  std::string fingerprint() const;
};

// A polyline between two component means with the log-density at every point.
struct DensityPath {
  std::size_t a = 0;
  std::size_t b = 0;
  Matrix points;         // P x d, first row = mean a, last row = mean b
  Vector log_densities;  // P
  double bottleneck_log_density = 0.0;
  std::size_t argmin_index = 0;
  std::size_t best_step = 0;  // optimisation step the returned path came from
};

// Maximum-density path between surviving components a and b: Adam ascent on
// the log-density of every interior point, followed by uniform arc-length
// respacing after each step. Endpoints stay fixed. The result is independent
// of the argument order up to reversal.
DensityPath optimize_path(const FilteredModel& m, std::size_t a, std::size_t b, const NebConfig& cfg);
DensityPath optimize_path(const MixtureDensity& density, const Vector& start, const Vector& end, const NebConfig& cfg);

// optimize_path for components a and b of `means` (K x d) with a prebuilt density.
DensityPath optimize_component_path(const MixtureDensity& density, const Matrix& means, std::size_t a, std::size_t b,
                                    const NebConfig& cfg);

// Minimum log-density over P uniform samples of the segment between the means.
double straight_line_bottleneck(const FilteredModel& m, std::size_t a, std::size_t b, std::size_t n_points);

// Resamples a polyline (points as columns) at uniform arc length with the same
// number of points. Endpoints are preserved exactly.
Matrix respace_uniform(const Matrix& cols);

// Writes the path as CSV: x0..x{d-1},log_density.
void save_path_csv(const DensityPath& path, const std::string& file);

}  // namespace tneb
