#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tneb/common.hpp"

namespace tneb {

// An n x d sample matrix with optional ground truth.
struct PointSet {
  Matrix points;                 // one sample per row
  std::optional<Labels> labels;  // primary ground truth
  std::string name;
  // Optional coarse level of a hierarchical ground truth: label_groups[l] is the
  // super-group of primary label l.
  std::vector<int> label_groups;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
  bool has_labels() const { return labels.has_value(); }

  // Number of distinct label values (0 without labels).
  std::size_t n_label_values() const;

  // Primary labels mapped through label_groups.
  Labels group_labels() const;

  // Throws ValidationError when the invariants do not hold.
  void validate() const;
};

enum class DatasetKind {
  noisy_circles,
  noisy_moons,
  varied_density,
  anisotropic_blobs,
  gaussian_blobs,
  hierarchical_gaussians,
  hd_gaussian_blobs,
  hd_student_blobs,
};

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);
bool is_two_dimensional(DatasetKind kind);

// Generator parameters. Optional fields fall back to per-kind defaults, which
// follow the conventional scikit-learn toy suite for the 2D kinds.
struct DatasetSpec {
  DatasetKind kind = DatasetKind::gaussian_blobs;
  std::size_t n_points = 1000;
  std::size_t dimension = 2;
  std::size_t n_classes = 0;  // 0 selects the kind's default
  std::uint64_t seed = 0;

  std::optional<double> noise;                  // moons, circles: coordinate noise std
  double circle_factor = 0.5;                   // inner/outer radius ratio
  std::optional<std::vector<double>> blob_std;  // per-class std for blob kinds
  std::optional<std::vector<std::vector<double>>> centers;
  std::array<double, 4> anisotropic_transform{0.6, -0.6, -0.4, 0.8};  // row-major 2x2
  std::optional<std::vector<double>> class_weights;

  // hierarchical_gaussians
  double group_radius = 10.0;
  double pair_separation = 5.0;
  double hierarchical_std = 0.5;

  // hd_* kinds: centers on a sphere with random full covariances.
  double sphere_radius = 7.0;
  double min_center_separation = 6.0;
  double scale_min = 0.5;
  double scale_max = 1.5;
  double student_df = 4.0;
  // Optional curved spine per class: points are spread uniformly along a
  // smooth random walk of spine_segments steps of length spine_step through
  // the class center instead of around the center alone.
  std::size_t spine_segments = 0;
  double spine_step = 3.0;
  double spine_bend = 0.5;  // direction noise per step, relative to the unit heading

  std::size_t resolved_n_classes() const;
  void validate() const;
};

PointSet generate(const DatasetSpec& spec);

PointSet load_csv(const std::string& path, const std::optional<std::string>& label_column = std::nullopt);
void save_csv(const PointSet& ps, const std::string& path);
// Header x0..x{d-1}[,label], shortest round-trip numbers.
std::string to_csv(const PointSet& ps);

// Reads an integer label column (named, or the only/last column) from a CSV file.
Labels load_labels_csv(const std::string& path, const std::optional<std::string>& column = std::nullopt);
void save_labels_csv(const Labels& labels, const std::string& path, const std::string& column = "label");
std::string labels_to_csv(const Labels& labels, const std::string& column = "label");

void write_text(const std::string& text, const std::string& path);

// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace tneb
