#pragma once

#include "kochfem/fem.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace kochfem {

/// Everything a `solve` run needs. Populated from a flat `key = value` file
/// (optional `[section]` headers prefix the keys) and CLI overrides.
///
///   [domain]   kind = snowflake | circle | square, level, radius, segments, center = "x1, x2"
///   [grading]  h, eta, sigma, R, graded = true | false
///   [source]   amplitude, width, center = "x1, x2"
///   [physics]  mu
///   [solver]   tol, max_iter
///   [output]   dir, formats = "csv, vtk"
struct RunConfig {
  DomainSpec domain = DomainSpec::snowflake(2);
  GradingParams grading;
  bool h_given = false;  // otherwise default_mesh_size(domain)
  double source_amplitude = 1e5;
  double source_width = 5.0;
  std::optional<Point2> source_center;  // defaults to the domain center
  double mu = 1.0;
  CgOptions solver;
  std::string out_dir = "out";
  bool write_csv = true;
  bool write_vtk = true;

  /// Applies one key; throws ConfigError on unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  /// Range checks of every field; throws ConfigError.
  void validate() const;

  GradingParams effective_grading() const;
  SourceField source() const;
  int level() const;
};

/// Pinned default: 3^-n / 4 on snowflake level n, 1/4 on the circle, 1/8 on the square.
double default_mesh_size(const DomainSpec& spec);

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace kochfem
