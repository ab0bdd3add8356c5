#pragma once

#include "kochfem/field.hpp"

#include <array>
#include <functional>
#include <string>

namespace kochfem::experiments {

/// Target ||B||_inf for Omega_0 .. Omega_5.
inline constexpr std::array<double, 6> kReferenceLinfB = {17.946, 26.688, 35.575, 47.124, 63.504, 85.43};

/// Omega_0 is the circle of radius 1/2 (as a 256-gon) about the snowflake centroid.
DomainSpec table_domain(int level);

/// Pinned discretization: h = 3^-n / 4, eta = 0.30, sigma = 1, R = 0.5.
GradingParams pinned_grading(int level);

/// Exact boundary length of the domain: pi for the circle, 3 (4/3)^n otherwise.
double exact_boundary_length(int level);

/// Boundary length of the modelled domain: circumference for the circle,
/// polygon perimeter for snowflakes.
double domain_boundary_length(const DomainSpec& spec, const PrefractalBoundary& b);

struct Table1Row {
  std::string domain;
  int level = 0;
  double linf_b = 0.0;
  double ell = 0.0;
  double ell_exact = 0.0;
  double reference_linf = 0.0;
  double deviation = 0.0;  // (linf_b - reference) / reference
  double seconds = 0.0;
  FieldReport report;
};

Table1Row run_table1_row(int level, const CgOptions& options = {});
std::vector<Table1Row> run_table1(int max_n, const std::function<void(const Table1Row&)>& on_row = {},
                                  const CgOptions& options = {});

struct ConvergenceStudy {
  ConvergenceRecord record;
  ObservedOrders orders;
  std::vector<std::size_t> triangles;
  std::vector<std::uint8_t> grisvard_pass;  // graded ladders only
  std::size_t reference_triangles = 0;
};

/// Error ladder on snowflake level n against a reference two uniform
/// refinements beyond the finest mesh. Graded: h_k = 3^-n / 2^k through the
/// Grisvard size field. Uniform: repeated uniform refinement of the lattice
/// mesh, h_k = max diameter.
ConvergenceStudy run_convergence(int level, int levels, bool graded, const CgOptions& options = {});

/// Unit square, u = sin(pi x1) sin(pi x2), errors against the closed form
/// over `levels` uniform refinements of the 2-triangle base.
ConvergenceStudy run_manufactured(int levels, int first_level = 2, const CgOptions& options = {});

/// Fixed resolution shared by every level of the Mosco proxy.
GradingParams mosco_grading();

/// ||u_n - u_{n+1}||_{L2(Omega_n)} for n = 1 .. max_n - 1.
std::vector<double> run_mosco(int max_n, const CgOptions& options = {});

}  // namespace kochfem::experiments
