#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kochfem {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2 = Vec2<double>;
using VectorX = Eigen::VectorXd;

/// z-component of the planar cross product.
template <typename DerivedA, typename DerivedB>
inline typename DerivedA::Scalar cross2(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Twice the signed area of (a, b, c); positive when counterclockwise.
template <typename DA, typename DB, typename DC>
inline typename DA::Scalar orient2(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                                   const Eigen::MatrixBase<DC>& c) {
  return cross2(b - a, c - a);
}

// Error categories map onto CLI exit codes: ConfigError -> 2, everything else -> 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct MeshError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

/// Worker count used by the row/element parallel loops. Defaults to 1.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count, so per-index work is reproducible.
template <typename Body>
void parallel_for(std::size_t n, Body&& body);

}  // namespace kochfem

#include "kochfem/detail/parallel.hpp"
