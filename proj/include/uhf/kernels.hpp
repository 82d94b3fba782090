#pragma once

// Hot loops with an OpenMP variant and a serial reference. Both variants
// split work into the same independent units (columns, labels) and write
// each result exactly once, so their outputs are bit-identical.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace uhf::kernels {

enum class Exec { serial, parallel };

using SparseMatrix = Eigen::SparseMatrix<std::complex<double>>;

/// Sets the OpenMP thread count; j <= 0 leaves the runtime default.
void set_jobs(int j);
int max_jobs();

/// Fills an rows x cols matrix column by column: fill(j, column).
Eigen::MatrixXcd build_columns(Eigen::Index rows, Eigen::Index cols,
                               const std::function<void(Eigen::Index, Eigen::VectorXcd&)>& fill,
                               Exec exec);

/// out[i] = fn(i) for i < n.
template <class T>
std::vector<T> map_indexed(std::size_t n, const std::function<T(std::size_t)>& fn, Exec exec);

/// out = B^T G + G B + sum_j Dd_j^T G D_j, one output column per work unit.
void pair_rhs(const SparseMatrix& B, const std::vector<SparseMatrix>& Dd,
              const std::vector<SparseMatrix>& D, const Eigen::MatrixXcd& G,
              Eigen::MatrixXcd& out, Exec exec);

// ---- template implementation ----

template <class T>
std::vector<T> map_indexed(std::size_t n, const std::function<T(std::size_t)>& fn, Exec exec) {
  std::vector<T> out;
  out.reserve(n);
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
  }
  std::vector<std::unique_ptr<T>> slots(n);
  const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < nn; ++i) {
    slots[static_cast<std::size_t>(i)] = std::make_unique<T>(fn(static_cast<std::size_t>(i)));
  }
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace uhf::kernels
