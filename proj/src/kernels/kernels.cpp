#include "uhf/kernels.hpp"

#include <omp.h>

namespace uhf::kernels {

void set_jobs(int j) {
  if (j > 0) omp_set_num_threads(j);
}

int max_jobs() { return omp_get_max_threads(); }

Eigen::MatrixXcd build_columns(Eigen::Index rows, Eigen::Index cols,
                               const std::function<void(Eigen::Index, Eigen::VectorXcd&)>& fill,
                               Exec exec) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rows, cols);
  if (exec == Exec::serial) {
    Eigen::VectorXcd col(rows);
    for (Eigen::Index j = 0; j < cols; ++j) {
      col.setZero();
      fill(j, col);
      out.col(j) = col;
    }
    return out;
  }
#pragma omp parallel
  {
    Eigen::VectorXcd col(rows);
#pragma omp for schedule(dynamic)
    for (Eigen::Index j = 0; j < cols; ++j) {
      col.setZero();
      fill(j, col);
      out.col(j) = col;
    }
  }
  return out;
}

namespace {

// Column c of B^T G + G B + sum_j Dd_j^T G D_j.
void pair_rhs_column(const SparseMatrix& B, const std::vector<SparseMatrix>& Dd,
                     const std::vector<SparseMatrix>& D, const Eigen::MatrixXcd& G,
                     Eigen::Index c, Eigen::VectorXcd& tmp, Eigen::MatrixXcd& out) {
  auto oc = out.col(c);
  oc.noalias() = B.transpose() * G.col(c);
  for (SparseMatrix::InnerIterator it(B, c); it; ++it) oc += it.value() * G.col(it.row());
  for (std::size_t j = 0; j < D.size(); ++j) {
    tmp.setZero();
    bool any = false;
    for (SparseMatrix::InnerIterator it(D[j], c); it; ++it) {
      tmp += it.value() * G.col(it.row());
      any = true;
    }
    if (any) oc += Dd[j].transpose() * tmp;
  }
}

}  // namespace

void pair_rhs(const SparseMatrix& B, const std::vector<SparseMatrix>& Dd,
              const std::vector<SparseMatrix>& D, const Eigen::MatrixXcd& G,
              Eigen::MatrixXcd& out, Exec exec) {
  const Eigen::Index n = G.cols();
  out.resize(G.rows(), n);
  if (exec == Exec::serial) {
    Eigen::VectorXcd tmp(G.rows());
    for (Eigen::Index c = 0; c < n; ++c) pair_rhs_column(B, Dd, D, G, c, tmp, out);
    return;
  }
#pragma omp parallel
  {
    Eigen::VectorXcd tmp(G.rows());
#pragma omp for schedule(static)
    for (Eigen::Index c = 0; c < n; ++c) pair_rhs_column(B, Dd, D, G, c, tmp, out);
  }
}

}  // namespace uhf::kernels
