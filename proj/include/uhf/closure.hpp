#pragma once

// Finite invariant subspaces spanned by the orbit of seed labels under a set
// of linear maps, truncated to a window. Mass mapped outside the window is
// recorded per column as leakage instead of being silently discarded.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <vector>

#include "uhf/kernels.hpp"
#include "uhf/weyl.hpp"

namespace uhf {

using LabelMap = std::function<LocalOperator(const WeylLabel&)>;
using LabelFilter = std::function<bool(const WeylLabel&)>;

struct ClosureSystem {
  std::vector<WeylLabel> basis;
  std::map<WeylLabel, Eigen::Index> index;
  /// Per map: column b holds the in-window image of basis[b].
  std::vector<kernels::SparseMatrix> matrices;
  /// Per map: l1 coefficient mass of the image of basis[b] outside the window.
  std::vector<Eigen::VectorXd> leakage;

  Eigen::Index size() const { return static_cast<Eigen::Index>(basis.size()); }
  Eigen::Index find(const WeylLabel& g) const;
  Eigen::VectorXcd coordinates(const LocalOperator& x) const;
  LocalOperator to_operator(const Eigen::VectorXcd& v, const ParamsPtr& params) const;
};

/// Breadth-first closure of `seeds` under `maps`; labels rejected by `in_window` leak.
/// Throws SizeError once the basis exceeds max_size.
ClosureSystem build_closure(const std::vector<WeylLabel>& seeds, const std::vector<LabelMap>& maps,
                            const LabelFilter& in_window, std::size_t max_size,
                            kernels::Exec exec = kernels::Exec::parallel);

}  // namespace uhf
