#pragma once

#include "doctest.h"
#include "uhf/oracle.hpp"
#include "uhf/random.hpp"
#include "uhf/weyl.hpp"

namespace testutil {

using namespace uhf;

inline ParamsPtr qubit(int d = 1) { return AlgebraParams::make(2, d); }

inline LocalOperator sx(const ParamsPtr& p, std::int64_t s = 0) {
  return LocalOperator::site_op(p, Site::along(0, s), 1, 0);
}
inline LocalOperator sz(const ParamsPtr& p, std::int64_t s = 0) {
  return LocalOperator::site_op(p, Site::along(0, s), 0, 1);
}
inline LocalOperator one(const ParamsPtr& p) { return LocalOperator::identity(p); }

/// Max entrywise difference of two dense matrices.
inline double mdiff(const oracle::Matrix& a, const oracle::Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Random x with nonempty support.
inline LocalOperator nontrivial(Rng& rng, const ParamsPtr& p, const std::vector<Site>& sites, int terms) {
  LocalOperator x(p);
  while (x.support().empty()) x = random_operator(rng, p, sites, terms);
  return x;
}

}  // namespace testutil
