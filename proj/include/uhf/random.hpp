#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "uhf/weyl.hpp"

namespace uhf {

using Rng = std::mt19937_64;

/// Random label supported inside `sites` (each site active with probability 1/2, exponents uniform).
WeylLabel random_label(Rng& rng, const AlgebraParams& p, const std::vector<Site>& sites);

/// Sum of `terms` random labels on `sites` with complex Gaussian coefficients.
LocalOperator random_operator(Rng& rng, const ParamsPtr& p, const std::vector<Site>& sites,
                              int terms);

/// r = sum_g c_g W_g with a fixed word W = U^a V^b; translates of such r commute.
LocalOperator random_commuting_word_operator(Rng& rng, const ParamsPtr& p, SiteExponent word,
                                             const std::vector<Site>& sites, int terms);

/// Contiguous sites 0..len-1 along the first axis.
std::vector<Site> line_sites(std::int64_t first, std::int64_t len);

}  // namespace uhf
