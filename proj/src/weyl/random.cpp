#include "uhf/random.hpp"

namespace uhf {

WeylLabel random_label(Rng& rng, const AlgebraParams& p, const std::vector<Site>& sites) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> expo(0, p.N() - 1);
  std::vector<WeylLabel::Entry> entries;
  for (const auto& s : sites) {
    if (!coin(rng)) continue;
    SiteExponent e{expo(rng), expo(rng)};
    if (e.is_identity()) e.alpha = 1;
    entries.push_back({s, e});
  }
  return WeylLabel(std::move(entries), p.N());
}

LocalOperator random_operator(Rng& rng, const ParamsPtr& p, const std::vector<Site>& sites,
                              int terms) {
  std::normal_distribution<double> gauss;
  LocalOperator x(p);
  for (int i = 0; i < terms; ++i) {
    x.add_term(random_label(rng, *p, sites), Complex(gauss(rng), gauss(rng)));
  }
  return x;
}

LocalOperator random_commuting_word_operator(Rng& rng, const ParamsPtr& p, SiteExponent word,
                                             const std::vector<Site>& sites, int terms) {
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> power(0, p->N() - 1);
  LocalOperator r(p);
  for (int i = 0; i < terms; ++i) {
    std::vector<WeylLabel::Entry> entries;
    for (const auto& s : sites) {
      int q = power(rng);
      entries.push_back({s, {word.alpha * q, word.beta * q}});
    }
    // W^q at each site, written in normal order: (U^a V^b)^q differs from U^(aq) V^(bq)
    // only by a phase, which is absorbed into the random coefficient.
    r.add_term(WeylLabel(std::move(entries), p->N()), Complex(gauss(rng), gauss(rng)));
  }
  return r;
}

std::vector<Site> line_sites(std::int64_t first, std::int64_t len) {
  std::vector<Site> out;
  for (std::int64_t i = 0; i < len; ++i) out.push_back(Site::along(0, first + i));
  return out;
}

}  // namespace uhf
