#include "uhf/closure.hpp"

#include <cmath>

namespace uhf {

Eigen::Index ClosureSystem::find(const WeylLabel& g) const {
  auto it = index.find(g);
  return it == index.end() ? -1 : it->second;
}

Eigen::VectorXcd ClosureSystem::coordinates(const LocalOperator& x) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(size());
  for (const auto& [g, c] : x.terms()) {
    auto i = find(g);
    if (i < 0) throw WindowError("operator label " + label_to_text(g, x.params().d()) + " not in basis");
    v(i) = c;
  }
  return v;
}

LocalOperator ClosureSystem::to_operator(const Eigen::VectorXcd& v, const ParamsPtr& params) const {
  LocalOperator out(params);
  for (Eigen::Index i = 0; i < size(); ++i) out.add_term(basis[static_cast<std::size_t>(i)], v(i));
  return out;
}

ClosureSystem build_closure(const std::vector<WeylLabel>& seeds, const std::vector<LabelMap>& maps,
                            const LabelFilter& in_window, std::size_t max_size,
                            kernels::Exec exec) {
  ClosureSystem sys;
  std::vector<WeylLabel> frontier;
  auto admit = [&](const WeylLabel& g) {
    if (sys.index.contains(g)) return;
    if (sys.basis.size() >= max_size) {
      throw SizeError("closure basis exceeds " + std::to_string(max_size) + " labels");
    }
    sys.index.emplace(g, static_cast<Eigen::Index>(sys.basis.size()));
    sys.basis.push_back(g);
    frontier.push_back(g);
  };
  for (const auto& g : seeds) {
    if (!in_window(g)) throw WindowError("seed label lies outside the window");
    admit(g);
  }

  // images[b][m] = image of basis[b] under maps[m]
  std::vector<std::vector<LocalOperator>> images;
  while (!frontier.empty()) {
    std::vector<WeylLabel> layer;
    layer.swap(frontier);
    auto layer_images = kernels::map_indexed<std::vector<LocalOperator>>(
        layer.size(),
        [&](std::size_t i) {
          std::vector<LocalOperator> out;
          out.reserve(maps.size());
          for (const auto& m : maps) out.push_back(m(layer[i]));
          return out;
        },
        exec);
    for (auto& imgs : layer_images) {
      for (const auto& img : imgs) {
        for (const auto& [h, c] : img.terms()) {
          if (in_window(h)) admit(h);
        }
      }
      images.push_back(std::move(imgs));
    }
  }

  const Eigen::Index n = sys.size();
  sys.matrices.assign(maps.size(), kernels::SparseMatrix(n, n));
  sys.leakage.assign(maps.size(), Eigen::VectorXd::Zero(n));
  for (std::size_t m = 0; m < maps.size(); ++m) {
    std::vector<Eigen::Triplet<Complex>> trips;
    for (Eigen::Index b = 0; b < n; ++b) {
      for (const auto& [h, c] : images[static_cast<std::size_t>(b)][m].terms()) {
        auto i = sys.find(h);
        if (i >= 0) {
          trips.emplace_back(i, b, c);
        } else {
          sys.leakage[m](b) += std::abs(c);
        }
      }
    }
    sys.matrices[m].setFromTriplets(trips.begin(), trips.end());
    sys.matrices[m].makeCompressed();
  }
  return sys;
}

}  // namespace uhf
