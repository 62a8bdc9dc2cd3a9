#include "anntune/knn.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "anntune/distance.hpp"
#include "anntune/errors.hpp"

namespace anntune {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Candidate {
  float dist;
  NodeId id;
  bool operator<(const Candidate& o) const noexcept {
    return dist < o.dist || (dist == o.dist && id < o.id);
  }
};

RowMatrix centered(const VectorSet& vs, const std::vector<float>& center) {
  RowMatrix m(static_cast<Eigen::Index>(vs.count()), static_cast<Eigen::Index>(vs.dim()));
  for (std::size_t i = 0; i < vs.count(); ++i) {
    auto r = vs.row(i);
    for (std::size_t j = 0; j < vs.dim(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j] - center[j];
    }
  }
  return m;
}

std::vector<double> row_norms(const RowMatrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      s += v * v;
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

// Shortlists with ||q||^2 + ||b||^2 - 2 q.b on centered data, then re-ranks
// the shortlist with squared_l2. The margin bounds both the product's
// rounding error and squared_l2's, so every vector that squared_l2 ranks in
// the top k (ties included) survives the shortlist.
std::vector<NeighborList> knn_core(const VectorSet& base, const VectorSet& queries,
                                   std::size_t k, bool exclude_self) {
  const std::size_t n = base.count();
  const std::size_t dim = base.dim();
  const std::size_t nq = queries.count();
  std::vector<NeighborList> out(nq);
  if (nq == 0) return out;

  std::vector<double> mean_d = column_means(base);
  std::vector<float> center(mean_d.begin(), mean_d.end());
  const RowMatrix b = centered(base, center);
  const std::vector<double> bnorm = row_norms(b);

  const double margin_rel = 8.0 * static_cast<double>(dim + 8) * std::ldexp(1.0, -24);

  const std::size_t block =
      std::clamp<std::size_t>((std::size_t{1} << 24) / std::max<std::size_t>(n, 1), 16, 1024);

  for (std::size_t q0 = 0; q0 < nq; q0 += block) {
    const std::size_t qb = std::min(block, nq - q0);
    RowMatrix q(static_cast<Eigen::Index>(qb), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < qb; ++i) {
      auto r = queries.row(q0 + i);
      for (std::size_t j = 0; j < dim; ++j) {
        q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j] - center[j];
      }
    }
    const std::vector<double> qnorm = row_norms(q);
    const RowMatrix dots = q * b.transpose();

#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(qb); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const std::size_t qi = q0 + i;
      const float* drow = dots.data() + i * n;

      // k smallest upper bounds via a max-heap.
      std::priority_queue<double> heap;
      for (std::size_t j = 0; j < n; ++j) {
        if (exclude_self && j == qi) continue;
        const double scale = qnorm[i] + bnorm[j];
        const double upper = scale - 2.0 * drow[j] + margin_rel * scale;
        if (heap.size() < k) {
          heap.push(upper);
        } else if (upper < heap.top()) {
          heap.pop();
          heap.push(upper);
        }
      }
      const double tau = heap.top();

      std::vector<Candidate> cands;
      auto qrow = queries.row(qi);
      for (std::size_t j = 0; j < n; ++j) {
        if (exclude_self && j == qi) continue;
        const double scale = qnorm[i] + bnorm[j];
        const double lower = scale - 2.0 * drow[j] - margin_rel * scale;
        if (lower <= tau) {
          cands.push_back({squared_l2(qrow, base.row(j)), static_cast<NodeId>(j)});
        }
      }
      std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k),
                        cands.end());
      NeighborList& nl = out[qi];
      nl.ids.resize(k);
      nl.distances.resize(k);
      for (std::size_t t = 0; t < k; ++t) {
        nl.ids[t] = cands[t].id;
        nl.distances[t] = cands[t].dist;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<NeighborList> brute_force_knn(const VectorSet& base, const VectorSet& queries,
                                          std::size_t k) {
  if (queries.count() > 0 && base.dim() != queries.dim()) {
    throw ArgumentError("brute_force_knn: base dim " + std::to_string(base.dim()) +
                        " != query dim " + std::to_string(queries.dim()));
  }
  if (k == 0) throw ArgumentError("brute_force_knn: k must be positive");
  if (k > base.count()) {
    throw ArgumentError("brute_force_knn: k=" + std::to_string(k) + " exceeds base count " +
                        std::to_string(base.count()));
  }
  return knn_core(base, queries, k, false);
}

std::vector<NeighborList> exact_knn_graph(const VectorSet& base, std::size_t k) {
  if (k == 0) throw ArgumentError("exact_knn_graph: k must be positive");
  if (k >= base.count()) {
    throw ArgumentError("exact_knn_graph: k=" + std::to_string(k) +
                        " must be below count " + std::to_string(base.count()));
  }
  return knn_core(base, base, k, true);
}

}  // namespace anntune
