#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace drgct {

/// One weighting frequency: mu pairs with the Y lag vector (dimension q),
/// nu with the X lag vector (dimension p).
struct FreqPair {
  Eigen::VectorXd mu;
  Eigen::VectorXd nu;
};

/// Per-coordinate sampling interval [lo, hi]. lo == hi is allowed and
/// degenerates to a point mass.
struct FreqBounds {
  double lo = -1.0;
  double hi = 1.0;
};

/// L i.i.d. frequency pairs drawn uniformly over bounds^(p+q), plus the
/// provenance needed to redraw them.
struct FreqSet {
  std::vector<FreqPair> pairs;
  FreqBounds bounds;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(pairs.size()); }
};

/// Draw L pairs; each pair consumes q mu-coordinates then p nu-coordinates
/// from the stream. Deterministic in the seed.
FreqSet sample_freq_pairs(int L, const FreqBounds& bounds, int q, int p,
                          std::uint64_t seed);

}  // namespace drgct
