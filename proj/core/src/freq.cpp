#include "drgct/freq.hpp"

#include "drgct/errors.hpp"
#include "drgct/rng.hpp"

namespace drgct {

FreqSet sample_freq_pairs(int L, const FreqBounds& bounds, int q, int p,
                          std::uint64_t seed) {
  if (L < 1) throw UsageError("need at least one frequency pair");
  if (q < 1 || p < 1) throw UsageError("frequency dimensions must be positive");
  if (bounds.lo > bounds.hi) {
    throw UsageError("frequency bounds reversed: lo > hi");
  }

  RngStream rng(derive_seed(seed, SeedDomain::FreqPairs));
  FreqSet set;
  set.bounds = bounds;
  set.seed = seed;
  set.pairs.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    FreqPair pair;
    pair.mu.resize(q);
    pair.nu.resize(p);
    for (int j = 0; j < q; ++j) pair.mu(j) = rng.uniform(bounds.lo, bounds.hi);
    for (int k = 0; k < p; ++k) pair.nu(k) = rng.uniform(bounds.lo, bounds.hi);
    set.pairs.push_back(std::move(pair));
  }
  return set;
}

}  // namespace drgct
