#include "spinent/lattice_basis.hpp"

#include <bit>
#include <cstdlib>

#include "spinent/errors.hpp"

namespace spinent {

namespace {

constexpr std::uint64_t kMaxBasisDimension = std::uint64_t{1} << 27;

}  // namespace

LatticeSpec LatticeSpec::chain(int n_sites) {
  LatticeSpec l{Geometry::chain, n_sites};
  l.validate();
  return l;
}

LatticeSpec LatticeSpec::ladder(int leg_length) {
  LatticeSpec l{Geometry::ladder, 2 * leg_length};
  l.validate();
  return l;
}

void LatticeSpec::validate() const {
  if (n_sites < 2 || n_sites > kMaxSites) {
    throw InvalidInput("n_sites must be in [2, " + std::to_string(kMaxSites) +
                       "], got " + std::to_string(n_sites));
  }
  if (geometry == Geometry::ladder && n_sites % 2 != 0) {
    throw InvalidInput("ladder requires an even number of sites, got " +
                       std::to_string(n_sites));
  }
}

std::string to_string(Geometry g) {
  return g == Geometry::chain ? "chain" : "ladder";
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

SectorBasis::SectorBasis(const LatticeSpec& lattice, std::optional<int> sz_twice)
    : lattice_(lattice), sz_twice_(sz_twice) {
  lattice_.validate();
  const int n = lattice_.n_sites;
  if (sz_twice_) {
    const int m = *sz_twice_;
    if (std::abs(m) > n || (n + m) % 2 != 0) {
      throw InvalidInput("sz_twice=" + std::to_string(m) + " is not a valid sector for " +
                         std::to_string(n) + " sites");
    }
    n_up_ = (n + m) / 2;
  }

  for (int a = 0; a <= n; ++a) {
    binom_[a][0] = 1;
    for (int b = 1; b <= a; ++b) binom_[a][b] = binom_[a - 1][b - 1] + binom_[a - 1][b];
  }

  const std::uint64_t dim = sz_twice_ ? binom_[n][n_up_] : (std::uint64_t{1} << n);
  if (dim > kMaxBasisDimension) {
    throw ResourceError("basis dimension " + std::to_string(dim) + " exceeds the cap of " +
                        std::to_string(kMaxBasisDimension));
  }
  configs_.reserve(dim);

  if (!sz_twice_) {
    for (std::uint64_t c = 0; c < dim; ++c) configs_.push_back(c);
    return;
  }
  if (n_up_ == 0) {
    configs_.push_back(0);
  } else {
    // Gosper's hack walks fixed-popcount masks in increasing numeric order.
    const std::uint64_t limit = std::uint64_t{1} << n;
    std::uint64_t c = (std::uint64_t{1} << n_up_) - 1;
    while (c < limit) {
      configs_.push_back(c);
      const std::uint64_t low = c & (~c + 1);
      const std::uint64_t ripple = c + low;
      c = (((ripple ^ c) >> 2) / low) | ripple;
    }
  }

  // Split tables: ascending order is (high half, low half) lexicographic,
  // so rank = offset of the high half + rank of the low half among
  // low halves with the same popcount.
  lo_bits_ = n / 2;
  const std::size_t n_lo = std::size_t{1} << lo_bits_;
  const std::size_t n_hi = std::size_t{1} << (n - lo_bits_);
  lo_rank_.resize(n_lo);
  std::array<std::uint32_t, kMaxSites + 1> seen{};
  for (std::size_t lo = 0; lo < n_lo; ++lo) lo_rank_[lo] = seen[std::popcount(lo)]++;
  hi_offset_.resize(n_hi);
  std::uint64_t total = 0;
  for (std::size_t hi = 0; hi < n_hi; ++hi) {
    hi_offset_[hi] = static_cast<std::uint32_t>(total);
    const int need = n_up_ - std::popcount(hi);
    if (need >= 0 && need <= lo_bits_) total += binom_[lo_bits_][need];
  }
}

std::size_t SectorBasis::rank_unchecked(SpinConfiguration config) const noexcept {
  if (!sz_twice_) return static_cast<std::size_t>(config);
  const SpinConfiguration lo_mask = (SpinConfiguration{1} << lo_bits_) - 1;
  return std::size_t{hi_offset_[config >> lo_bits_]} + lo_rank_[config & lo_mask];
}

bool SectorBasis::contains(SpinConfiguration config) const noexcept {
  const int n = lattice_.n_sites;
  if (n < 64 && (config >> n) != 0) return false;
  if (sz_twice_ && std::popcount(config) != n_up_) return false;
  return true;
}

std::optional<std::size_t> SectorBasis::find(SpinConfiguration config) const noexcept {
  if (!contains(config)) return std::nullopt;
  return rank_unchecked(config);
}

std::size_t SectorBasis::index_of(SpinConfiguration config) const {
  if (auto r = find(config)) return *r;
  throw NotFound("configuration " + std::to_string(config) + " is not in the sector");
}

SectorBasis enumerate_sector(const LatticeSpec& lattice, std::optional<int> sz_twice) {
  return SectorBasis(lattice, sz_twice);
}

}  // namespace spinent
