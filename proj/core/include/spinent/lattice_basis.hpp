#pragma once

#include <cstddef>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spinent {

enum class Geometry { chain, ladder };

/// Periodic spin-1/2 lattice. For a ladder, sites 2k and 2k+1 form rung k;
/// the even sites make up one leg and the odd sites the other.
struct LatticeSpec {
  Geometry geometry = Geometry::chain;
  int n_sites = 2;

  static LatticeSpec chain(int n_sites);
  /// Two-leg ladder with `leg_length` rungs (2 * leg_length sites).
  static LatticeSpec ladder(int leg_length);

  int leg_length() const { return geometry == Geometry::ladder ? n_sites / 2 : n_sites; }

  /// Throws InvalidInput when the invariants do not hold.
  void validate() const;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

std::string to_string(Geometry g);

/// Computational basis state: bit i set means spin up at site i.
using SpinConfiguration = std::uint64_t;

inline constexpr int kMaxSites = 32;

/// Ordered set of configurations with fixed 2*Sz (or the full space).
/// Immutable after construction; ranks are computed combinatorially, so
/// index_of is two table lookups.
class SectorBasis {
 public:
  SectorBasis(const LatticeSpec& lattice, std::optional<int> sz_twice);

  const LatticeSpec& lattice() const noexcept { return lattice_; }
  int n_sites() const noexcept { return lattice_.n_sites; }
  std::optional<int> sz_twice() const noexcept { return sz_twice_; }
  bool is_full() const noexcept { return !sz_twice_.has_value(); }
  std::size_t dimension() const noexcept { return configs_.size(); }

  std::span<const SpinConfiguration> configs() const noexcept { return configs_; }
  SpinConfiguration operator[](std::size_t k) const { return configs_[k]; }

  /// Rank of `config`; throws NotFound when it is not in the sector.
  std::size_t index_of(SpinConfiguration config) const;
  std::optional<std::size_t> find(SpinConfiguration config) const noexcept;
  bool contains(SpinConfiguration config) const noexcept;
  /// Rank without the membership check; `config` must be in the sector.
  std::size_t rank_unchecked(SpinConfiguration config) const noexcept;

  friend bool operator==(const SectorBasis& a, const SectorBasis& b) {
    return a.lattice_ == b.lattice_ && a.sz_twice_ == b.sz_twice_;
  }

 private:
  LatticeSpec lattice_;
  std::optional<int> sz_twice_;
  int n_up_ = 0;
  std::vector<SpinConfiguration> configs_;
  // binom_[n][k] for n <= n_sites, used for colex ranking
  std::array<std::array<std::uint64_t, kMaxSites + 1>, kMaxSites + 1> binom_{};
  int lo_bits_ = 0;
  std::vector<std::uint32_t> lo_rank_;
  std::vector<std::uint32_t> hi_offset_;
};

SectorBasis enumerate_sector(const LatticeSpec& lattice, std::optional<int> sz_twice);

std::uint64_t binomial(int n, int k);

}  // namespace spinent
