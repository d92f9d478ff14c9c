#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coop/rng.hpp"

namespace coop {

enum class SiteState : std::uint8_t { empty = 0, cooperator = 1, defector = 2 };

char to_char(SiteState s);  // 'e', 'c', 'd'
SiteState site_from_char(char ch);

using Site = std::uint32_t;

// Periodic d-dimensional box of side^dim sites. Direction 2j is +e_j and
// 2j+1 is -e_j, so opposite(k) == k ^ 1. Neighbor lists keep multiplicity
// on very small sides (side 2 sees the same site through +e_j and -e_j).
class Torus {
 public:
  Torus(int dim, int side);

  int dim() const { return dim_; }
  int side() const { return side_; }
  int degree() const { return 2 * dim_; }
  std::size_t size() const { return size_; }

  Site neighbor(Site x, int dir) const {
    return table_[static_cast<std::size_t>(x) * degree() + dir];
  }
  std::span<const Site> neighbors(Site x) const {
    return {table_.data() + static_cast<std::size_t>(x) * degree(),
            static_cast<std::size_t>(degree())};
  }
  static constexpr int opposite(int dir) { return dir ^ 1; }

  std::vector<int> coords(Site x) const;
  // Coordinates are reduced mod side, negative values allowed.
  Site index(std::span<const int> coords) const;

  // l-infinity distance in the periodic metric.
  int distance_inf(Site a, Site b) const;

  bool operator==(const Torus& o) const { return dim_ == o.dim_ && side_ == o.side_; }

 private:
  int dim_;
  int side_;
  std::size_t size_;
  std::vector<Site> table_;
};

using Configuration = std::vector<SiteState>;

struct Counts {
  std::size_t c = 0;
  std::size_t d = 0;
  std::size_t e = 0;

  bool operator==(const Counts&) const = default;
};

Counts count_states(const Configuration& config);

// i.i.d. sites: cooperator w.p. rho_c, defector w.p. rho_d.
Configuration sample_product(const Torus& torus, double rho_c, double rho_d, Rng& rng);

Configuration uniform_configuration(const Torus& torus, SiteState s);

Configuration swap_types(const Configuration& config);

std::string to_string(const Configuration& config);
Configuration configuration_from_string(const std::string& text);

}  // namespace coop
