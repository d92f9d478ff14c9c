#include "coop/torus.hpp"

#include <algorithm>
#include <stdexcept>

namespace coop {

char to_char(SiteState s) {
  switch (s) {
    case SiteState::empty: return 'e';
    case SiteState::cooperator: return 'c';
    case SiteState::defector: return 'd';
  }
  return '?';
}

SiteState site_from_char(char ch) {
  switch (ch) {
    case 'e': return SiteState::empty;
    case 'c': return SiteState::cooperator;
    case 'd': return SiteState::defector;
    default: throw std::invalid_argument(std::string("bad site character '") + ch + "'");
  }
}

Torus::Torus(int dim, int side) : dim_(dim), side_(side), size_(1) {
  if (dim < 1) throw std::invalid_argument("torus dimension must be at least 1");
  if (side < 1) throw std::invalid_argument("torus side must be at least 1");
  for (int j = 0; j < dim; ++j) {
    size_ *= static_cast<std::size_t>(side);
    if (size_ > (std::size_t{1} << 31)) throw std::invalid_argument("torus too large");
  }
  table_.resize(size_ * degree());
  std::vector<int> c;
  for (std::size_t x = 0; x < size_; ++x) {
    c = coords(static_cast<Site>(x));
    for (int j = 0; j < dim; ++j) {
      for (int sign : {+1, -1}) {
        std::vector<int> n = c;
        n[j] += sign;
        table_[x * degree() + 2 * j + (sign > 0 ? 0 : 1)] = index(n);
      }
    }
  }
}

std::vector<int> Torus::coords(Site x) const {
  std::vector<int> c(dim_);
  std::size_t rest = x;
  for (int j = 0; j < dim_; ++j) {
    c[j] = static_cast<int>(rest % side_);
    rest /= side_;
  }
  return c;
}

Site Torus::index(std::span<const int> c) const {
  std::size_t idx = 0;
  for (int j = dim_ - 1; j >= 0; --j) {
    int v = c[j] % side_;
    if (v < 0) v += side_;
    idx = idx * side_ + static_cast<std::size_t>(v);
  }
  return static_cast<Site>(idx);
}

int Torus::distance_inf(Site a, Site b) const {
  const auto ca = coords(a);
  const auto cb = coords(b);
  int best = 0;
  for (int j = 0; j < dim_; ++j) {
    int diff = std::abs(ca[j] - cb[j]);
    diff = std::min(diff, side_ - diff);
    best = std::max(best, diff);
  }
  return best;
}

Counts count_states(const Configuration& config) {
  Counts n;
  for (SiteState s : config) {
    switch (s) {
      case SiteState::cooperator: ++n.c; break;
      case SiteState::defector: ++n.d; break;
      case SiteState::empty: ++n.e; break;
    }
  }
  return n;
}

Configuration sample_product(const Torus& torus, double rho_c, double rho_d, Rng& rng) {
  if (rho_c < 0.0 || rho_d < 0.0 || rho_c + rho_d > 1.0)
    throw std::invalid_argument("product measure densities must be nonnegative with sum <= 1");
  Configuration config(torus.size(), SiteState::empty);
  for (auto& s : config) {
    const double u = uniform01(rng);
    if (u < rho_c)
      s = SiteState::cooperator;
    else if (u < rho_c + rho_d)
      s = SiteState::defector;
  }
  return config;
}

Configuration uniform_configuration(const Torus& torus, SiteState s) {
  return Configuration(torus.size(), s);
}

Configuration swap_types(const Configuration& config) {
  Configuration out(config);
  for (auto& s : out) {
    if (s == SiteState::cooperator)
      s = SiteState::defector;
    else if (s == SiteState::defector)
      s = SiteState::cooperator;
  }
  return out;
}

std::string to_string(const Configuration& config) {
  std::string out(config.size(), 'e');
  std::transform(config.begin(), config.end(), out.begin(), to_char);
  return out;
}

Configuration configuration_from_string(const std::string& text) {
  Configuration out(text.size());
  std::transform(text.begin(), text.end(), out.begin(), site_from_char);
  return out;
}

}  // namespace coop
