#include "coop/percolation.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

#include "coop/params.hpp"

namespace coop {

PercolationField::PercolationField(const PercolationSpec& spec) : spec_(spec) {
  if (spec_.dim < 1) throw std::invalid_argument("percolation dim must be at least 1");
  if (spec_.width < 0 || spec_.levels < 0) throw std::invalid_argument("negative field extent");
  if (!(spec_.epsilon >= 0.0 && spec_.epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  side_ = 2 * spec_.width + 1;
  level_size_ = 1;
  for (int j = 0; j < spec_.dim; ++j) level_size_ *= static_cast<std::size_t>(side_);
  coord_sum_.resize(level_size_);
  for (std::size_t i = 0; i < level_size_; ++i) {
    int sum = 0;
    for (int c : coords(i)) sum += c;
    coord_sum_[i] = sum;
  }

  const std::size_t total = level_size_ * static_cast<std::size_t>(spec_.levels + 1);
  Rng rng = make_stream(spec_.seed, 0);
  uniform_.resize(total);
  for (double& u : uniform_) u = uniform01(rng);
  wet_.assign(total, 0);

  auto is_open = [&](std::size_t i, int n) { return uniform_[at(i, n)] >= spec_.epsilon; };
  if (spec_.sources.empty()) {
    for (std::size_t i = 0; i < level_size_; ++i)
      if (parity_ok(i, 0) && is_open(i, 0)) wet_[at(i, 0)] = 1;
  } else {
    for (const auto& z : spec_.sources) {
      check(z, 0);
      if (!parity_ok(z, 0)) throw std::invalid_argument("percolation source off the parity lattice");
      const std::size_t i = flat(z);
      if (is_open(i, 0)) wet_[at(i, 0)] = 1;
    }
  }
  std::vector<std::size_t> nb;
  for (int n = 1; n <= spec_.levels; ++n) {
    for (std::size_t i = 0; i < level_size_; ++i) {
      if (!parity_ok(i, n) || !is_open(i, n)) continue;
      neighbors_within(i, 1, nb);
      for (std::size_t j : nb)
        if (wet_[at(j, n - 1)]) {
          wet_[at(i, n)] = 1;
          break;
        }
    }
  }
}

std::vector<int> PercolationField::coords(std::size_t i) const {
  std::vector<int> z(static_cast<std::size_t>(spec_.dim));
  for (int j = 0; j < spec_.dim; ++j) {
    z[static_cast<std::size_t>(j)] = static_cast<int>(i % static_cast<std::size_t>(side_)) - spec_.width;
    i /= static_cast<std::size_t>(side_);
  }
  return z;
}

std::size_t PercolationField::flat(const std::vector<int>& z) const {
  std::size_t i = 0;
  for (int j = spec_.dim - 1; j >= 0; --j)
    i = i * static_cast<std::size_t>(side_) + static_cast<std::size_t>(z[static_cast<std::size_t>(j)] + spec_.width);
  return i;
}

bool PercolationField::in_bounds(const std::vector<int>& z, int n) const {
  if (static_cast<int>(z.size()) != spec_.dim || n < 0 || n > spec_.levels) return false;
  for (int c : z)
    if (c < -spec_.width || c > spec_.width) return false;
  return true;
}

void PercolationField::check(const std::vector<int>& z, int n) const {
  if (!in_bounds(z, n)) throw OutOfBounds("percolation site outside the field");
}

bool PercolationField::parity_ok(const std::vector<int>& z, int n) {
  long sum = n;
  for (int c : z) sum += c;
  return sum % 2 == 0;
}

bool PercolationField::parity_ok(std::size_t i, int n) const { return (coord_sum_[i] + n) % 2 == 0; }

void PercolationField::neighbors_within(std::size_t i, int step, std::vector<std::size_t>& out) const {
  out.clear();
  std::size_t stride = 1;
  std::size_t rest = i;
  for (int j = 0; j < spec_.dim; ++j) {
    const int c = static_cast<int>(rest % static_cast<std::size_t>(side_));
    rest /= static_cast<std::size_t>(side_);
    if (c + step < side_) out.push_back(i + static_cast<std::size_t>(step) * stride);
    if (c - step >= 0) out.push_back(i - static_cast<std::size_t>(step) * stride);
    stride *= static_cast<std::size_t>(side_);
  }
}

bool PercolationField::open(const std::vector<int>& z, int n) const {
  check(z, n);
  return uniform_[at(flat(z), n)] >= spec_.epsilon;
}

bool PercolationField::wet(const std::vector<int>& z, int n) const {
  check(z, n);
  return wet_[at(flat(z), n)] != 0;
}

std::size_t PercolationField::sites_at(int n) const {
  std::size_t k = 0;
  for (std::size_t i = 0; i < level_size_; ++i) k += parity_ok(i, n);
  return k;
}

std::size_t PercolationField::wet_count(int n) const {
  if (n < 0 || n > spec_.levels) throw OutOfBounds("level outside the field");
  std::size_t k = 0;
  for (std::size_t i = 0; i < level_size_; ++i) k += wet_[at(i, n)];
  return k;
}

std::vector<std::vector<int>> PercolationField::wet_set(int n) const {
  if (n < 0 || n > spec_.levels) throw OutOfBounds("level outside the field");
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < level_size_; ++i)
    if (wet_[at(i, n)]) out.push_back(coords(i));
  return out;
}

std::vector<char> PercolationField::dry_reachable(int n, PercolationGraph graph) const {
  if (n < 0 || n > spec_.levels) throw OutOfBounds("level outside the field");
  auto dry = [&](std::size_t i, int m) { return parity_ok(i, m) && !wet_[at(i, m)]; };
  std::vector<char> cur(level_size_, 0), next(level_size_, 0);
  std::vector<std::size_t> nb;
  std::deque<std::size_t> queue;

  // Within a level, H lets dry paths move by +-2 e_j.
  auto close_horizontally = [&](std::vector<char>& reach, int m) {
    if (graph != PercolationGraph::H) return;
    queue.clear();
    for (std::size_t i = 0; i < level_size_; ++i)
      if (reach[i]) queue.push_back(i);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      neighbors_within(i, 2, nb);
      for (std::size_t j : nb)
        if (!reach[j] && dry(j, m)) {
          reach[j] = 1;
          queue.push_back(j);
        }
    }
  };

  for (std::size_t i = 0; i < level_size_; ++i) cur[i] = dry(i, 0);
  close_horizontally(cur, 0);
  for (int m = 1; m <= n; ++m) {
    for (std::size_t i = 0; i < level_size_; ++i) {
      next[i] = 0;
      if (!dry(i, m)) continue;
      neighbors_within(i, 1, nb);
      for (std::size_t j : nb)
        if (cur[j]) {
          next[i] = 1;
          break;
        }
    }
    close_horizontally(next, m);
    std::swap(cur, next);
  }
  return cur;
}

bool PercolationField::dry_path_exists(const std::vector<int>& z, int n, PercolationGraph graph) const {
  check(z, n);
  if (!parity_ok(z, n)) throw std::invalid_argument("target off the parity lattice");
  return dry_reachable(n, graph)[flat(z)] != 0;
}

std::string PercolationField::dump_rle() const {
  std::ostringstream out;
  out << "# percolation dim=" << spec_.dim << " width=" << spec_.width << " levels=" << spec_.levels
      << " seed=" << spec_.seed << '\n';
  for (int n = 0; n <= spec_.levels; ++n) {
    out << n << ':';
    char run = 0;
    std::size_t len = 0;
    auto flush = [&] {
      if (len) out << ' ' << len << run;
    };
    for (std::size_t i = 0; i < level_size_; ++i) {
      char ch = '.';
      if (parity_ok(i, n)) ch = wet_[at(i, n)] ? 'W' : (uniform_[at(i, n)] >= spec_.epsilon ? 'o' : 'x');
      if (ch == run) {
        ++len;
      } else {
        flush();
        run = ch;
        len = 1;
      }
    }
    flush();
    out << '\n';
  }
  return out.str();
}

PercolationField percolate(const PercolationSpec& spec) { return PercolationField(spec); }

}  // namespace coop
