#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coop/rng.hpp"

namespace coop {

// Oriented site percolation on {(z, n) : z_1 + ... + z_d + n even}, restricted
// to z in [-W, W]^d and levels 0..N. Edges run (z, n) -> (z +- e_j, n + 1).
struct PercolationSpec {
  int dim = 1;
  int width = 50;   // W
  int levels = 50;  // N
  double epsilon = 0.05;
  // Level-0 sources; empty means every parity-valid level-0 site.
  std::vector<std::vector<int>> sources;
  std::uint64_t seed = 1;
};

enum class PercolationGraph { G, H };  // H adds horizontal edges z -> z +- 2 e_j

class PercolationField {
 public:
  explicit PercolationField(const PercolationSpec& spec);

  const PercolationSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  int width() const { return spec_.width; }
  int levels() const { return spec_.levels; }

  bool in_bounds(const std::vector<int>& z, int n) const;
  static bool parity_ok(const std::vector<int>& z, int n);

  // Site is open iff its uniform is >= epsilon, so fields with one seed and
  // different epsilon are coupled monotonically. Throws OutOfBounds.
  bool open(const std::vector<int>& z, int n) const;
  bool wet(const std::vector<int>& z, int n) const;

  // Parity-valid sites at level n, and how many of them are wet.
  std::size_t sites_at(int n) const;
  std::size_t wet_count(int n) const;
  std::vector<std::vector<int>> wet_set(int n) const;

  // Directed path of dry (parity-valid, not wet) sites from level 0 to the
  // target. Throws OutOfBounds, std::invalid_argument on bad parity.
  bool dry_path_exists(const std::vector<int>& z, int n, PercolationGraph graph) const;
  // Dry-path reachability for every site of level n (parity-invalid sites false).
  std::vector<char> dry_reachable(int n, PercolationGraph graph) const;

  // One line per level: run-length pairs over sites in index order with
  // W (wet), o (open, dry), x (closed), . (off parity).
  std::string dump_rle() const;

  // Flat index helpers over the box (side 2W + 1 per axis).
  std::size_t level_size() const { return level_size_; }
  std::vector<int> coords(std::size_t i) const;

 private:
  std::size_t flat(const std::vector<int>& z) const;
  std::size_t at(std::size_t i, int n) const { return static_cast<std::size_t>(n) * level_size_ + i; }
  bool parity_ok(std::size_t i, int n) const;
  void neighbors_within(std::size_t i, int step, std::vector<std::size_t>& out) const;
  void check(const std::vector<int>& z, int n) const;

  PercolationSpec spec_;
  int side_;
  std::size_t level_size_;
  std::vector<double> uniform_;
  std::vector<char> wet_;
  std::vector<int> coord_sum_;  // sum of coordinates per flat index
};

PercolationField percolate(const PercolationSpec& spec);

}  // namespace coop
