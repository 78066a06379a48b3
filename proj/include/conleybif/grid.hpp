#ifndef CONLEYBIF_GRID_HPP
#define CONLEYBIF_GRID_HPP

#include "conleybif/types.hpp"

#include <cstdint>
#include <vector>

namespace conleybif {

using BoxId = std::int64_t;

/// Uniform box grid over a closed domain. Box ids linearize the multi-index
/// with coordinate 0 varying fastest.
class BoxGrid {
 public:
  BoxGrid() = default;
  BoxGrid(Box domain, Eigen::VectorXi counts);

  int dim() const { return static_cast<int>(domain_.dim()); }
  const Box &domain() const { return domain_; }
  const Eigen::VectorXi &counts() const { return counts_; }
  Eigen::VectorXd widths() const;
  BoxId size() const { return size_; }

  Eigen::VectorXi multi_index(BoxId id) const;
  BoxId id_of(const Eigen::VectorXi &idx) const;
  bool valid(BoxId id) const { return id >= 0 && id < size_; }

  Box box(BoxId id) const;
  BoxId locate(const Point &x) const;  // -1 outside the domain

  /// Boxes whose closed cell meets b (face ties included), clipped to the
  /// domain.
  std::vector<BoxId> intersecting(const Box &b) const;

  /// Minimal set of cells whose union contains b; requires b inside the
  /// domain.
  std::vector<BoxId> covering(const Box &b) const;

  /// Existing Chebyshev-distance-1 neighbors (excluding id itself).
  std::vector<BoxId> neighbors(BoxId id) const;
  bool touches_boundary(BoxId id) const;

  friend bool operator==(const BoxGrid &a, const BoxGrid &b);

 private:
  double grid_line(int axis, long j) const;

  Box domain_;
  Eigen::VectorXi counts_;
  BoxId size_ = 0;
};

/// counts = ceil(side / target_width) per coordinate (at least 4).
BoxGrid build_grid(const Box &domain, double target_width);

/// Widths divided by factor, counts multiplied by factor.
BoxGrid subdivide(const BoxGrid &grid, int factor);

/// Fibered family of box collections, one sorted id list per fiber
/// k in [first_fiber, last_fiber]. Houses N(omega), L(omega), S(omega).
class RandomBoxSet {
 public:
  RandomBoxSet() = default;
  RandomBoxSet(BoxGrid grid, int first_fiber, int last_fiber);

  static RandomBoxSet full(const BoxGrid &grid, int first, int last);
  static RandomBoxSet constant(const BoxGrid &grid, int first, int last,
                               std::vector<BoxId> ids);

  const BoxGrid &grid() const { return grid_; }
  int first_fiber() const { return first_; }
  int last_fiber() const { return first_ + static_cast<int>(fibers_.size()) - 1; }
  bool has_fiber(int k) const { return k >= first_ && k <= last_fiber(); }

  const std::vector<BoxId> &fiber(int k) const;
  void set_fiber(int k, std::vector<BoxId> ids);  // sorts and dedups
  bool contains(int k, BoxId id) const;

  bool empty() const;
  bool empty_on(int first, int last) const;
  std::size_t box_count() const;

  /// Bounding box of fiber k's boxes; empty optional-like flag via return.
  bool bbox(int k, Box &out) const;

  friend bool operator==(const RandomBoxSet &a, const RandomBoxSet &b);

 private:
  BoxGrid grid_;
  int first_ = 0;
  std::vector<std::vector<BoxId>> fibers_;
};

RandomBoxSet unite(const RandomBoxSet &a, const RandomBoxSet &b);
RandomBoxSet intersect(const RandomBoxSet &a, const RandomBoxSet &b);
RandomBoxSet subtract(const RandomBoxSet &a, const RandomBoxSet &b);
bool subset_of(const RandomBoxSet &a, const RandomBoxSet &b, int first,
               int last);

/// One-ring erosion: boxes whose Chebyshev neighbors all belong to the set
/// and which do not touch the domain boundary.
RandomBoxSet combinatorial_interior(const RandomBoxSet &n);

/// Grows every fiber by `rings` Chebyshev rings inside the grid.
RandomBoxSet dilate(const RandomBoxSet &n, int rings = 1);

/// One-ring dilation clipped to `within`.
RandomBoxSet dilate_within(const RandomBoxSet &n, const RandomBoxSet &within);

/// Union of fibers [first, last] as a plain id list.
std::vector<BoxId> project(const RandomBoxSet &n, int first, int last);

/// Same fibers restricted to [first, last].
RandomBoxSet restrict_fibers(const RandomBoxSet &n, int first, int last);

/// Re-expresses the set on subdivide(grid, factor).
RandomBoxSet refine(const RandomBoxSet &n, int factor);

/// Sum of box volumes over fibers [first, last].
double volume(const RandomBoxSet &n, int first, int last);

}  // namespace conleybif

#endif  // CONLEYBIF_GRID_HPP
