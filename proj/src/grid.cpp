#include "conleybif/grid.hpp"

#include "conleybif/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace conleybif {

BoxGrid::BoxGrid(Box domain, Eigen::VectorXi counts)
    : domain_(std::move(domain)), counts_(std::move(counts)) {
  if (domain_.dim() != counts_.size())
    throw ConfigError("grid counts do not match the domain dimension");
  size_ = 1;
  for (Eigen::Index i = 0; i < counts_.size(); ++i) {
    if (counts_[i] < 1) throw ConfigError("grid counts must be positive");
    size_ *= counts_[i];
  }
}

Eigen::VectorXd BoxGrid::widths() const {
  return domain_.widths().cwiseQuotient(counts_.cast<double>());
}

double BoxGrid::grid_line(int axis, long j) const {
  if (j == counts_[axis]) return domain_.hi[axis];
  return domain_.lo[axis] +
         domain_.widths()[axis] * static_cast<double>(j) / counts_[axis];
}

Eigen::VectorXi BoxGrid::multi_index(BoxId id) const {
  Eigen::VectorXi idx(dim());
  for (int i = 0; i < dim(); ++i) {
    idx[i] = static_cast<int>(id % counts_[i]);
    id /= counts_[i];
  }
  return idx;
}

BoxId BoxGrid::id_of(const Eigen::VectorXi &idx) const {
  BoxId id = 0;
  for (int i = dim() - 1; i >= 0; --i) id = id * counts_[i] + idx[i];
  return id;
}

Box BoxGrid::box(BoxId id) const {
  const Eigen::VectorXi idx = multi_index(id);
  Box b{Point(dim()), Point(dim())};
  for (int i = 0; i < dim(); ++i) {
    b.lo[i] = grid_line(i, idx[i]);
    b.hi[i] = grid_line(i, idx[i] + 1);
  }
  return b;
}

BoxId BoxGrid::locate(const Point &x) const {
  if (!domain_.contains(x)) return -1;
  Eigen::VectorXi idx(dim());
  for (int i = 0; i < dim(); ++i) {
    const double t = (x[i] - domain_.lo[i]) / domain_.widths()[i] * counts_[i];
    idx[i] = std::clamp(static_cast<int>(std::floor(t)), 0, counts_[i] - 1);
  }
  return id_of(idx);
}

namespace {

void for_each_in_range(const Eigen::VectorXi &lo, const Eigen::VectorXi &hi,
                       const BoxGrid &g, std::vector<BoxId> &out) {
  const int d = g.dim();
  Eigen::VectorXi idx = lo;
  while (true) {
    out.push_back(g.id_of(idx));
    int axis = 0;
    while (axis < d) {
      if (idx[axis] < hi[axis]) {
        ++idx[axis];
        break;
      }
      idx[axis] = lo[axis];
      ++axis;
    }
    if (axis == d) break;
  }
  std::sort(out.begin(), out.end());
}

}  // namespace

std::vector<BoxId> BoxGrid::intersecting(const Box &b) const {
  std::vector<BoxId> out;
  Eigen::VectorXi lo(dim()), hi(dim());
  for (int i = 0; i < dim(); ++i) {
    const double w = domain_.widths()[i] / counts_[i];
    const double tl = (b.lo[i] - domain_.lo[i]) / w;
    const double th = (b.hi[i] - domain_.lo[i]) / w;
    if (!std::isfinite(tl) || !std::isfinite(th)) return out;
    const double l = std::max(std::ceil(tl) - 1.0, 0.0);
    const double h = std::min(std::floor(th), counts_[i] - 1.0);
    if (l > h) return out;
    lo[i] = static_cast<int>(l);
    hi[i] = static_cast<int>(h);
  }
  for_each_in_range(lo, hi, *this, out);
  return out;
}

std::vector<BoxId> BoxGrid::covering(const Box &b) const {
  std::vector<BoxId> out;
  Eigen::VectorXi lo(dim()), hi(dim());
  for (int i = 0; i < dim(); ++i) {
    const double w = domain_.widths()[i] / counts_[i];
    const double tl = (b.lo[i] - domain_.lo[i]) / w;
    const double th = (b.hi[i] - domain_.lo[i]) / w;
    double l = std::floor(tl);
    double h = std::ceil(th) - 1.0;
    if (h < l) h = l;
    l = std::clamp(l, 0.0, counts_[i] - 1.0);
    h = std::clamp(h, 0.0, counts_[i] - 1.0);
    lo[i] = static_cast<int>(l);
    hi[i] = static_cast<int>(h);
  }
  for_each_in_range(lo, hi, *this, out);
  return out;
}

std::vector<BoxId> BoxGrid::neighbors(BoxId id) const {
  const Eigen::VectorXi c = multi_index(id);
  Eigen::VectorXi lo(dim()), hi(dim());
  for (int i = 0; i < dim(); ++i) {
    lo[i] = std::max(c[i] - 1, 0);
    hi[i] = std::min(c[i] + 1, counts_[i] - 1);
  }
  std::vector<BoxId> out;
  for_each_in_range(lo, hi, *this, out);
  out.erase(std::remove(out.begin(), out.end(), id), out.end());
  return out;
}

bool BoxGrid::touches_boundary(BoxId id) const {
  const Eigen::VectorXi c = multi_index(id);
  for (int i = 0; i < dim(); ++i)
    if (c[i] == 0 || c[i] == counts_[i] - 1) return true;
  return false;
}

bool operator==(const BoxGrid &a, const BoxGrid &b) {
  return a.counts_ == b.counts_ && a.domain_.lo == b.domain_.lo &&
         a.domain_.hi == b.domain_.hi;
}

BoxGrid build_grid(const Box &domain, double target_width) {
  if (!(target_width > 0)) throw ConfigError("grid.width must be > 0");
  if (domain.dim() < 1 || !domain.is_finite() ||
      !(domain.widths().array() > 0).all())
    throw ConfigError("grid domain must have positive side lengths");
  Eigen::VectorXi counts(domain.dim());
  for (Eigen::Index i = 0; i < domain.dim(); ++i) {
    const double n = std::ceil(domain.widths()[i] / target_width - 1e-9);
    counts[i] = std::max(4, static_cast<int>(n));
  }
  return BoxGrid(domain, counts);
}

BoxGrid subdivide(const BoxGrid &grid, int factor) {
  if (factor < 2) throw UsageError("subdivision factor must be >= 2");
  return BoxGrid(grid.domain(), grid.counts() * factor);
}

RandomBoxSet::RandomBoxSet(BoxGrid grid, int first_fiber, int last_fiber)
    : grid_(std::move(grid)), first_(first_fiber) {
  if (last_fiber < first_fiber) throw UsageError("empty fiber range");
  fibers_.resize(static_cast<std::size_t>(last_fiber - first_fiber + 1));
}

RandomBoxSet RandomBoxSet::full(const BoxGrid &grid, int first, int last) {
  std::vector<BoxId> all(static_cast<std::size_t>(grid.size()));
  for (BoxId i = 0; i < grid.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  return constant(grid, first, last, std::move(all));
}

RandomBoxSet RandomBoxSet::constant(const BoxGrid &grid, int first, int last,
                                    std::vector<BoxId> ids) {
  RandomBoxSet s(grid, first, last);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (auto &f : s.fibers_) f = ids;
  return s;
}

const std::vector<BoxId> &RandomBoxSet::fiber(int k) const {
  if (!has_fiber(k))
    throw UsageError("fiber " + std::to_string(k) + " outside box set range");
  return fibers_[static_cast<std::size_t>(k - first_)];
}

void RandomBoxSet::set_fiber(int k, std::vector<BoxId> ids) {
  if (!has_fiber(k))
    throw UsageError("fiber " + std::to_string(k) + " outside box set range");
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  fibers_[static_cast<std::size_t>(k - first_)] = std::move(ids);
}

bool RandomBoxSet::contains(int k, BoxId id) const {
  if (!has_fiber(k)) return false;
  const auto &f = fibers_[static_cast<std::size_t>(k - first_)];
  return std::binary_search(f.begin(), f.end(), id);
}

bool RandomBoxSet::empty() const {
  return std::all_of(fibers_.begin(), fibers_.end(),
                     [](const auto &f) { return f.empty(); });
}

bool RandomBoxSet::empty_on(int first, int last) const {
  for (int k = std::max(first, first_); k <= std::min(last, last_fiber()); ++k)
    if (!fiber(k).empty()) return false;
  return true;
}

std::size_t RandomBoxSet::box_count() const {
  std::size_t n = 0;
  for (const auto &f : fibers_) n += f.size();
  return n;
}

bool RandomBoxSet::bbox(int k, Box &out) const {
  const auto &f = fiber(k);
  if (f.empty()) return false;
  out = grid_.box(f.front());
  for (BoxId id : f) out = hull(out, grid_.box(id));
  return true;
}

bool operator==(const RandomBoxSet &a, const RandomBoxSet &b) {
  return a.first_ == b.first_ && a.grid_ == b.grid_ && a.fibers_ == b.fibers_;
}

namespace {

void require_compatible(const RandomBoxSet &a, const RandomBoxSet &b) {
  if (!(a.grid() == b.grid()) || a.first_fiber() != b.first_fiber() ||
      a.last_fiber() != b.last_fiber())
    throw UsageError("box sets live on different grids or fiber ranges");
}

template <typename Op>
RandomBoxSet combine(const RandomBoxSet &a, const RandomBoxSet &b, Op op) {
  require_compatible(a, b);
  RandomBoxSet out(a.grid(), a.first_fiber(), a.last_fiber());
  for (int k = a.first_fiber(); k <= a.last_fiber(); ++k) {
    std::vector<BoxId> r;
    op(a.fiber(k), b.fiber(k), r);
    out.set_fiber(k, std::move(r));
  }
  return out;
}

}  // namespace

RandomBoxSet unite(const RandomBoxSet &a, const RandomBoxSet &b) {
  return combine(a, b, [](const auto &x, const auto &y, auto &r) {
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(r));
  });
}

RandomBoxSet intersect(const RandomBoxSet &a, const RandomBoxSet &b) {
  return combine(a, b, [](const auto &x, const auto &y, auto &r) {
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(),
                          std::back_inserter(r));
  });
}

RandomBoxSet subtract(const RandomBoxSet &a, const RandomBoxSet &b) {
  return combine(a, b, [](const auto &x, const auto &y, auto &r) {
    std::set_difference(x.begin(), x.end(), y.begin(), y.end(),
                        std::back_inserter(r));
  });
}

bool subset_of(const RandomBoxSet &a, const RandomBoxSet &b, int first,
               int last) {
  for (int k = first; k <= last; ++k) {
    const auto &x = a.fiber(k);
    const auto &y = b.fiber(k);
    if (!std::includes(y.begin(), y.end(), x.begin(), x.end())) return false;
  }
  return true;
}

RandomBoxSet combinatorial_interior(const RandomBoxSet &n) {
  const BoxGrid &g = n.grid();
  RandomBoxSet out(g, n.first_fiber(), n.last_fiber());
  for (int k = n.first_fiber(); k <= n.last_fiber(); ++k) {
    std::vector<BoxId> keep;
    for (BoxId id : n.fiber(k)) {
      if (g.touches_boundary(id)) continue;
      const auto nb = g.neighbors(id);
      if (std::all_of(nb.begin(), nb.end(),
                      [&](BoxId j) { return n.contains(k, j); }))
        keep.push_back(id);
    }
    out.set_fiber(k, std::move(keep));
  }
  return out;
}

RandomBoxSet dilate(const RandomBoxSet &n, int rings) {
  RandomBoxSet cur = n;
  for (int r = 0; r < rings; ++r) {
    RandomBoxSet next(n.grid(), n.first_fiber(), n.last_fiber());
    for (int k = n.first_fiber(); k <= n.last_fiber(); ++k) {
      std::vector<BoxId> ids = cur.fiber(k);
      for (BoxId id : cur.fiber(k))
        for (BoxId j : n.grid().neighbors(id)) ids.push_back(j);
      next.set_fiber(k, std::move(ids));
    }
    cur = std::move(next);
  }
  return cur;
}

RandomBoxSet dilate_within(const RandomBoxSet &n, const RandomBoxSet &within) {
  return intersect(dilate(n, 1), within);
}

std::vector<BoxId> project(const RandomBoxSet &n, int first, int last) {
  std::vector<BoxId> ids;
  for (int k = first; k <= last; ++k)
    ids.insert(ids.end(), n.fiber(k).begin(), n.fiber(k).end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

RandomBoxSet restrict_fibers(const RandomBoxSet &n, int first, int last) {
  RandomBoxSet out(n.grid(), first, last);
  for (int k = first; k <= last; ++k) out.set_fiber(k, n.fiber(k));
  return out;
}

RandomBoxSet refine(const RandomBoxSet &n, int factor) {
  const BoxGrid fine = subdivide(n.grid(), factor);
  RandomBoxSet out(fine, n.first_fiber(), n.last_fiber());
  for (int k = n.first_fiber(); k <= n.last_fiber(); ++k) {
    std::vector<BoxId> ids;
    for (BoxId id : n.fiber(k)) {
      const Eigen::VectorXi lo = n.grid().multi_index(id) * factor;
      const Eigen::VectorXi hi = lo.array() + (factor - 1);
      std::vector<BoxId> kids;
      for_each_in_range(lo, hi, fine, kids);
      ids.insert(ids.end(), kids.begin(), kids.end());
    }
    out.set_fiber(k, std::move(ids));
  }
  return out;
}

double volume(const RandomBoxSet &n, int first, int last) {
  const double cell = n.grid().widths().prod();
  double v = 0.0;
  for (int k = first; k <= last; ++k) v += cell * static_cast<double>(n.fiber(k).size());
  return v;
}

}  // namespace conleybif
