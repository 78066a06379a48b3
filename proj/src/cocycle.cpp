#include "conleybif/cocycle.hpp"

#include "conleybif/errors.hpp"

#include <cmath>
#include <random>

namespace conleybif {

Point time_one_map(const SystemDef &sys, const NoisePath &path, int k,
                   const Point &x) {
  const double xi = path.symbol_at(k);
  return sys.map->forward(k + path.offset(), xi, x);
}

Point inverse_time_one_map(const SystemDef &sys, const NoisePath &path, int k,
                           const Point &y) {
  const double xi = path.symbol_at(k);
  return sys.map->backward(k + path.offset(), xi, y);
}

Point cocycle_eval(const SystemDef &sys, const NoisePath &path, int n,
                   const Point &x) {
  Point y = x;
  if (n >= 0) {
    for (int j = 0; j < n; ++j) y = time_one_map(sys, path, j, y);
  } else {
    for (int j = -1; j >= n; --j) y = inverse_time_one_map(sys, path, j, y);
  }
  return y;
}

namespace {

Point sample_in(const Box &b, std::mt19937_64 &gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point x(b.dim());
  for (Eigen::Index i = 0; i < b.dim(); ++i)
    x[i] = b.lo[i] + u(gen) * (b.hi[i] - b.lo[i]);
  return x;
}

}  // namespace

LawReport check_cocycle_property(const SystemDef &sys, const NoisePath &path,
                                 int trials, double tol, int max_steps,
                                 std::uint64_t seed) {
  if (trials < 1) throw UsageError("trials must be >= 1");
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> steps(0, max_steps);
  std::bernoulli_distribution backward(0.5);
  LawReport rep;
  for (int i = 0; i < trials; ++i) {
    const int sign = backward(gen) ? -1 : 1;
    const int s = sign * steps(gen);
    const int t = sign * steps(gen);
    const Point x = sample_in(sys.domain, gen);
    try {
      const Point direct = cocycle_eval(sys, path, t + s, x);
      const Point split =
          cocycle_eval(sys, shift(path, s), t, cocycle_eval(sys, path, s, x));
      rep.max_defect = std::max(rep.max_defect, (direct - split).norm());
      ++rep.checked;
    } catch (const DivergenceError &) {
      ++rep.skipped;
    } catch (const NoPreimageError &) {
      ++rep.skipped;
    } catch (const WindowExhausted &) {
      ++rep.skipped;
    }
  }
  rep.pass = rep.max_defect <= tol;
  return rep;
}

LawReport check_conjugacy(const SystemDef &sys1, const SystemDef &sys2,
                          const ConjugacyDef &alpha, const NoisePath &path,
                          int samples, double tol, int max_steps,
                          std::uint64_t seed) {
  if (samples < 1) throw UsageError("samples must be >= 1");
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> steps(0, max_steps);
  LawReport rep;
  const int o = path.offset();
  for (int i = 0; i < samples; ++i) {
    const int t = steps(gen);
    const Point x = sample_in(sys1.domain, gen);
    try {
      const Point lhs = cocycle_eval(sys2, path, t, alpha.apply(o, x));
      const Point rhs = alpha.apply(o + t, cocycle_eval(sys1, path, t, x));
      rep.max_defect = std::max(rep.max_defect, (lhs - rhs).norm());
      ++rep.checked;
    } catch (const DivergenceError &) {
      ++rep.skipped;
    } catch (const NoPreimageError &) {
      ++rep.skipped;
    } catch (const WindowExhausted &) {
      ++rep.skipped;
    }
  }
  rep.pass = rep.max_defect <= tol;
  return rep;
}

namespace {

class ConjugatedMap final : public RandomMap {
 public:
  ConjugatedMap(std::shared_ptr<const RandomMap> base, ConjugacyDef alpha)
      : base_(std::move(base)), alpha_(std::move(alpha)) {}

  int dim() const override { return base_->dim(); }

  Point forward(int k, double xi, const Point &y) const override {
    return alpha_.apply(k + 1, base_->forward(k, xi, alpha_.invert(k, y)));
  }

  Point backward(int k, double xi, const Point &z) const override {
    return alpha_.apply(k, base_->backward(k, xi, alpha_.invert(k + 1, z)));
  }

  std::optional<Box> enclose(int k, double xi, const Box &b) const override {
    auto img = base_->enclose(k, xi, alpha_.invert(k, b));
    if (!img) return std::nullopt;
    return alpha_.apply(k + 1, *img);
  }

  std::optional<std::vector<Box>> enclose_pieces(int k, double xi,
                                                 const Box &b) const override {
    auto pieces = base_->enclose_pieces(k, xi, alpha_.invert(k, b));
    if (!pieces) return std::nullopt;
    for (Box &p : *pieces) p = alpha_.apply(k + 1, p);
    return pieces;
  }

 private:
  std::shared_ptr<const RandomMap> base_;
  ConjugacyDef alpha_;
};

}  // namespace

SystemDef conjugate_system(const SystemDef &sys, const ConjugacyDef &alpha,
                           double grid_width) {
  try {
    alpha.validate();
  } catch (const ConfigError &e) {
    throw ConfigError(std::string("non-invertible conjugacy: ") + e.what());
  }
  Box dom = alpha.apply(0, sys.domain);
  for (const auto &[k, ab] : alpha.per_fiber)
    dom = hull(dom, alpha.apply(k, sys.domain));
  if (grid_width > 0) {
    for (Eigen::Index i = 0; i < dom.dim(); ++i) {
      // Small tolerance so exact multiples are not pushed out a full cell.
      dom.lo[i] = std::floor(dom.lo[i] / grid_width + 1e-9) * grid_width;
      dom.hi[i] = std::ceil(dom.hi[i] / grid_width - 1e-9) * grid_width;
    }
  }
  SystemDef out = sys;
  out.family_id = sys.family_id + "+conjugated";
  out.domain = dom;
  out.map = std::make_shared<ConjugatedMap>(sys.map, alpha);
  return out;
}

}  // namespace conleybif
