#include "conleybif/system.hpp"

#include "conleybif/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace conleybif {

namespace {

constexpr double kDivergenceBound = 1e8;

double checked(double v) {
  if (!std::isfinite(v) || std::abs(v) > kDivergenceBound)
    throw DivergenceError("trajectory left the bounded region");
  return v;
}

Box outward(double lo, double hi, double abs_slack = 0.0) {
  return inflate(box1(lo, hi), abs_slack);
}

// x + x^2 + lambda xi for x >= -1/2, -x/2 + lambda xi for x < -1/2.
class Example1Map final : public RandomMap {
 public:
  explicit Example1Map(double lambda) : lambda_(lambda) {}

  int dim() const override { return 1; }

  Point forward(int, double xi, const Point &x) const override {
    const double c = lambda_ * xi;
    const double v = x[0];
    return point1(checked(v >= -0.5 ? v + v * v + c : -0.5 * v + c));
  }

  // The increasing branch x >= -1/2 is preferred when both branches have a
  // preimage.
  Point backward(int, double xi, const Point &y) const override {
    const double c = lambda_ * xi;
    const double u = y[0] - c;
    const double disc = 1.0 + 4.0 * u;
    if (disc >= 0.0) return point1((-1.0 + std::sqrt(disc)) / 2.0);
    if (u > 0.25) return point1(-2.0 * u);
    throw NoPreimageError("no preimage in either branch");
  }

  std::optional<Box> enclose(int, double xi, const Box &b) const override {
    const double c = lambda_ * xi;
    const double a = b.lo[0];
    const double e = b.hi[0];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (e >= -0.5) {
      const double s = std::max(a, -0.5);
      lo = std::min(lo, s + s * s + c);
      hi = std::max(hi, e + e * e + c);
    }
    if (a < -0.5) {
      const double t = std::min(e, -0.5);
      lo = std::min(lo, -0.5 * t + c);
      hi = std::max(hi, -0.5 * a + c);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) return std::nullopt;
    return outward(lo, hi);
  }

  // The branches meet with a jump at -1/2, so each keeps its own piece.
  std::optional<std::vector<Box>> enclose_pieces(int, double xi,
                                                 const Box &b) const override {
    const double c = lambda_ * xi;
    const double a = b.lo[0];
    const double e = b.hi[0];
    std::vector<Box> out;
    if (e >= -0.5) {
      const double s = std::max(a, -0.5);
      out.push_back(outward(s + s * s + c, e + e * e + c));
    }
    if (a < -0.5) {
      const double t = std::min(e, -0.5);
      out.push_back(outward(-0.5 * t + c, -0.5 * a + c));
    }
    for (const Box &p : out)
      if (!p.is_finite()) return std::nullopt;
    return out;
  }

 private:
  double lambda_;
};

// Scalar random ODE x' = rate(x, xi) with the noise symbol frozen over the
// unit interval; time-one map by fixed-step RK4.
class ScalarOdeMap : public RandomMap {
 public:
  ScalarOdeMap(int substeps, EnclosureSettings encl)
      : substeps_(substeps), encl_(encl) {}

  int dim() const override { return 1; }

  Point forward(int, double xi, const Point &x) const override {
    return point1(integrate(x[0], xi, 1.0));
  }

  Point backward(int, double xi, const Point &y) const override {
    return point1(integrate(y[0], xi, -1.0));
  }

  // Exact mode relies on scalar flows being order preserving, so the image
  // of [a, b] is [phi(a), phi(b)] up to integrator error.
  // A diverging endpoint next to a finite one stretches the image to the
  // far side, since the finite endpoint bounds it from the other.
  std::optional<Box> enclose(int, double xi, const Box &b) const override {
    auto endpoint = [&](double x) -> std::optional<double> {
      try {
        return integrate(x, xi, 1.0);
      } catch (const DivergenceError &) {
        return std::nullopt;
      }
    };
    const auto ya = endpoint(b.lo[0]);
    const auto yb = endpoint(b.hi[0]);
    if (!ya && !yb) return std::nullopt;
    if (!ya || !yb) {
      const double far = 1e12;
      return ya ? box1(*ya, far) : box1(-far, *yb);
    }
    Box img = box1(std::min(*ya, *yb), std::max(*ya, *yb));
    if (encl_.mode == EnclosureSettings::Mode::Lipschitz) {
      const double c = 0.5 * (b.lo[0] + b.hi[0]);
      if (const auto yc = endpoint(c)) {
        const double r = encl_.lipschitz * 0.5 * (b.hi[0] - b.lo[0]);
        img = hull(img, box1(*yc - r, *yc + r));
      }
    }
    return inflate(img, encl_.ode_tol);
  }

 protected:
  virtual double rate(double x, double xi) const = 0;

 private:
  double integrate(double x, double xi, double direction) const {
    const double h = direction / substeps_;
    for (int i = 0; i < substeps_; ++i) {
      const double k1 = rate(x, xi);
      const double k2 = rate(x + 0.5 * h * k1, xi);
      const double k3 = rate(x + 0.5 * h * k2, xi);
      const double k4 = rate(x + h * k3, xi);
      x = checked(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    return x;
  }

  int substeps_;
  EnclosureSettings encl_;
};

class PitchforkMap final : public ScalarOdeMap {
 public:
  PitchforkMap(double lambda, double eps, int substeps, EnclosureSettings e)
      : ScalarOdeMap(substeps, e), lambda_(lambda), eps_(eps) {}

 protected:
  double rate(double x, double xi) const override {
    return lambda_ * x - x * x * x + eps_ * xi;
  }

 private:
  double lambda_, eps_;
};

class SubcriticalMap final : public ScalarOdeMap {
 public:
  SubcriticalMap(double lambda, double eps, int substeps, EnclosureSettings e)
      : ScalarOdeMap(substeps, e), lambda_(lambda), eps_(eps) {}

 protected:
  double rate(double x, double xi) const override {
    return lambda_ * x + x * x * x + eps_ * xi;
  }

 private:
  double lambda_, eps_;
};

class IdentityMap final : public RandomMap {
 public:
  explicit IdentityMap(int d) : d_(d) {}
  int dim() const override { return d_; }
  Point forward(int, double, const Point &x) const override { return x; }
  Point backward(int, double, const Point &y) const override { return y; }
  std::optional<Box> enclose(int, double, const Box &b) const override {
    return b;
  }

 private:
  int d_;
};

struct Piece {
  std::size_t first, last;  // inclusive row range
};

std::vector<Piece> pieces_of(const MapTable &t) {
  std::vector<Piece> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= t.x.size(); ++i) {
    if (i == t.x.size() || t.piece[i] != t.piece[start]) {
      out.push_back({start, i - 1});
      start = i;
    }
  }
  return out;
}

double lerp_at(const MapTable &t, const Piece &p, double x) {
  if (p.first == p.last) return t.fx[p.first];
  std::size_t i = p.first;
  while (i + 1 < p.last && t.x[i + 1] < x) ++i;
  const double span = t.x[i + 1] - t.x[i];
  const double s = span > 0 ? (x - t.x[i]) / span : 0.0;
  return t.fx[i] + s * (t.fx[i + 1] - t.fx[i]);
}

class TabulatedMap final : public RandomMap {
 public:
  explicit TabulatedMap(TableSet tables) : tables_(std::move(tables)) {
    for (auto &[xi, t] : tables_) pieces_.push_back(pieces_of(t));
  }

  int dim() const override { return 1; }

  Point forward(int, double xi, const Point &x) const override {
    const std::size_t ti = table_for(xi);
    const MapTable &t = tables_[ti].second;
    const double v = x[0];
    const auto &ps = pieces_[ti];
    for (auto it = ps.rbegin(); it != ps.rend(); ++it)
      if (v >= t.x[it->first] && v <= t.x[it->last])
        return point1(lerp_at(t, *it, v));
    throw DivergenceError("point outside the tabulated range");
  }

  Point backward(int, double xi, const Point &y) const override {
    const std::size_t ti = table_for(xi);
    const MapTable &t = tables_[ti].second;
    const double v = y[0];
    const auto &ps = pieces_[ti];
    for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
      for (std::size_t i = it->first; i < it->last; ++i) {
        const double f0 = t.fx[i], f1 = t.fx[i + 1];
        if (v >= std::min(f0, f1) && v <= std::max(f0, f1)) {
          if (f0 == f1) return point1(t.x[i]);
          return point1(t.x[i] + (v - f0) / (f1 - f0) * (t.x[i + 1] - t.x[i]));
        }
      }
    }
    throw NoPreimageError("no tabulated branch reaches the point");
  }

  std::optional<Box> enclose(int, double xi, const Box &b) const override {
    const std::size_t ti = table_for(xi);
    const MapTable &t = tables_[ti].second;
    const double a = b.lo[0], e = b.hi[0];
    if (a < t.x.front() || e > t.x.back()) return std::nullopt;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Piece &p : pieces_[ti]) {
      const double s = std::max(a, t.x[p.first]);
      const double u = std::min(e, t.x[p.last]);
      if (s > u) continue;
      for (double v : {lerp_at(t, p, s), lerp_at(t, p, u)}) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      for (std::size_t i = p.first; i <= p.last; ++i)
        if (t.x[i] > s && t.x[i] < u) {
          lo = std::min(lo, t.fx[i]);
          hi = std::max(hi, t.fx[i]);
        }
    }
    if (!std::isfinite(lo)) return std::nullopt;
    return outward(lo, hi);
  }

 private:
  std::size_t table_for(double xi) const {
    for (std::size_t i = 0; i < tables_.size(); ++i)
      if (std::abs(tables_[i].first - xi) <= 1e-12) return i;
    throw UsageError("no map table tabulated at noise value " +
                     std::to_string(xi));
  }

  TableSet tables_;
  std::vector<std::vector<Piece>> pieces_;
};

double table_lerp(const std::vector<double> &xs, const std::vector<double> &ys,
                  double x) {
  // xs strictly increasing; linear extrapolation past both ends.
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  i = std::min(i, xs.size() - 2);
  const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + s * (ys[i + 1] - ys[i]);
}

}  // namespace

void SystemDef::validate() const {
  if (domain.dim() < 1 || domain.dim() > 3)
    throw ConfigError("domain dimension must be 1, 2 or 3");
  if (!domain.is_finite() || !(domain.widths().array() > 0).all())
    throw ConfigError("domain must have positive side lengths");
  if (!std::isfinite(lambda)) throw ConfigError("lambda must be finite");
  if (kind == SystemKind::RandomOde && ode_substeps < 8)
    throw ConfigError("system.ode_substeps must be >= 8");
  if (encl.mode == EnclosureSettings::Mode::Lipschitz && !(encl.lipschitz > 0))
    throw ConfigError("encl.lipschitz must be > 0 in lipschitz mode");
  if (!map) throw ConfigError("system has no map");
  if (map->dim() != dim())
    throw ConfigError("map dimension does not match the domain");
  noise.validate();
}

ConjugacyDef ConjugacyDef::affine(double a, double b) {
  ConjugacyDef c;
  c.a = a;
  c.b = b;
  return c;
}

ConjugacyDef ConjugacyDef::tabulated(std::vector<double> x,
                                     std::vector<double> y) {
  ConjugacyDef c;
  c.kind = Kind::Tabulated;
  c.table_x = std::move(x);
  c.table_y = std::move(y);
  return c;
}

void ConjugacyDef::validate() const {
  auto check = [](double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || a == 0.0)
      throw ConfigError("affine conjugacy needs finite a != 0");
  };
  if (kind == Kind::Affine) {
    check(a, b);
    for (const auto &[k, ab] : per_fiber) check(ab.first, ab.second);
    return;
  }
  if (table_x.size() < 2 || table_x.size() != table_y.size())
    throw ConfigError("tabulated conjugacy needs >= 2 matching rows");
  bool up = table_y[1] > table_y[0];
  for (std::size_t i = 1; i < table_x.size(); ++i) {
    if (!(table_x[i] > table_x[i - 1]))
      throw ConfigError("tabulated conjugacy x must be strictly increasing");
    if (up ? !(table_y[i] > table_y[i - 1]) : !(table_y[i] < table_y[i - 1]))
      throw ConfigError("tabulated conjugacy must be strictly monotone");
  }
}

std::pair<double, double> ConjugacyDef::coefficients(int fiber) const {
  auto it = per_fiber.find(fiber);
  return it == per_fiber.end() ? std::make_pair(a, b) : it->second;
}

Point ConjugacyDef::apply(int fiber, const Point &x) const {
  if (kind == Kind::Affine) {
    auto [ak, bk] = coefficients(fiber);
    return (ak * x.array() + bk).matrix();
  }
  Point y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    y[i] = table_lerp(table_x, table_y, x[i]);
  return y;
}

Point ConjugacyDef::invert(int fiber, const Point &y) const {
  if (kind == Kind::Affine) {
    auto [ak, bk] = coefficients(fiber);
    return ((y.array() - bk) / ak).matrix();
  }
  const bool up = table_y.back() > table_y.front();
  std::vector<double> ys = table_y, xs = table_x;
  if (!up) {
    std::reverse(ys.begin(), ys.end());
    std::reverse(xs.begin(), xs.end());
  }
  Point x(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) x[i] = table_lerp(ys, xs, y[i]);
  return x;
}

Box ConjugacyDef::apply(int fiber, const Box &b) const {
  Point p = apply(fiber, b.lo), q = apply(fiber, b.hi);
  return inflate(Box(p.cwiseMin(q), p.cwiseMax(q)), 0.0);
}

Box ConjugacyDef::invert(int fiber, const Box &b) const {
  Point p = invert(fiber, b.lo), q = invert(fiber, b.hi);
  return inflate(Box(p.cwiseMin(q), p.cwiseMax(q)), 0.0);
}

ConjugacyDef ConjugacyDef::inverse() const {
  if (kind == Kind::Tabulated) {
    ConjugacyDef c = *this;
    c.table_x = table_y;
    c.table_y = table_x;
    if (c.table_x.front() > c.table_x.back()) {
      std::reverse(c.table_x.begin(), c.table_x.end());
      std::reverse(c.table_y.begin(), c.table_y.end());
    }
    return c;
  }
  ConjugacyDef c = affine(1.0 / a, -b / a);
  for (const auto &[k, ab] : per_fiber)
    c.per_fiber[k] = {1.0 / ab.first, -ab.second / ab.first};
  return c;
}

void MapTable::validate() const {
  if (x.size() < 2 || fx.size() != x.size() || piece.size() != x.size())
    throw ConfigError("map table needs >= 2 rows with x, fx, piece");
  for (std::size_t i = 1; i < x.size(); ++i) {
    const bool same_piece = piece[i] == piece[i - 1];
    if (same_piece ? !(x[i] > x[i - 1]) : !(x[i] >= x[i - 1]))
      throw ConfigError("map table x must increase within each piece");
  }
  for (const Piece &p : pieces_of(*this)) {
    int sign = 0;
    for (std::size_t i = p.first; i < p.last; ++i) {
      const double d = fx[i + 1] - fx[i];
      const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
      if (s != 0 && sign != 0 && s != sign)
        throw ConfigError("map table piece is not monotone");
      if (s != 0) sign = s;
    }
  }
}

SystemDef make_example1(double lambda, NoiseModel noise, Box domain) {
  SystemDef s;
  s.kind = SystemKind::DiscreteMap;
  s.family_id = "example1";
  s.lambda = lambda;
  s.domain = std::move(domain);
  s.noise = std::move(noise);
  s.map = std::make_shared<Example1Map>(lambda);
  return s;
}

SystemDef make_pitchfork(double lambda, NoiseModel noise, Box domain,
                         double epsilon, int substeps, EnclosureSettings encl) {
  SystemDef s;
  s.kind = SystemKind::RandomOde;
  s.family_id = "pitchfork";
  s.lambda = lambda;
  s.domain = std::move(domain);
  s.noise = std::move(noise);
  s.ode_substeps = substeps;
  s.epsilon = epsilon;
  s.encl = encl;
  s.map = std::make_shared<PitchforkMap>(lambda, epsilon, substeps, encl);
  return s;
}

SystemDef make_subcritical(double lambda, NoiseModel noise, Box domain,
                           double epsilon, int substeps,
                           EnclosureSettings encl) {
  SystemDef s = make_pitchfork(lambda, std::move(noise), std::move(domain),
                               epsilon, substeps, encl);
  s.family_id = "subcritical";
  s.map = std::make_shared<SubcriticalMap>(lambda, epsilon, substeps, encl);
  return s;
}

SystemDef make_identity(Box domain) {
  SystemDef s;
  s.family_id = "identity";
  const int d = static_cast<int>(domain.dim());
  s.domain = std::move(domain);
  s.noise = NoiseModel::constant(0.0);
  s.map = std::make_shared<IdentityMap>(d);
  return s;
}

SystemDef make_tabulated(double lambda, NoiseModel noise, Box domain,
                         TableSet tables) {
  if (tables.empty()) throw ConfigError("no map tables for lambda");
  for (auto &[xi, t] : tables) t.validate();
  SystemDef s;
  s.family_id = "tabulated";
  s.lambda = lambda;
  s.domain = std::move(domain);
  s.noise = std::move(noise);
  s.map = std::make_shared<TabulatedMap>(std::move(tables));
  return s;
}

SystemDef make_custom(std::string family_id, Box domain, NoiseModel noise,
                      std::shared_ptr<const RandomMap> map, SystemKind kind) {
  SystemDef s;
  s.kind = kind;
  s.family_id = std::move(family_id);
  s.domain = std::move(domain);
  s.noise = std::move(noise);
  s.map = std::move(map);
  return s;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t") + 1);
      cells.push_back(cell);
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_double(const std::string &s, const std::string &where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ConfigError(where + ": not a number: '" + s + "'");
  }
}

}  // namespace

MapTable read_map_table(const std::string &path) {
  auto rows = read_csv(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "x" ||
      rows[0][1] != "fx")
    throw ConfigError(path + ": expected header x,fx[,piece]");
  const bool has_piece = rows[0].size() >= 3 && rows[0][2] == "piece";
  MapTable t;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string where = path + ":" + std::to_string(i + 1);
    if (rows[i].size() < (has_piece ? 3u : 2u))
      throw ConfigError(where + ": missing column");
    t.x.push_back(to_double(rows[i][0], where));
    t.fx.push_back(to_double(rows[i][1], where));
    t.piece.push_back(has_piece ? static_cast<int>(to_double(rows[i][2], where)) : 0);
  }
  t.validate();
  return t;
}

TableSet read_table_manifest(const std::string &path, double lambda) {
  auto rows = read_csv(path);
  if (rows.empty() || rows[0].size() < 3 || rows[0][0] != "lambda" ||
      rows[0][1] != "xi" || rows[0][2] != "file")
    throw ConfigError(path + ": expected header lambda,xi,file");
  const auto base = std::filesystem::path(path).parent_path();
  TableSet out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string where = path + ":" + std::to_string(i + 1);
    if (rows[i].size() < 3) throw ConfigError(where + ": missing column");
    if (std::abs(to_double(rows[i][0], where) - lambda) > 1e-12) continue;
    std::filesystem::path file = rows[i][2];
    if (file.is_relative()) file = base / file;
    out.emplace_back(to_double(rows[i][1], where), read_map_table(file.string()));
  }
  if (out.empty())
    throw ConfigError(path + ": no tables for lambda " + std::to_string(lambda));
  return out;
}

}  // namespace conleybif
