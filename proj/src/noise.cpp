#include "conleybif/noise.hpp"

#include "conleybif/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <string>

namespace conleybif {

NoiseModel NoiseModel::constant(double c) {
  NoiseModel m;
  m.kind = Kind::Constant;
  m.lo = m.hi = c;
  return m;
}

NoiseModel NoiseModel::uniform(double lo, double hi) {
  NoiseModel m;
  m.kind = Kind::Uniform;
  m.lo = lo;
  m.hi = hi;
  return m;
}

NoiseModel NoiseModel::discrete(std::vector<double> values,
                                std::vector<double> weights) {
  NoiseModel m;
  m.kind = Kind::Discrete;
  m.values = std::move(values);
  m.weights = std::move(weights);
  if (!m.values.empty()) {
    auto [mn, mx] = std::minmax_element(m.values.begin(), m.values.end());
    m.lo = *mn;
    m.hi = *mx;
  }
  return m;
}

void NoiseModel::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("noise support must be bounded");
  if (lo > hi) throw ConfigError("noise.lo must be <= noise.hi");
  switch (kind) {
    case Kind::Constant:
      if (lo != hi) throw ConfigError("constant noise must have lo == hi");
      break;
    case Kind::Uniform:
      break;
    case Kind::Discrete: {
      if (values.empty()) throw ConfigError("discrete noise needs values");
      if (values.size() != weights.size())
        throw ConfigError("noise.values and noise.weights differ in length");
      double total = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0)) throw ConfigError("noise.weights must be >= 0");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw ConfigError("noise.weights must sum to 1");
      for (double v : values)
        if (!std::isfinite(v)) throw ConfigError("noise.values must be finite");
      break;
    }
  }
}

namespace {

// 53 random bits mapped to [0, 1); portable across standard libraries.
double unit_draw(std::mt19937_64 &gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

NoisePath sample_path(const NoiseModel &model, int radius, std::uint64_t seed) {
  if (radius < 1) throw ConfigError("noise.K must be >= 1");
  model.validate();

  std::mt19937_64 gen(seed);
  auto symbols = std::make_shared<std::vector<double>>();
  symbols->reserve(2 * static_cast<std::size_t>(radius) + 1);
  std::vector<double> cumulative;
  if (model.kind == NoiseModel::Kind::Discrete) {
    cumulative.resize(model.weights.size());
    std::partial_sum(model.weights.begin(), model.weights.end(),
                     cumulative.begin());
  }
  for (int k = -radius; k <= radius; ++k) {
    double u = unit_draw(gen);
    switch (model.kind) {
      case NoiseModel::Kind::Constant:
        symbols->push_back(model.lo);
        break;
      case NoiseModel::Kind::Uniform:
        symbols->push_back(std::clamp(model.lo + (model.hi - model.lo) * u,
                                      model.lo, model.hi));
        break;
      case NoiseModel::Kind::Discrete: {
        std::size_t i = 0;
        while (i + 1 < cumulative.size() && u >= cumulative[i]) ++i;
        symbols->push_back(model.values[i]);
        break;
      }
    }
  }

  NoisePath p;
  p.symbols_ = std::move(symbols);
  p.model_ = std::make_shared<const NoiseModel>(model);
  p.radius_ = radius;
  p.offset_ = 0;
  p.seed_ = seed;
  return p;
}

NoisePath shift(const NoisePath &path, int t) {
  long next = static_cast<long>(path.offset_) + t;
  if (std::labs(next) > path.radius_)
    throw WindowExhausted("shift by " + std::to_string(t) +
                          " leaves the noise window of radius " +
                          std::to_string(path.radius_));
  NoisePath p = path;
  p.offset_ = static_cast<int>(next);
  return p;
}

bool NoisePath::in_window(int k) const {
  return std::labs(static_cast<long>(k) + offset_) <= radius_;
}

double NoisePath::symbol_at(int k) const {
  if (!symbols_ || !in_window(k))
    throw WindowExhausted("noise index " + std::to_string(k) +
                          " (offset " + std::to_string(offset_) +
                          ") outside window radius " + std::to_string(radius_));
  return (*symbols_)[static_cast<std::size_t>(k + offset_ + radius_)];
}

bool operator==(const NoisePath &a, const NoisePath &b) {
  if (a.radius_ != b.radius_ || a.offset_ != b.offset_) return false;
  if (a.symbols_ == b.symbols_) return true;
  if (!a.symbols_ || !b.symbols_) return false;
  return *a.symbols_ == *b.symbols_;
}

}  // namespace conleybif
