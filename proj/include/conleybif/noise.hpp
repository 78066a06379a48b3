#ifndef CONLEYBIF_NOISE_HPP
#define CONLEYBIF_NOISE_HPP

#include <cstdint>
#include <memory>
#include <vector>

namespace conleybif {

/// Distribution of the i.i.d. noise symbol drawn per time fiber.
struct NoiseModel {
  enum class Kind { Constant, Uniform, Discrete };

  Kind kind = Kind::Constant;
  double lo = 1.0;  // support; constant(c) has lo == hi == c
  double hi = 1.0;
  std::vector<double> values;   // Discrete only
  std::vector<double> weights;  // Discrete only, sums to 1

  static NoiseModel constant(double c);
  static NoiseModel uniform(double lo, double hi);
  static NoiseModel discrete(std::vector<double> values,
                             std::vector<double> weights);

  /// Throws ConfigError when the model is ill-formed.
  void validate() const;
  bool in_support(double v) const { return v >= lo && v <= hi; }
};

/// A realization omega restricted to the window [-K, K], viewed at a shift
/// position. The driving flow acts by shifting the view.
class NoisePath {
 public:
  NoisePath() = default;

  int window_radius() const { return radius_; }
  int offset() const { return offset_; }
  std::uint64_t seed() const { return seed_; }
  const NoiseModel &model() const { return *model_; }

  /// Raw symbols xi_{-K..K}, independent of the view offset.
  const std::vector<double> &symbols() const { return *symbols_; }

  /// xi_{k + offset}; throws WindowExhausted outside the window.
  double symbol_at(int k) const;
  bool in_window(int k) const;

  friend NoisePath sample_path(const NoiseModel &model, int radius,
                               std::uint64_t seed);
  friend NoisePath shift(const NoisePath &path, int t);

  friend bool operator==(const NoisePath &a, const NoisePath &b);

 private:
  std::shared_ptr<const std::vector<double>> symbols_;
  std::shared_ptr<const NoiseModel> model_;
  int radius_ = 0;
  int offset_ = 0;
  std::uint64_t seed_ = 0;
};

/// 2K+1 i.i.d. draws, a pure function of (model, radius, seed).
NoisePath sample_path(const NoiseModel &model, int radius, std::uint64_t seed);

/// theta_t: advances the view by t; fails loudly past the window edge.
NoisePath shift(const NoisePath &path, int t);

}  // namespace conleybif

#endif  // CONLEYBIF_NOISE_HPP
