#ifndef CONLEYBIF_SYSTEM_HPP
#define CONLEYBIF_SYSTEM_HPP

#include "conleybif/noise.hpp"
#include "conleybif/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace conleybif {

/// One step of a random map, parameterized by the absolute fiber index and
/// the noise symbol of that fiber. Implementations are immutable and must be
/// safe to call concurrently.
class RandomMap {
 public:
  virtual ~RandomMap() = default;

  virtual int dim() const = 0;

  /// phi(1, theta_k omega, x). Throws DivergenceError.
  virtual Point forward(int fiber, double xi, const Point &x) const = 0;

  /// Inverse of forward() at the same fiber. Throws NoPreimageError or
  /// DivergenceError.
  virtual Point backward(int fiber, double xi, const Point &y) const = 0;

  /// Box guaranteed to contain forward(fiber, xi, b); nullopt when the image
  /// is unbounded.
  virtual std::optional<Box> enclose(int fiber, double xi,
                                     const Box &b) const = 0;

  /// Boxes whose union contains the image; maps with jumps override this to
  /// avoid bridging the gap. Defaults to the single enclosure.
  virtual std::optional<std::vector<Box>> enclose_pieces(int fiber, double xi,
                                                         const Box &b) const {
    auto img = enclose(fiber, xi, b);
    if (!img) return std::nullopt;
    return std::vector<Box>{*img};
  }
};

enum class SystemKind { DiscreteMap, RandomOde };

struct EnclosureSettings {
  enum class Mode { Exact, Lipschitz };
  Mode mode = Mode::Exact;
  double lipschitz = 0.0;  // required > 0 in Lipschitz mode
  double ode_tol = 1e-7;
};

/// Parameterized random dynamical system: a family member at fixed lambda,
/// its compact search domain, and the noise law driving it.
struct SystemDef {
  SystemKind kind = SystemKind::DiscreteMap;
  std::string family_id;
  double lambda = 0.0;
  Box domain;
  NoiseModel noise;
  int ode_substeps = 64;
  double epsilon = 0.0;  // ODE noise amplitude
  EnclosureSettings encl;
  std::shared_ptr<const RandomMap> map;

  int dim() const { return static_cast<int>(domain.dim()); }
  void validate() const;
};

/// alpha(omega, x): per-fiber affine a_k x + b_k (coordinatewise), or a
/// fiber-independent strictly monotone 1D table with its tabulated inverse.
struct ConjugacyDef {
  enum class Kind { Affine, Tabulated };
  Kind kind = Kind::Affine;

  double a = 1.0;
  double b = 0.0;
  std::map<int, std::pair<double, double>> per_fiber;  // overrides (a, b)

  std::vector<double> table_x;
  std::vector<double> table_y;

  static ConjugacyDef identity() { return {}; }
  static ConjugacyDef affine(double a, double b);
  static ConjugacyDef tabulated(std::vector<double> x, std::vector<double> y);

  void validate() const;

  std::pair<double, double> coefficients(int fiber) const;
  Point apply(int fiber, const Point &x) const;
  Point invert(int fiber, const Point &y) const;
  Box apply(int fiber, const Box &b) const;
  Box invert(int fiber, const Box &b) const;

  /// The affine inverse alpha^{-1}; only defined for affine conjugacies.
  ConjugacyDef inverse() const;
};

/// Monotone piecewise-linear 1D table. Consecutive rows sharing a piece id
/// form one monotone branch; a jump is two rows at the same x with different
/// piece ids.
struct MapTable {
  std::vector<double> x;
  std::vector<double> fx;
  std::vector<int> piece;

  void validate() const;
};

/// Tables for one lambda, keyed by the noise symbol they were tabulated at.
using TableSet = std::vector<std::pair<double, MapTable>>;

// Builtin families.
SystemDef make_example1(double lambda, NoiseModel noise, Box domain = box1(-1, 1));
SystemDef make_pitchfork(double lambda, NoiseModel noise, Box domain = box1(-1.2, 1.2),
                         double epsilon = 0.0, int substeps = 64,
                         EnclosureSettings encl = {});
SystemDef make_subcritical(double lambda, NoiseModel noise, Box domain = box1(-1, 1),
                           double epsilon = 0.0, int substeps = 64,
                           EnclosureSettings encl = {});
SystemDef make_identity(Box domain);
SystemDef make_tabulated(double lambda, NoiseModel noise, Box domain, TableSet tables);
SystemDef make_custom(std::string family_id, Box domain, NoiseModel noise,
                      std::shared_ptr<const RandomMap> map,
                      SystemKind kind = SystemKind::DiscreteMap);

/// Reads a CSV with header x,fx[,piece].
MapTable read_map_table(const std::string &path);

/// Reads a manifest CSV (lambda,xi,file) and keeps the rows for `lambda`.
/// Relative file names resolve against the manifest's directory.
TableSet read_table_manifest(const std::string &path, double lambda);

}  // namespace conleybif

#endif  // CONLEYBIF_SYSTEM_HPP
