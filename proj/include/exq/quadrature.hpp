#pragma once

// Tensor-product quadrature on closed charts.
//
// Periodic axes use the trapezoid rule, which is spectrally accurate for
// smooth periodic integrands. Polar axes use Gauss–Legendre in the angle
// itself; the sphere measure sin^k(θ) is part of √det g and is integrated
// with the rest of the integrand. Interval axes are rejected.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "exq/geometry.hpp"

namespace exq {

/// Nodes per axis. A zero count defers to the axis hint (Axis::nodes) and
/// then to default_node_counts(dim).
struct NodeCounts {
  int periodic = 0;
  int polar = 0;
};

/// Per-axis defaults sized so a full tensor grid stays around 10⁴ nodes:
/// 32 periodic / 48 polar up to two dimensions, fewer beyond.
NodeCounts default_node_counts(int dim);

class Quadrature {
 public:
  Quadrature(const Chart& chart, const NodeCounts& counts);

  int dim() const { return static_cast<int>(nodes_.size()); }
  std::size_t size() const { return size_; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<double>& nodes(int axis) const { return nodes_[axis]; }
  const std::vector<double>& weights(int axis) const { return weights_[axis]; }
  /// Σ of all weights: the coordinate volume of the chart.
  double measure() const;

  /// k-th point in axis-major order (first axis slowest); returns its weight.
  double point(std::size_t k, std::span<double> x) const;

 private:
  std::vector<std::vector<double>> nodes_, weights_;
  std::vector<int> counts_;
  std::size_t size_ = 0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0, c_ = 0.0;
};

/// Per-point values computed in parallel, in a fixed order. `fn` receives the
/// point and returns any number of values (all calls must return the same
/// count).
using PointFn = std::function<std::vector<double>(std::span<const double>)>;
std::vector<std::vector<double>> evaluate_nodes(const Quadrature& q, const PointFn& fn, int threads = 0);

/// Σ w_k · f_k · √det g_k, several integrands at once. Deterministic.
std::vector<double> integrate_many(const Quadrature& q, const Metric& g, const PointFn& fn, int threads = 0);

/// ∫ f dvol_g.
double integrate(const ScalarField& f, const Metric& g, const Quadrature& q, int threads = 0);

/// Threads used when a caller passes 0: hardware concurrency, at least 1.
int default_threads();

}  // namespace exq
