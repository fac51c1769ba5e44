#include "exq/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <exception>
#include <memory>
#include <numbers>
#include <thread>

namespace exq {

NodeCounts default_node_counts(int dim) {
  if (dim <= 2) return {32, 48};
  if (dim == 3) return {16, 16};
  if (dim == 4) return {10, 10};
  if (dim == 5) return {8, 8};
  return {6, 6};
}

Quadrature::Quadrature(const Chart& chart, const NodeCounts& counts) {
  size_ = 1;
  const NodeCounts fallback = default_node_counts(chart.dim());
  for (const Axis& a : chart.axes()) {
    std::vector<double> x, w;
    const bool periodic = a.kind == Axis::Kind::Periodic;
    int m = periodic ? counts.periodic : counts.polar;
    if (m == 0) m = a.nodes > 0 ? a.nodes : (periodic ? fallback.periodic : fallback.polar);
    switch (a.kind) {
      case Axis::Kind::Periodic: {
        if (m < 1) throw ConfigError("periodic axis " + a.name + " needs at least 1 node");
        const double h = (a.hi - a.lo) / m;
        for (int k = 0; k < m; ++k) {
          x.push_back(a.lo + k * h);
          w.push_back(h);
        }
        break;
      }
      case Axis::Kind::Polar: {
        if (m < 1) throw ConfigError("polar axis " + a.name + " needs at least 1 node");
        std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> t(
            gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(m)), &gsl_integration_glfixed_table_free);
        if (!t) throw Error("Gauss-Legendre table allocation failed");
        for (int k = 0; k < m; ++k) {
          double xi = 0, wi = 0;
          gsl_integration_glfixed_point(a.lo, a.hi, static_cast<std::size_t>(k), &xi, &wi, t.get());
          x.push_back(xi);
          w.push_back(wi);
        }
        break;
      }
      case Axis::Kind::Interval:
        throw ConfigError("axis " + a.name + " is an open interval; integrals need a closed chart");
    }
    counts_.push_back(m);
    size_ *= static_cast<std::size_t>(m);
    nodes_.push_back(std::move(x));
    weights_.push_back(std::move(w));
  }
}

double Quadrature::measure() const {
  double m = 1.0;
  for (const auto& w : weights_) {
    CompensatedSum s;
    for (double v : w) s.add(v);
    m *= s.value();
  }
  return m;
}

double Quadrature::point(std::size_t k, std::span<double> x) const {
  double w = 1.0;
  for (int a = dim() - 1; a >= 0; --a) {
    const std::size_t m = nodes_[a].size();
    const std::size_t i = k % m;
    k /= m;
    x[a] = nodes_[a][i];
    w *= weights_[a][i];
  }
  return w;
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v))
    c_ += (sum_ - t) + v;
  else
    c_ += (v - t) + sum_;
  sum_ = t;
}

int default_threads() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}

std::vector<std::vector<double>> evaluate_nodes(const Quadrature& q, const PointFn& fn, int threads) {
  const std::size_t total = q.size();
  std::vector<std::vector<double>> out(total);
  if (threads <= 0) threads = default_threads();
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(total, 1)));
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](int t) {
    try {
      std::vector<double> x(q.dim());
      // strided so that expensive regions spread across workers
      for (std::size_t k = t; k < total; k += threads) {
        q.point(k, x);
        out[k] = fn(x);
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<double> integrate_many(const Quadrature& q, const Metric& g, const PointFn& fn, int threads) {
  if (g.dim() != q.dim()) throw ConfigError("quadrature and metric live on different charts");
  const int m = g.dim();
  auto vals = evaluate_nodes(
      q,
      [&](std::span<const double> x) {
        std::vector<double> v = fn(x);
        const auto gj = g.jets(x, 0);
        std::vector<double> a(gj.size());
        for (std::size_t i = 0; i < gj.size(); ++i) a[i] = gj[i].value();
        const auto minors = leading_minors(a, m);
        const double det = minors.back();
        if (!(det > 0)) throw GeometryError("metric is not positive definite at a quadrature node");
        v.push_back(std::sqrt(det));
        return v;
      },
      threads);
  std::vector<CompensatedSum> sums;
  std::vector<double> x(q.dim());
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const double w = q.point(k, x);
    const auto& v = vals[k];
    if (sums.empty()) sums.resize(v.size() - 1);
    if (v.size() != sums.size() + 1) throw Error("integrand returned an inconsistent number of values");
    const double dv = w * v.back();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) sums[i].add(dv * v[i]);
  }
  std::vector<double> out;
  for (const auto& s : sums) out.push_back(s.value());
  return out;
}

double integrate(const ScalarField& f, const Metric& g, const Quadrature& q, int threads) {
  if (f.dim() != g.dim()) throw ConfigError("integrand and metric live on different charts");
  return integrate_many(q, g, [&](std::span<const double> x) { return std::vector<double>{f(x, 0).value()}; },
                        threads)
      .front();
}

}  // namespace exq
