#include "lhyp/stability.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace lhyp {

namespace {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

Real sphere_area(int n, Real r) { return unit_sphere_area(n) * std::pow(r, n); }

}  // namespace

std::vector<SpectrumEntry> sphere_spectrum(int n, Real r, int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  std::vector<SpectrumEntry> out;
  out.reserve(size_t(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    SpectrumEntry e;
    e.k = k;
    e.eigenvalue = (Real(k) * k + Real(n - 1) * k) / (r * r);
    e.multiplicity = binomial(n + k, n) - binomial(n + k - 2, n);
    out.push_back(e);
  }
  return out;
}

std::array<Real, 4> sphere_thresholds(int n) {
  return {std::sqrt(Real(n)), std::sqrt(Real(n + 1)), (-1 + std::sqrt(1.0 + 4 * n)) / 2,
          (1 + std::sqrt(1.0 + 4 * n)) / 2};
}

Verdict f_stability_verdict(int n, Real r) {
  if (n < 1 || !(r > 0)) throw std::invalid_argument("need n >= 1 and r > 0");
  const auto t = sphere_thresholds(n);
  return (r <= t[0] || r > t[1]) ? Verdict::Stable : Verdict::Unstable;
}

Verdict weak_stability_verdict(int n, Real r) {
  if (n < 1 || !(r > 0)) throw std::invalid_argument("need n >= 1 and r > 0");
  const auto t = sphere_thresholds(n);
  return (r <= t[2] || r >= t[3]) ? Verdict::Stable : Verdict::Unstable;
}

Real weak_stability_operator_floor(int n, Real r) {
  const Real lambda = Real(n) / r - r;
  return lambda * lambda - 1;
}

Real f_stability_form(int n, Real r, const std::map<int, Real>& f0_coefficients, Real a,
                      const Vector& z, const Vector& y, Real h) {
  const Real lambda = Real(n) / r - r;
  const Real S = Real(n) / (r * r);
  const Real A = sphere_area(n, r);
  const Real first_harmonic_norm = A / (n + 1);  // ∫ <N,e>^2 dμ per unit direction

  Real value = 0;
  for (const auto& [k, c] : f0_coefficients) {
    if (k < 2) throw std::invalid_argument("f0 components start at harmonic degree 2");
    const Real mu_k = (Real(k) * k + Real(n - 1) * k) / (r * r);
    value += (mu_k - S - 1 + lambda * lambda) * c * c;
  }
  value += -(S + 1 - lambda * lambda) * a * a * A;

  const Real z2 = z.size() ? z.squaredNorm() : 0;
  const Real y2 = y.size() ? y.squaredNorm() : 0;
  const Real yz = (z.size() && y.size()) ? z.dot(y) : 0;
  value += (lambda * lambda - 1) * first_harmonic_norm * z2;
  value += 2 * (1 + lambda * r) * first_harmonic_norm * yz;
  value += -(1 + lambda * r) * first_harmonic_norm * y2;

  value += ((n + 1 - r * r) * lambda - 2.0 * n / r) * a * h * A;
  value += 0.25 * (std::pow(r, 4) - (2.0 * n + 1) * r * r + Real(n) * (n - 1)) * h * h * A;
  return value;
}

StabilityReport stability_report(int n, Real r, int resolution) {
  StabilityReport rep;
  rep.n = n;
  rep.r = r;
  rep.lambda = Real(n) / r - r;
  rep.thresholds = sphere_thresholds(n);
  rep.f_stable = f_stability_verdict(n, r);
  rep.weak_stable = weak_stability_verdict(n, r);

  if (rep.f_stable == Verdict::Unstable || rep.weak_stable == Verdict::Unstable) {
    const Hypersurface sphere = make_sphere(n, r);
    const QuadratureGrid grid = build_grid(sphere, resolution);
    Vector z = Vector::Zero(n + 1);
    z(0) = 1;
    if (rep.f_stable == Verdict::Unstable) {
      // witness f = <z,N> with the optimal base-point response y = z
      StabilityWitness w;
      w.spec.f = VariationField::linear(z);
      w.spec.y = z;
      w.spec.h = 0;
      w.form_value = analytic_second_variation_f_form(sphere, grid, w.spec, rep.lambda);
      rep.f_witness = w;
    }
    if (rep.weak_stable == Verdict::Unstable) {
      StabilityWitness w;
      w.spec.f = VariationField::linear(z);
      w.spec.h = 0;
      w.form_value = analytic_second_variation_t_form(sphere, grid, w.spec.f);
      rep.weak_witness = w;
    }
  }
  return rep;
}

std::vector<StabilityReport> stability_sweep(int n, Real r_begin, Real r_end, Real r_step,
                                             int threads, int resolution) {
  if (!(r_step > 0) || !(r_begin > 0) || r_end < r_begin)
    throw std::invalid_argument("bad sweep range");
  const long count = std::lround(std::floor((r_end - r_begin) / r_step + 1e-9)) + 1;
  std::vector<StabilityReport> out(static_cast<size_t>(count));
  auto work = [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i)
      out[size_t(i)] = stability_report(n, r_begin + Real(i) * r_step, resolution);
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const long lo = t * chunk, hi = std::min(count, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace lhyp
