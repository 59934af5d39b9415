#pragma once

#include "lhyp/variation.hpp"

#include <array>
#include <map>

namespace lhyp {

struct SpectrumEntry {
  int k = 0;
  Real eigenvalue = 0;  // (k^2 + (n-1)k)/r^2
  long multiplicity = 0;
};
std::vector<SpectrumEntry> sphere_spectrum(int n, Real r, int k_max);

enum class Verdict { Stable, Unstable };

struct StabilityWitness {
  VariationSpec spec;
  Real form_value = 0;  // (4π)^{n/2}-scaled second variation, strictly negative
};

struct StabilityReport {
  int n = 0;
  Real r = 0;
  Real lambda = 0;
  std::array<Real, 4> thresholds{};  // sqrt(n), sqrt(n+1), (-1+sqrt(1+4n))/2, (1+sqrt(1+4n))/2
  Verdict f_stable = Verdict::Stable;
  Verdict weak_stable = Verdict::Stable;
  std::optional<StabilityWitness> f_witness;     // present iff F-unstable
  std::optional<StabilityWitness> weak_witness;  // present iff weakly unstable
};

std::array<Real, 4> sphere_thresholds(int n);
Verdict f_stability_verdict(int n, Real r);
Verdict weak_stability_verdict(int n, Real r);

// Full report; witnesses are validated through the quadrature second
// variation (not the closed form used for the verdict).
StabilityReport stability_report(int n, Real r, int resolution = 16);

// Exact value of the second-variation quadratic form on S^n(r) for
// f = f0 + a + <z,N> with f0 = sum_k c_k φ_k (φ_k a unit-L²(dμ) eigenfunction
// of degree k >= 2), evaluated spectrally in the unweighted-measure
// normalization (4π)^{n/2} e^{r²/2} F''(0).
Real f_stability_form(int n, Real r, const std::map<int, Real>& f0_coefficients, Real a,
                      const Vector& z, const Vector& y, Real h);

// min Rayleigh quotient of -L over the weighted-mean-zero subspace: λ² - 1
Real weak_stability_operator_floor(int n, Real r);

std::vector<StabilityReport> stability_sweep(int n, Real r_begin, Real r_end, Real r_step,
                                             int threads = 1, int resolution = 16);

}  // namespace lhyp
