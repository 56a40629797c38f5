#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "logcap/capacity.hpp"
#include "logcap/geometry.hpp"
#include "logcap/kernels.hpp"

namespace logcap {

enum class Verdict { LogRegular, LogIrregular, Inconclusive };
std::string to_string(Verdict v);

// Built-in geometries with known limiting behavior.
enum class FamilyName { DeletedRadius, SparseIntervals };

struct FamilyParams {
  FamilyName name = FamilyName::DeletedRadius;
  double a = 2.0;
  int n_min = 1;  // first shell index of the report
  int n_max = 6;  // last shell index; also truncates the construction
  // sparse-interval construction parameters
  int first = 2;     // first interval index
  int k = 1;         // iterated-log depth
  double eps = 0.0;  // exponent offset of the last log factor
  // deleted radius inner cut
  double t_min = 1.0;
};

CompactSetSpec builtin_family(const FamilyParams& p);

// Exponent bookkeeping for the sparse family. delta_n is the cartesian
// width e^(-a^n n log n ... log_k^{1+eps} n); the t-length of the n-th
// interval is log(1 + delta_n e^(a^(n+1))), carried as a log so that the
// doubly exponential collapse never touches floating underflow.
double sparse_interval_log_delta(double a, int n, int k, double eps);
double sparse_interval_log_tlength(double a, int n, int k, double eps);

struct ShellTerm {
  int n = 0;
  double term_h = 0.0;          // a^{-n} * h-capacity of the shell
  double term_reduction = 0.0;  // a^{-n} * reduction of h at the puncture
  double term_classical = 0.0;  // a^{n}  * Greenian capacity of the shell
  double term_r1 = 0.0;         // reduction of 1 at the puncture
  double capacity_h = 0.0;
  double capacity_g = 0.0;
  std::string status = "ok";  // "ok", "empty", or an error note
};

struct IntegralSample {
  double rho = 0.0;
  double c = 0.0;          // capacity of the clip to [1, rho]
  double integrand = 0.0;  // c / rho^2
  double partial = 0.0;    // trapezoid integral up to rho
};

struct FitDiagnostics {
  double p = std::numeric_limits<double>::quiet_NaN();  // terms ~ c * n^{-p}
  double r2 = 0.0;
  // family-scale exponent estimate for the sparse family (slope against the
  // iterated-log factor; the series converges when it exceeds one)
  double eps_hat = std::numeric_limits<double>::quiet_NaN();
  bool family_override = false;
};

struct WienerReport {
  double a = 2.0;
  int n_min = 0;
  int n_max = 0;
  std::vector<ShellTerm> shells;
  std::vector<IntegralSample> integral;
  std::vector<double> partial_sums;
  Verdict verdict = Verdict::Inconclusive;
  std::string rationale;
  std::string confidence;
  FitDiagnostics fit;
  std::optional<FamilyParams> family;
};

struct WienerOptions {
  double resolution = 48.0;      // nodes per unit size when panelling shells
  std::size_t max_nodes = 1024;  // per-shell node budget
  bool classical = true;         // also compute the h == 1 column
};

// Per-shell capacities and reductions; errors mark the shell, not the run.
WienerReport series_terms(const ShellDecomposition& shells, const KernelKind& kind,
                          const WienerOptions& opt = {});

// Capacity growth function c(rho) on a grid, with trapezoid partials of the
// integral of c(rho)/rho^2.
std::vector<IntegralSample> integral_test(const CompactSetSpec& omega_complement,
                                          const std::vector<double>& rho_grid,
                                          const KernelKind& kind, const WienerOptions& opt = {});

// Evidence-graded verdict. Fewer than 4 computed shells is inconclusive.
// Generic rule: terms bounded below by a positive constant, or a tail fit
// exponent p <= 1, is divergence evidence; p > 1.2 is convergence evidence.
// For built-in families the construction's term scale replaces the bare
// power fit (the sparse terms decay like 1/(n log n ... log_k^{1+eps} n),
// which a power law cannot separate at reachable depths).
Verdict classify(WienerReport& report);

// Family front door: build, decompose, compute, classify.
WienerReport wiener_report(const FamilyParams& family, const KernelKind& kind,
                           const WienerOptions& opt = {});

}  // namespace logcap
