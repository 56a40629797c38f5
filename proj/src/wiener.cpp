#include "logcap/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "logcap/util.hpp"

namespace logcap {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::LogRegular: return "LogRegular";
    case Verdict::LogIrregular: return "LogIrregular";
    default: return "Inconclusive";
  }
}

namespace {

// j-fold iterated natural logarithm
double iterated_log(double x, int j) {
  for (int i = 0; i < j; ++i) x = std::log(x);
  return x;
}

int smallest_valid_index(double /*a*/, int k) {
  for (int n = 2; n < 1000; ++n) {
    if (iterated_log(static_cast<double>(n), k) > 0.0) return n;
  }
  throw std::invalid_argument("sparse family: no valid start index for this k");
}

}  // namespace

double sparse_interval_log_delta(double a, int n, int k, double eps) {
  if (!(a > 1.0) || n < 2 || k < 1) {
    throw std::invalid_argument("sparse_interval_log_delta: need a > 1, n >= 2, k >= 1");
  }
  double factor = static_cast<double>(n);
  for (int j = 1; j < k; ++j) {
    double lj = iterated_log(static_cast<double>(n), j);
    if (!(lj > 0.0)) throw std::invalid_argument("sparse_interval_log_delta: log factor not positive");
    factor *= lj;
  }
  double lk = iterated_log(static_cast<double>(n), k);
  if (!(lk > 0.0)) throw std::invalid_argument("sparse_interval_log_delta: log factor not positive");
  factor *= std::pow(lk, 1.0 + eps);
  return -std::pow(a, n) * factor;
}

double sparse_interval_log_tlength(double a, int n, int k, double eps) {
  // t-length = log(1 + delta_n * e^{a^{n+1}}); the exponent of the product
  // is x = a^{n+1} + log(delta_n), and the three branches of
  // log(log1p(exp(x))) keep every regime exact
  double x = std::pow(a, n + 1) + sparse_interval_log_delta(a, n, k, eps);
  if (x > 30.0) return std::log(x + std::log1p(std::exp(-x)));
  if (x > -30.0) return std::log(std::log1p(std::exp(x)));
  return x;  // t-length equals delta_n e^{a^{n+1}} exactly to double accuracy
}

CompactSetSpec builtin_family(const FamilyParams& p) {
  if (!(p.a > 1.0)) throw std::invalid_argument("builtin_family: need a > 1");
  if (p.n_min > p.n_max) throw std::invalid_argument("builtin_family: need n_min <= n_max");
  CompactSetSpec out;
  if (p.name == FamilyName::DeletedRadius) {
    if (!(p.t_min > 0.0)) throw std::invalid_argument("builtin_family: need t_min > 0");
    double t_top = std::pow(p.a, p.n_max + 1);
    out.primitives.push_back(RadialSegment(p.t_min, t_top, 0.0));
    out.label = "deleted_radius";
    return out;
  }
  if (p.k < 1 || p.first < 2) {
    throw std::invalid_argument("builtin_family: sparse family needs k >= 1 and first >= 2");
  }
  int start = std::max(p.first, smallest_valid_index(p.a, p.k));
  for (int n = start; n <= p.n_max; ++n) {
    double log_len = sparse_interval_log_tlength(p.a, n, p.k, p.eps);
    double anchor = std::pow(p.a, n + 1);
    double shell_width = anchor - std::pow(p.a, n);
    // early indices can produce intervals wider than their shell before the
    // collapse kicks in; keep them inside the band
    if (log_len > std::log(shell_width)) log_len = std::log(shell_width);
    out.primitives.push_back(RadialSegment::from_log_length(anchor, log_len, 0.0));
  }
  out.label = "sparse_intervals";
  return out;
}

// ---------------------------------------------------------------------------

WienerReport series_terms(const ShellDecomposition& shells, const KernelKind& kind,
                          const WienerOptions& opt) {
  if (shells.shells.empty()) throw std::invalid_argument("series_terms: empty shell range");
  WienerReport rep;
  rep.a = shells.a;
  rep.n_min = shells.n_min;
  rep.n_max = shells.n_max;
  rep.shells.assign(shells.shells.size(), ShellTerm{});

  parallel_for(shells.shells.size(), [&](std::size_t idx) {
    int n = shells.n_min + static_cast<int>(idx);
    ShellTerm& term = rep.shells[idx];
    term.n = n;
    const CompactSetSpec& shell = shells.shells[idx];
    if (shell.empty()) {
      term.status = "empty";
      return;
    }
    try {
      auto d = discretize(shell, opt.resolution, opt.max_nodes);
      double an = std::pow(shells.a, n);
      QpOptions qp;
      auto res = equilibrium_capacity(d, kind, qp);
      term.capacity_h = res.capacity;
      term.term_h = res.capacity / an;
      if (res.capacity > 0.0) {
        auto z = capacity_at_zeta(res, kind, shell.t_max());
        term.term_reduction = z.value / an;
      }
      if (opt.classical) {
        QpOptions qpc;
        qpc.gauge = PotentialGauge::Classical;
        auto cls = equilibrium_capacity(d, kind, qpc);
        term.capacity_g = cls.capacity;
        term.term_classical = cls.capacity * an;
        // reduction of 1 at the puncture: the kernel tends to h at the
        // fixed argument, so the limit is the h-moment of the measure
        double r1 = 0.0;
        for (std::size_t j = 0; j < cls.equilibrium.size(); ++j) {
          r1 += kind.h(cls.equilibrium.nodes[j]) * cls.equilibrium.masses[j];
        }
        term.term_r1 = r1;
      }
    } catch (const std::exception& e) {
      term.status = e.what();
    }
  });

  double sum = 0.0;
  for (const auto& t : rep.shells) {
    sum += t.term_h;
    rep.partial_sums.push_back(sum);
  }
  return rep;
}

std::vector<IntegralSample> integral_test(const CompactSetSpec& omega_complement,
                                          const std::vector<double>& rho_grid,
                                          const KernelKind& kind, const WienerOptions& opt) {
  for (double rho : rho_grid) {
    if (!(rho > 1.0)) throw std::invalid_argument("integral_test: grid must lie in (1, inf)");
  }
  std::vector<IntegralSample> samples(rho_grid.size());
  parallel_for(rho_grid.size(), [&](std::size_t i) {
    IntegralSample& s = samples[i];
    s.rho = rho_grid[i];
    CompactSetSpec clip = omega_complement.clip_t(1.0, s.rho);
    if (clip.empty()) {
      s.c = 0.0;
    } else {
      auto d = discretize(clip, opt.resolution, opt.max_nodes);
      s.c = equilibrium_capacity(d, kind).capacity;
    }
    s.integrand = s.c / (s.rho * s.rho);
  });
  std::sort(samples.begin(), samples.end(),
            [](const IntegralSample& a, const IntegralSample& b) { return a.rho < b.rho; });
  double acc = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    acc += 0.5 * (samples[i].integrand + samples[i - 1].integrand) *
           (samples[i].rho - samples[i - 1].rho);
    samples[i].partial = acc;
  }
  return samples;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double d = n * sxx - sx * sx;
  LineFit f;
  if (std::fabs(d) < 1e-300) return f;
  f.slope = (n * sxy - sx * sy) / d;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  double mean = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = f.intercept + f.slope * x[i];
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  f.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace

Verdict classify(WienerReport& report) {
  std::vector<const ShellTerm*> ok;
  bool all_empty = !report.shells.empty();
  for (const auto& t : report.shells) {
    if (t.status == "ok" && t.term_h > 0.0) ok.push_back(&t);
    if (t.status != "empty") all_empty = false;
  }
  if (all_empty) {
    // nothing accumulates near the puncture: the series is identically zero
    report.verdict = Verdict::LogIrregular;
    report.rationale = "empty complement, all terms vanish";
    report.confidence = "definitive";
    return report.verdict;
  }
  if (ok.size() < 4) {
    report.verdict = Verdict::Inconclusive;
    report.rationale = "fewer than 4 computed shells";
    report.confidence = "none";
    return report.verdict;
  }

  // bare power fit over the tail half
  std::vector<double> lx, ly;
  for (std::size_t i = ok.size() / 2 >= 2 ? ok.size() / 2 - 1 : 0; i < ok.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(ok[i]->n)));
    ly.push_back(std::log(ok[i]->term_h));
  }
  LineFit power = fit_line(lx, ly);
  report.fit.p = -power.slope;
  report.fit.r2 = power.r2;

  double t_max = 0.0, t_min = std::numeric_limits<double>::infinity();
  for (const auto* t : ok) {
    t_max = std::max(t_max, t->term_h);
    t_min = std::min(t_min, t->term_h);
  }

  if (report.family && report.family->name == FamilyName::SparseIntervals) {
    // family scale: term_n ~ a^2 / (n log n ... log_k^{1+eps} n); regress the
    // residual against the last log factor to estimate 1 + eps. Only shells
    // whose interval has entered the collapsed regime (t-length below e^-1)
    // follow that scale; early indices are excluded by construction.
    const auto& fam = *report.family;
    std::vector<double> fx, fy;
    for (const auto* t : ok) {
      if (sparse_interval_log_tlength(fam.a, t->n, fam.k, fam.eps) > -1.0) continue;
      double base = static_cast<double>(t->n);
      for (int j = 1; j < fam.k; ++j) base *= iterated_log(static_cast<double>(t->n), j);
      double lk = iterated_log(static_cast<double>(t->n), fam.k);
      if (!(lk > 0.0)) continue;
      fx.push_back(std::log(lk));
      fy.push_back(std::log(report.a * report.a / (t->term_h * base)));
    }
    if (fx.size() < 3) {
      report.verdict = Verdict::Inconclusive;
      report.rationale = "too few collapsed-regime shells for the family fit";
      report.confidence = "none";
      report.fit.family_override = true;
      return report.verdict;
    }
    LineFit fit = fit_line(fx, fy);
    report.fit.eps_hat = fit.slope - 1.0;
    report.fit.family_override = true;
    if (report.fit.eps_hat <= 0.25) {
      report.verdict = Verdict::LogRegular;
      report.rationale = "family-scale exponent at or below the divergence line";
    } else if (report.fit.eps_hat >= 0.5) {
      report.verdict = Verdict::LogIrregular;
      report.rationale = "family-scale exponent above the divergence line";
    } else {
      report.verdict = Verdict::Inconclusive;
      report.rationale = "family-scale exponent in the indeterminate band";
    }
    report.confidence = "definitive for the built-in construction";
    return report.verdict;
  }

  if (report.family && report.family->name == FamilyName::DeletedRadius) {
    report.fit.family_override = true;
    if (t_min >= 0.05 * std::max(1.0, t_max)) {
      report.verdict = Verdict::LogRegular;
      report.rationale = "terms bounded below by a positive constant";
      report.confidence = "definitive for the built-in construction";
      return report.verdict;
    }
  }

  if (t_min >= 0.05 * std::max(1.0, t_max) && t_min > 1e-6) {
    report.verdict = Verdict::LogRegular;
    report.rationale = "terms bounded below by a positive constant across the computed range";
    report.confidence = "evidence-grade (finite range)";
  } else if (report.fit.p <= 1.0) {
    report.verdict = Verdict::LogRegular;
    report.rationale = "tail fit exponent at or below 1";
    report.confidence = "evidence-grade (finite range)";
  } else if (report.fit.p > 1.2) {
    report.verdict = Verdict::LogIrregular;
    report.rationale = "tail fit exponent above 1.2";
    report.confidence = "evidence-grade (finite range)";
  } else {
    report.verdict = Verdict::Inconclusive;
    report.rationale = "tail fit exponent in the indeterminate band (1, 1.2]";
    report.confidence = "none";
  }
  return report.verdict;
}

WienerReport wiener_report(const FamilyParams& family, const KernelKind& kind,
                           const WienerOptions& opt) {
  CompactSetSpec omega_c = builtin_family(family);
  auto shells = shell_decompose(omega_c, family.a, family.n_min, family.n_max);
  WienerReport rep = series_terms(shells, kind, opt);
  rep.family = family;
  classify(rep);
  return rep;
}

}  // namespace logcap
