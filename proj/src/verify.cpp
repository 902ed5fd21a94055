#include "proxsarah/verify.hpp"

#include "proxsarah/data.hpp"
#include "proxsarah/errors.hpp"
#include "proxsarah/estimators.hpp"
#include "proxsarah/log.hpp"
#include "proxsarah/problems.hpp"
#include "proxsarah/solvers.hpp"
#include "proxsarah/stepsize.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace proxsarah {

namespace {

// Tracks the worst residual of one named check and the inputs that produced it.
class Check {
 public:
  Check(std::string name, double tolerance) {
    result_.name = std::move(name);
    result_.tolerance = tolerance;
  }

  void observe(double residual, const std::function<std::string()>& inputs) {
    if (std::isnan(residual)) residual = std::numeric_limits<double>::infinity();
    if (residual > result_.max_residual || (!seen_ && residual >= result_.max_residual)) {
      result_.max_residual = residual;
      worst_ = inputs;
    }
    seen_ = true;
  }

  void fail(const std::string& why) {
    result_.max_residual = std::numeric_limits<double>::infinity();
    worst_ = [why] { return why; };
    seen_ = true;
  }

  CheckResult done() {
    result_.pass = seen_ && result_.max_residual <= result_.tolerance;
    if (!result_.pass && worst_) result_.detail = worst_();
    if (!seen_) result_.detail = "no cases were evaluated";
    return result_;
  }

 private:
  CheckResult result_;
  std::function<std::string()> worst_;
  bool seen_ = false;
};

double uniform(RngStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

std::size_t uniform_int(RngStream& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform_below(hi - lo + 1));
}

Vector random_vector(RngStream& rng, std::size_t d, double lo, double hi) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = uniform(rng, lo, hi);
  return v;
}

std::string show(const Vector& v) {
  std::ostringstream out;
  out.precision(17);
  out << "[";
  for (Eigen::Index k = 0; k < v.size(); ++k) out << (k ? ", " : "") << v[k];
  out << "]";
  return out.str();
}

std::string show(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(17);
  out << "[";
  for (std::size_t k = 0; k < v.size(); ++k) out << (k ? ", " : "") << v[k];
  out << "]";
  return out.str();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  return (a - b).lpNorm<Eigen::Infinity>();
}

// Quiet logging for the duration of a suite (clamping warnings are expected there).
class QuietLog {
 public:
  QuietLog() : saved_(log::level()) { log::set_level(log::Level::kQuiet); }
  ~QuietLog() { log::set_level(saved_); }

 private:
  log::Level saved_;
};

}  // namespace

// ---------------------------------------------------------------------------

std::vector<CheckResult> estimator_identity_checks(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  RngStream rng(options.seed, 101);

  {
    Check check("SARAH increment variance = subset enumeration (n=5, b=1..4)", 1e-12);
    const QuadraticSum q = QuadraticSum::random(5, 3, options.seed);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector w_t = random_vector(rng, 3, -2.0, 2.0);
      const Vector w_prev = random_vector(rng, 3, -2.0, 2.0);
      for (std::size_t b = 1; b <= 4; ++b) {
        const VarianceComparison c = brute_force_variance(q, w_t, w_prev, b);
        check.observe(c.residual(), [=] {
          return "b_hat=" + std::to_string(b) + " w_t=" + show(w_t) + " w_prev=" + show(w_prev) +
                 " enumerated=" + std::to_string(c.enumerated) + " closed=" + std::to_string(c.closed_form);
        });
      }
    }
    out.push_back(check.done());
  }

  {
    Check bias("SARAH conditional bias identity by enumeration (n<=5)", 1e-12);
    Check unbiased("snapshot mean = full gradient by enumeration (n<=6)", 1e-12);
    for (std::size_t n = 2; n <= 6; ++n) {
      const QuadraticSum q = QuadraticSum::random(n, 3, options.seed + n);
      for (int trial = 0; trial < 2; ++trial) {
        const Vector w0 = random_vector(rng, 3, -2.0, 2.0);
        const Vector w1 = random_vector(rng, 3, -2.0, 2.0);
        for (std::size_t b_s = 1; b_s <= n; ++b_s) {
          for (std::size_t b_hat = 1; b_hat <= n; ++b_hat) {
            if (n == 6 && b_hat > 1) break;  // n = 6 only feeds the unbiasedness check
            const BiasCheck c = sarah_bias_enumeration(q, w0, w1, b_s, b_hat);
            auto inputs = [=] {
              return "n=" + std::to_string(n) + " b_s=" + std::to_string(b_s) + " b_hat=" + std::to_string(b_hat) +
                     " w0=" + show(w0) + " w1=" + show(w1);
            };
            if (n <= 5) bias.observe(c.bias_residual, inputs);
            unbiased.observe(c.unbiasedness_residual, inputs);
          }
        }
      }
    }
    out.push_back(bias.done());
    out.push_back(unbiased.done());
  }

  {
    Check check("SARAH path variance telescoping by enumeration (n<=5, m<=2)", 1e-12);
    for (std::size_t n = 2; n <= 5; ++n) {
      const QuadraticSum q = QuadraticSum::random(n, 2, options.seed + 10 + n);
      for (std::size_t m = 1; m <= 2; ++m) {
        std::vector<Vector> path;
        for (std::size_t t = 0; t <= m; ++t) path.push_back(random_vector(rng, 2, -2.0, 2.0));
        for (std::size_t b_s = 1; b_s <= n; ++b_s) {
          for (std::size_t b_hat = 1; b_hat <= n; ++b_hat) {
            const VarianceComparison c = sarah_telescoping_enumeration(q, path, b_s, b_hat);
            check.observe(c.residual(), [=] {
              std::string s = "n=" + std::to_string(n) + " m=" + std::to_string(m) + " b_s=" + std::to_string(b_s) +
                              " b_hat=" + std::to_string(b_hat) + " path=";
              for (const Vector& w : path) s += show(w);
              return s;
            });
          }
        }
      }
    }
    out.push_back(check.done());
  }

  {
    Check check("snapshot variance = (1/b)(n-b)/(n-1) sigma_n^2 by enumeration (n<=6)", 1e-12);
    for (std::size_t n = 2; n <= 6; ++n) {
      const QuadraticSum q = QuadraticSum::random(n, 3, options.seed + 20 + n);
      const Vector w = random_vector(rng, 3, -2.0, 2.0);
      for (std::size_t b = 1; b <= n; ++b) {
        const VarianceComparison c = snapshot_variance(q, w, b);
        check.observe(c.residual(),
                      [=] { return "n=" + std::to_string(n) + " b=" + std::to_string(b) + " w=" + show(w); });
      }
    }
    out.push_back(check.done());
  }

  {
    Check check("expectation-mode increment variance by tuple enumeration (b=1..3)", 1e-12);
    Check bound("expectation-mode variance <= sigma^2 on the box", 1e-12);
    const SyntheticExpectation e = SyntheticExpectation::random(4, 3, options.seed, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector w_t = random_vector(rng, 3, -1.0, 1.0);
      const Vector w_prev = random_vector(rng, 3, -1.0, 1.0);
      for (std::size_t b = 1; b <= 3; ++b) {
        const VarianceComparison c = expectation_increment_variance(e, w_t, w_prev, b);
        check.observe(c.residual(), [=] {
          return "b=" + std::to_string(b) + " w_t=" + show(w_t) + " w_prev=" + show(w_prev);
        });
      }
    }
    for (int trial = 0; trial < 200; ++trial) {
      const Vector w = random_vector(rng, 3, -1.0, 1.0);
      const double var = e.variance_at(w);
      bound.observe(std::max(0.0, var - e.sigma_squared()), [=] {
        return "w=" + show(w) + " variance=" + std::to_string(var) + " sigma^2=" + std::to_string(e.sigma_squared());
      });
    }
    // The corners attain the bound coordinate-wise; include them.
    for (unsigned mask = 0; mask < 8; ++mask) {
      Vector w(3);
      for (int k = 0; k < 3; ++k) w[k] = (mask >> k) & 1u ? 1.0 : -1.0;
      const double var = e.variance_at(w);
      bound.observe(std::max(0.0, var - e.sigma_squared()), [=] { return "corner w=" + show(w); });
    }
    out.push_back(check.done());
    out.push_back(bound.done());
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Independent re-derivation of the adaptive backward recursion (unclamped).
std::vector<double> reference_adaptive(double L, double eta, std::size_t m, std::size_t b, std::size_t n,
                                       AdaptiveForm form) {
  const double delta = 2.0 / eta - 3.0;
  const double omega = (1.0 + 2.0 * eta * eta) * static_cast<double>(n - b) / (static_cast<double>(b) * (n - 1.0));
  const double head = form == AdaptiveForm::kEtaBracket ? eta : 1.0;
  std::vector<double> g(m + 1);
  g[m] = delta / L;
  double tail = g[m];
  for (std::size_t k = m; k-- > 0;) {
    g[k] = delta / (L * (head + omega * L * tail));
    tail += g[k];
  }
  return g;
}

double relative_shortfall(double value, double bound) { return std::max(0.0, (bound - value) / std::abs(bound)); }

}  // namespace

std::vector<CheckResult> step_size_checks(const VerifyOptions& options) {
  QuietLog quiet;
  std::vector<CheckResult> out;
  RngStream rng(options.seed, 202);
  const double scale = options.omega_scale;

  {
    Check check("constant composite steps, worked examples", 1e-12);
    const StepSchedule a = detail::constant_composite(1.0, 6, 1, OracleMode::finite_sum(101), scale);
    check.observe(std::max(std::abs(a.gammas[0] - 1.0 / 3.0), std::abs(a.etas[0] - 6.0 / 13.0)), [=] {
      return "finite-sum n=101 b_hat=1 m=6 L=1: gamma=" + std::to_string(a.gammas[0]) +
             " eta=" + std::to_string(a.etas[0]) + " expected 1/3, 6/13";
    });
    const StepSchedule b = detail::constant_composite(1.0, 4, 6, OracleMode::expectation(), scale);
    check.observe(std::max(std::abs(b.gammas[0] - 1.0), std::abs(b.etas[0] - 0.4)), [=] {
      return "expectation b_hat=6 m=4 L=1: gamma=" + std::to_string(b.gammas[0]) +
             " eta=" + std::to_string(b.etas[0]) + " expected 1, 2/5";
    });
    for (std::size_t m : {1u, 10u, 1000u}) {
      for (double L : {0.5, 1.0, 4.0}) {
        const std::size_t n = 1000000000;
        const StepSchedule c = detail::constant_composite(L, m, 1, OracleMode::finite_sum(n), scale);
        const double expected = std::min(1.0, std::sqrt(2.0) / (L * std::sqrt(3.0 * m)));
        check.observe(std::abs(c.gammas[0] - expected) / expected, [=] {
          return "single sample n=1e9 m=" + std::to_string(m) + " L=" + std::to_string(L) +
                 ": gamma=" + std::to_string(c.gammas[0]) + " expected sqrt(2)/(L sqrt(3m))";
        });
      }
    }
    out.push_back(check.done());
  }

  {
    Check check("constant composite eta in [2/5, 1/2) for finite-sum sweeps", 0.0);
    auto probe = [&](std::size_t n, std::size_t b, std::size_t m) {
      const StepSchedule s = detail::constant_composite(1.0, m, b, OracleMode::finite_sum(n), scale);
      const double eta = s.etas[0];
      const double violation = std::max({0.0, 0.4 - eta, eta >= 0.5 ? eta - 0.5 + 1e-300 : 0.0});
      check.observe(violation, [=] {
        return "n=" + std::to_string(n) + " b_hat=" + std::to_string(b) + " m=" + std::to_string(m) +
               " eta=" + std::to_string(eta);
      });
    };
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = uniform_int(rng, 2, 1000000);
      const std::size_t root = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
      const std::size_t b = std::min(uniform_int(rng, 1, root), n - 1);
      probe(n, b, n / b);
    }
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = uniform_int(rng, 2, 100000);
      const std::size_t b = uniform_int(rng, 1, n - 1);
      const double omega = 3.0 * (n - b) / (2.0 * b * (n - 1.0));
      const std::size_t m_min = static_cast<std::size_t>(std::ceil(1.0 / omega));
      probe(n, b, m_min + uniform_int(rng, 0, 1000));
    }
    out.push_back(check.done());
  }

  {
    Check check("adaptive composite recursion, worked examples", 1e-12);
    const StepSchedule a = adaptive_composite(1.0, 0.5, 2, 1, 101);
    const std::vector<double> expected = {4.0 / 11.0, 0.5, 1.0};
    check.observe(max_abs_diff(a.gammas, expected), [=] {
      return "L=1 eta=1/2 n=101 b_hat=1 m=2: gammas=" + show(a.gammas) + " expected [4/11, 1/2, 1]";
    });
    const StepSchedule z = adaptive_composite(2.0, 0.5, 0, 1, 101);
    check.observe(max_abs_diff(z.gammas, {0.5}), [=] { return "m=0 L=2 eta=1/2: gammas=" + show(z.gammas); });
    out.push_back(check.done());
  }

  {
    Check match("adaptive composite recursion = independent re-derivation (random sweep)", 1e-12);
    Check bounds("adaptive composite gamma_0 and sum lower bounds and monotonicity (random sweep)", 1e-12);
    for (int trial = 0; trial < 400; ++trial) {
      const double L = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
      const double eta = uniform(rng, 0.05, 0.66);
      const std::size_t m = uniform_int(rng, 0, 256);
      const std::size_t n = uniform_int(rng, 2, 1000000);
      const std::size_t b = uniform_int(rng, 1, n - 1);
      const AdaptiveForm form = trial % 2 == 0 ? AdaptiveForm::kEtaBracket : AdaptiveForm::kUnitBracket;
      auto inputs = [=] {
        return std::string(form == AdaptiveForm::kEtaBracket ? "eta" : "unit") + " form L=" + std::to_string(L) +
               " eta=" + std::to_string(eta) + " m=" + std::to_string(m) + " n=" + std::to_string(n) +
               " b_hat=" + std::to_string(b);
      };
      StepSchedule s;
      try {
        s = adaptive_composite(L, eta, m, b, n, form);
      } catch (const std::exception& e) {
        bounds.fail(inputs() + ": " + e.what());
        continue;
      }
      const std::vector<double> raw = reference_adaptive(L, eta, m, b, n, form);
      double diff = 0.0;
      for (std::size_t t = 0; t <= m; ++t) diff = std::max(diff, std::abs(s.gammas[t] - std::min(1.0, raw[t])) / std::min(1.0, raw[t]));
      match.observe(diff, inputs);

      const double delta = 2.0 / eta - 3.0;
      const double omega = adaptive_step_omega(eta, b, n);
      double sum = 0.0;
      for (double g : raw) sum += g;
      double worst = relative_shortfall(raw[0], adaptive_gamma0_lower_bound(L, delta, omega, m));
      worst = std::max(worst, relative_shortfall(sum, adaptive_sigma_lower_bound(L, delta, omega, m)));
      for (std::size_t t = 0; t + 1 < m; ++t) worst = std::max(worst, std::max(0.0, raw[t] - raw[t + 1]) / raw[t + 1]);
      const bool last_increases = form == AdaptiveForm::kUnitBracket || eta + omega * delta > 1.0;
      if (m >= 1 && last_increases) worst = std::max(worst, std::max(0.0, raw[m - 1] - raw[m]) / raw[m]);
      bounds.observe(worst, inputs);
    }
    out.push_back(match.done());
    out.push_back(bounds.done());
  }

  {
    Check check("non-composite recursion, worked examples", 1e-12);
    const StepSchedule a = adaptive_noncomposite(1.0, 2, 1.0);
    check.observe(max_abs_diff(a.etas, {0.4, 0.5, 1.0}),
                  [=] { return "L=1 rho=1 m=2: etas=" + show(a.etas) + " expected [0.4, 0.5, 1]"; });
    const StepSchedule z = adaptive_noncomposite(4.0, 0, 0.5);
    check.observe(max_abs_diff(z.etas, {0.25}), [=] { return "m=0 L=4: etas=" + show(z.etas); });
    const StepSchedule f = fixed_noncomposite(1.0, 2);
    check.observe(max_abs_diff(f.etas, std::vector<double>(3, 0.5)),
                  [=] { return "fixed L=1 m=2: etas=" + show(f.etas) + " expected 2/(1+3)"; });
    out.push_back(check.done());
  }

  {
    Check check("non-composite sum lower bound (random sweep)", 1e-12);
    for (int trial = 0; trial < 200; ++trial) {
      const double L = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
      const double rho = uniform(rng, 1e-4, 1.0);
      const std::size_t m = uniform_int(rng, 0, 256);
      const StepSchedule s = adaptive_noncomposite(L, m, rho);
      check.observe(relative_shortfall(s.sigma_m, noncomposite_sigma_lower_bound(L, rho, m)), [=] {
        return "L=" + std::to_string(L) + " rho=" + std::to_string(rho) + " m=" + std::to_string(m);
      });
    }
    out.push_back(check.done());
  }

  {
    Check check("generic recursion, worked examples", 1e-12);
    const StepSchedule a = tight_backward_recursion(1.0, 1.0, 1.0, 1);
    check.observe(max_abs_diff(a.gammas, {0.5, 1.0}),
                  [=] { return "delta=nu=L=1 m=1: gammas=" + show(a.gammas) + " expected [0.5, 1]"; });
    const StepSchedule c = tight_constant_steps(1.0, 1.0, 1.0, 2);
    check.observe(max_abs_diff(c.gammas, std::vector<double>(3, 0.5)),
                  [=] { return "constant delta=nu=L=1 m=2: gammas=" + show(c.gammas) + " expected 0.5"; });
    out.push_back(check.done());
  }

  {
    Check tight("generic recursion tightness residual (200 random cases)", 1e-10);
    Check bound("generic recursion sum lower bound (200 random cases)", 1e-12);
    for (int trial = 0; trial < 200; ++trial) {
      const double L = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
      const double delta = uniform(rng, 0.01, 3.0);
      const double nu = uniform(rng, 0.01, 5.0);
      const std::size_t m = uniform_int(rng, 0, 256);
      auto inputs = [=] {
        return "L=" + std::to_string(L) + " delta=" + std::to_string(delta) + " nu=" + std::to_string(nu) +
               " m=" + std::to_string(m);
      };
      const StepSchedule s = tight_backward_recursion(L, delta, nu, m);
      tight.observe(tight_recursion_residual(s, L, delta, nu), inputs);
      bound.observe(relative_shortfall(s.sigma_m, adaptive_sigma_lower_bound(L, delta, nu, m)), inputs);
    }
    out.push_back(tight.done());
    out.push_back(bound.done());
  }

  {
    Check check("trade-off batch size and step, worked example", 1e-12);
    const TradeoffChoice c = tradeoff_config(1.0, 1.0, 10, 100);
    check.observe(std::max(std::abs(static_cast<double>(c.b_hat) - 13.0), std::abs(c.eta - 0.4)), [=] {
      return "gamma_bar=1 L=1 n=100 m=10: b_hat=" + std::to_string(c.b_hat) + " eta=" + std::to_string(c.eta) +
             " expected 13, 0.4";
    });
    out.push_back(check.done());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<CheckResult> gradient_checks(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  RngStream rng(options.seed, 303);
  constexpr double kH = 1e-6;
  constexpr double kFloor = 1e-3;  // denominator floor for relative errors

  auto rel = [&](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), kFloor); };

  const Loss::Kind kinds[] = {Loss::Kind::kSigmoid, Loss::Kind::kTwoLayer, Loss::Kind::kLogisticDifference};
  {
    Check first("loss first derivatives = central differences (1000 probes per loss)", 1e-6);
    Check second("loss second derivatives = central differences (1000 probes per loss)", 1e-6);
    for (Loss::Kind kind : kinds) {
      for (int probe = 0; probe < 1000; ++probe) {
        const double omega = kind == Loss::Kind::kTwoLayer || probe % 2 == 0 ? 1.0 : uniform(rng, 0.5, 2.0);
        const Loss loss(kind, omega);
        const double s = uniform(rng, -4.0, 4.0);
        const double tau = probe % 3 == 0 ? -1.0 : 1.0;
        auto inputs = [=] {
          return loss.name() + " omega=" + std::to_string(omega) + " s=" + std::to_string(s) +
                 " tau=" + std::to_string(tau);
        };
        const double fd1 = (loss.value(s + kH, tau) - loss.value(s - kH, tau)) / (2.0 * kH);
        first.observe(rel(loss.derivative(s, tau), fd1), inputs);
        const double h2 = 1e-5;
        const double fd2 = (loss.derivative(s + h2, tau) - loss.derivative(s - h2, tau)) / (2.0 * h2);
        second.observe(rel(loss.second_derivative(s, tau), fd2), inputs);
      }
    }
    out.push_back(first.done());
    out.push_back(second.done());
  }

  {
    Check check("loss curvature on s in [-20, 20] <= stated L + 1e-3", 1e-3);
    for (Loss::Kind kind : kinds) {
      const Loss loss(kind, 1.0);
      double worst = 0.0;
      double at = 0.0;
      const double h = 1e-5;
      for (int k = -20000; k <= 20000; ++k) {
        const double s = k * 1e-3;
        const double curv = std::abs(loss.derivative(s + h, 1.0) - loss.derivative(s - h, 1.0)) / (2.0 * h);
        if (curv > worst) {
          worst = curv;
          at = s;
        }
      }
      check.observe(std::max(0.0, worst - loss.smoothness()), [=] {
        return loss.name() + ": max |l''| = " + std::to_string(worst) + " at s = " + std::to_string(at) +
               " vs L = " + std::to_string(loss.smoothness());
      });
    }
    out.push_back(check.done());
  }

  {
    Check check("component gradients = central differences (1000 probes per problem)", 1e-6);
    std::vector<std::pair<std::string, std::shared_ptr<ProblemOracle>>> problems;
    problems.emplace_back("nn-pca", std::make_shared<NnPcaProblem>(synth_nnpca(50, 30, options.seed)));
    for (Loss::Kind kind : kinds) {
      const Loss loss(kind, 1.0);
      problems.emplace_back(loss.name(),
                            std::make_shared<BinClassProblem>(synth_binclass(50, 30, options.seed, 0.9), loss));
    }
    for (const auto& [name, problem] : problems) {
      const std::size_t d = problem->dimension();
      const std::size_t n = problem->mode().n;
      for (int probe = 0; probe < 1000; ++probe) {
        const Vector w = random_vector(rng, d, -1.0, 1.0);
        const SampleId i = rng.uniform_below(n);
        Vector g = Vector::Zero(static_cast<Eigen::Index>(d));
        problem->add_component_gradient(w, i, 1.0, g);
        Vector fd(static_cast<Eigen::Index>(d));
        for (std::size_t k = 0; k < d; ++k) {
          Vector wp = w, wm = w;
          wp[k] += kH;
          wm[k] -= kH;
          fd[k] = (problem->component_value(wp, i) - problem->component_value(wm, i)) / (2.0 * kH);
        }
        const double err = (g - fd).lpNorm<Eigen::Infinity>() / std::max(fd.lpNorm<Eigen::Infinity>(), kFloor);
        check.observe(err, [=, name = name] { return name + " i=" + std::to_string(i) + " w=" + show(w); });
      }
    }
    out.push_back(check.done());
  }

  {
    Check check("empirical average smoothness <= L^2 + 1e-6", 1e-6);
    std::vector<std::pair<std::string, std::shared_ptr<ProblemOracle>>> problems;
    problems.emplace_back("nn-pca", std::make_shared<NnPcaProblem>(synth_nnpca(200, 20, options.seed)));
    for (Loss::Kind kind : kinds) {
      const Loss loss(kind, 1.0);
      problems.emplace_back(loss.name(),
                            std::make_shared<BinClassProblem>(synth_binclass(200, 20, options.seed, 0.9), loss));
    }
    for (const auto& [name, problem] : problems) {
      const double L = problem->lipschitz();
      const double ratio = empirical_smoothness_check(*problem, 200, options.seed);
      check.observe(std::max(0.0, ratio - L * L), [=, name = name] {
        return name + ": ratio " + std::to_string(ratio) + " vs L^2 " + std::to_string(L * L);
      });
    }
    out.push_back(check.done());
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

SolverConfig base_config(Method method, std::size_t outer, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.method = std::move(method);
  cfg.outer_iterations = outer;
  cfg.seed = seed;
  cfg.record_trace = false;
  cfg.keep_iterates = true;
  return cfg;
}

ProxSarahConfig custom_sarah(double gamma, double eta, std::size_t m, std::size_t b_hat, std::size_t b_s = 0) {
  ProxSarahConfig c;
  c.rule = ScheduleRule::kCustom;
  c.custom = constant_schedule(gamma, eta, m);
  c.m = m;
  c.b_hat = b_hat;
  c.b_s = b_s;
  return c;
}

double trajectory_gap(const RunResult& a, const RunResult& b) {
  if (a.iterates.size() != b.iterates.size()) return std::numeric_limits<double>::infinity();
  double gap = max_abs_diff(a.final_w, b.final_w);
  for (std::size_t k = 0; k < a.iterates.size(); ++k) gap = std::max(gap, max_abs_diff(a.iterates[k], b.iterates[k]));
  return gap;
}

}  // namespace

std::vector<CheckResult> reduction_checks(const VerifyOptions& options) {
  QuietLog quiet;
  std::vector<CheckResult> out;
  const std::uint64_t seed = options.seed;
  const QuadraticSum q = QuadraticSum::random(20, 5, seed, -1.0, 1.0);
  const Regularizer l1 = Regularizer::l1(0.05);
  const Regularizer zero = Regularizer::zero();

  {
    Check check("ProxSARAH with gamma = 1 = ProxSpiderBoost trajectory", 1e-12);
    for (std::size_t b_s : {std::size_t{0}, std::size_t{7}}) {
      for (std::size_t b_hat : {std::size_t{1}, std::size_t{3}}) {
        const RunResult a = prox_sarah(q, l1, base_config(custom_sarah(1.0, 0.3, 4, b_hat, b_s), 5, seed));
        ProxSpiderBoostConfig sb;
        sb.m = 4;
        sb.b_hat = b_hat;
        sb.b_s = b_s;
        sb.eta = 0.3;
        const RunResult b = prox_spiderboost(q, l1, base_config(sb, 5, seed));
        check.observe(trajectory_gap(a, b), [=] {
          return "b_s=" + std::to_string(b_s) + " b_hat=" + std::to_string(b_hat) + " m=4 eta=0.3 S=5";
        });
      }
    }
    out.push_back(check.done());
  }

  {
    Check check("ProxSARAH with psi = 0, gamma = 1 = plain SARAH", 1e-12);
    const std::size_t m = 6, b_hat = 2, outer = 4, n = q.mode().n;
    const double eta = 0.25;
    const RunResult a = prox_sarah(q, zero, base_config(custom_sarah(1.0, eta, m, b_hat), outer, seed));
    // Hand-written SARAH: w_{t+1} = w_t - eta v_t.
    std::vector<Vector> iterates;
    Vector w = Vector::Zero(static_cast<Eigen::Index>(q.dimension()));
    auto grad_i = [&](const Vector& x, SampleId i) {
      Vector g = Vector::Zero(x.size());
      q.add_component_gradient(x, i, 1.0, g);
      return g;
    };
    for (std::size_t s = 1; s <= outer; ++s) {
      Vector v = Vector::Zero(w.size());
      for (SampleId i = 0; i < n; ++i) v += grad_i(w, i);
      v /= static_cast<double>(n);
      RngStream inner(seed, stream_id(s, StreamPurpose::kInnerBatch));
      iterates.push_back(w);
      Vector w_prev = w;
      w = w - eta * v;
      for (std::size_t t = 1; t <= m; ++t) {
        iterates.push_back(w);
        const MiniBatch batch = sample_minibatch(inner, n, b_hat);
        Vector delta = Vector::Zero(w.size());
        for (SampleId i : batch.ids) delta += grad_i(w, i) - grad_i(w_prev, i);
        v += delta / static_cast<double>(b_hat);
        w_prev = w;
        w = w - eta * v;
      }
    }
    double gap = max_abs_diff(a.final_w, w);
    for (std::size_t k = 0; k < iterates.size() && k < a.iterates.size(); ++k) {
      gap = std::max(gap, max_abs_diff(a.iterates[k], iterates[k]));
    }
    if (iterates.size() != a.iterates.size()) gap = std::numeric_limits<double>::infinity();
    check.observe(gap, [=] { return "n=20 m=6 b_hat=2 eta=0.25 S=4"; });
    out.push_back(check.done());
  }

  {
    Check check("full inner batch keeps v_t = grad f(w_t)", 1e-12);
    const std::size_t n = q.mode().n;
    Counters counters;
    RngStream rng(seed, 1);
    Vector w = Vector::Constant(static_cast<Eigen::Index>(q.dimension()), 0.7);
    SarahState state = sarah_snapshot(q, w, n, rng, counters);
    for (int t = 0; t < 50; ++t) {
      const Vector exact = exact_gradient(q, w);
      const double gap = max_abs_diff(state.v, exact);
      check.observe(gap, [=] { return "step " + std::to_string(t) + " w=" + show(w); });
      const Vector what = prox(l1, w - 0.3 * state.v, 0.3);
      w = 0.6 * w + 0.4 * what;
      state = sarah_update(std::move(state), q, w, draw_batch(q, rng, n), counters);
    }
    out.push_back(check.done());
  }

  {
    Check check("full-batch ProxSARAH on f(w) = w^2/2 = closed-form gradient descent (50 steps)", 1e-10);
    std::vector<Vector> h, g;
    for (double c : {0.5, 1.5, 1.25, 0.75}) {
      h.push_back(Vector::Constant(3, c));
      g.push_back(Vector::Zero(3));
    }
    const QuadraticSum half_square(h, g);
    const double gamma = 0.5, eta = 0.4;
    SolverConfig cfg = base_config(custom_sarah(gamma, eta, 49, 4), 1, seed);
    cfg.w0 = Vector(3);
    *cfg.w0 << 1.0, -2.0, 0.5;
    const RunResult r = prox_sarah(half_square, zero, cfg);
    std::vector<Vector> path = r.iterates;
    path.push_back(r.final_w);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const Vector expected = *cfg.w0 * std::pow(1.0 - gamma * eta, static_cast<double>(k));
      check.observe(max_abs_diff(path[k], expected), [=] { return "step " + std::to_string(k); });
    }
    if (path.size() != 51) check.fail("expected 51 iterates, got " + std::to_string(path.size()));
    out.push_back(check.done());
  }

  {
    Check check("averaging step = w - gamma eta G_eta(w) with exact gradients", 1e-12);
    const std::size_t n = q.mode().n;
    const double gamma = 0.35, eta = 0.45;
    SolverConfig cfg = base_config(custom_sarah(gamma, eta, 10, n), 2, seed);
    cfg.w0 = Vector::Constant(static_cast<Eigen::Index>(q.dimension()), 1.5);
    const RunResult r = prox_sarah(q, l1, cfg);
    std::vector<Vector> path = r.iterates;
    path.push_back(r.final_w);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const Vector gm = gradient_mapping(path[k], exact_gradient(q, path[k]), eta, l1);
      const Vector expected = path[k] - gamma * eta * gm;
      check.observe(max_abs_diff(path[k + 1], expected), [=] { return "step " + std::to_string(k); });
    }
    out.push_back(check.done());
  }

  {
    Check check("ProxSVRG with full batch and m = 1 = ProxGD trajectory", 1e-12);
    const std::size_t n = q.mode().n;
    ProxSvrgConfig svrg;
    svrg.m = 1;
    svrg.b_hat = n;
    svrg.eta = 0.2;
    const RunResult a = prox_svrg(q, l1, base_config(svrg, 10, seed));
    const RunResult b = prox_gd(q, l1, base_config(ProxGdConfig{0.2}, 10, seed));
    check.observe(trajectory_gap(a, b), [] { return "n=20 eta=0.2, 10 steps"; });
    out.push_back(check.done());
  }

  {
    Check check("nonnegative ball iterates stay feasible", 0.0);
    const NnPcaProblem pca(synth_nnpca(60, 10, seed));
    const Regularizer ball = Regularizer::nonneg_ball(1.0);
    for (double gamma : {0.3, 1.0}) {
      SolverConfig cfg = base_config(custom_sarah(gamma, 0.45, 20, 3), 3, seed);
      cfg.w0 = Vector::Constant(10, 2.0);  // infeasible start, projected by the solver
      const RunResult r = prox_sarah(pca, ball, cfg);
      std::size_t infeasible = 0;
      for (const Vector& w : r.iterates) infeasible += is_infeasible(objective_term(ball, w));
      infeasible += is_infeasible(objective_term(ball, r.final_w));
      check.observe(static_cast<double>(infeasible), [=] { return "gamma=" + std::to_string(gamma); });
    }
    out.push_back(check.done());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<CheckResult> accounting_checks(const VerifyOptions& options) {
  QuietLog quiet;
  std::vector<CheckResult> out;
  const QuadraticSum q = QuadraticSum::random(30, 4, options.seed);
  const Regularizer l1 = Regularizer::l1(0.01);
  const auto n = static_cast<std::int64_t>(q.mode().n);
  {
    Check check("ProxSARAH sfo = S(b_s + 2 m b_hat) and prox = S(m + 1)", 0.0);
    struct Case {
      std::size_t m, b_hat, b_s, outer;
    };
    for (const Case c : {Case{5, 2, 0, 1}, Case{10, 1, 0, 3}, Case{3, 7, 0, 4}, Case{4, 29, 0, 2}, Case{6, 3, 11, 5}}) {
      ProxSarahConfig pc;
      pc.rule = ScheduleRule::kConstant;
      pc.m = c.m;
      pc.b_hat = c.b_hat;
      pc.b_s = c.b_s;
      const RunResult r = prox_sarah(q, l1, base_config(pc, c.outer, options.seed));
      const auto S = static_cast<std::int64_t>(c.outer);
      const std::int64_t b_s = c.b_s == 0 ? n : static_cast<std::int64_t>(c.b_s);
      const std::int64_t m = static_cast<std::int64_t>(c.m), b = static_cast<std::int64_t>(c.b_hat);
      const std::int64_t sfo = S * (b_s + 2 * m * b);
      const std::int64_t proxes = S * (m + 1);
      const double gap = static_cast<double>(std::abs(r.counters.sfo - sfo) + std::abs(r.counters.prox_calls - proxes));
      check.observe(gap, [=] {
        return "m=" + std::to_string(c.m) + " b_hat=" + std::to_string(c.b_hat) + " S=" + std::to_string(c.outer) +
               " sfo=" + std::to_string(r.counters.sfo) + " expected " + std::to_string(sfo) +
               " prox=" + std::to_string(r.counters.prox_calls) + " expected " + std::to_string(proxes);
      });
    }
    out.push_back(check.done());
  }
  {
    Check check("epoch budget gives S = ceil(epochs n / (n + 2 m b_hat))", 0.0);
    ProxSarahConfig pc;
    pc.rule = ScheduleRule::kConstant;
    pc.m = 5;
    pc.b_hat = 2;
    for (double epochs : {1.0, 2.5, 7.0}) {
      SolverConfig cfg = base_config(pc, 0, options.seed);
      cfg.outer_iterations.reset();
      cfg.epochs = epochs;
      const RunResult r = prox_sarah(q, l1, cfg);
      const auto expected = static_cast<std::size_t>(std::ceil(epochs * 30.0 / (30.0 + 20.0)));
      check.observe(std::abs(static_cast<double>(r.outer_iterations) - static_cast<double>(expected)),
                    [=] { return "epochs=" + std::to_string(epochs); });
    }
    out.push_back(check.done());
  }
  {
    Check check("ProxSVRG sfo = S(n + 2 m b_hat) and prox = S m", 0.0);
    ProxSvrgConfig sc;
    sc.m = 4;
    sc.b_hat = 3;
    sc.eta = 0.1;
    const RunResult r = prox_svrg(q, l1, base_config(sc, 3, options.seed));
    const double gap = static_cast<double>(std::abs(r.counters.sfo - 3 * (n + 24)) + std::abs(r.counters.prox_calls - 12));
    check.observe(gap, [=] { return "sfo=" + std::to_string(r.counters.sfo) + " prox=" + std::to_string(r.counters.prox_calls); });
    out.push_back(check.done());
  }
  return out;
}

// ---------------------------------------------------------------------------

double chi_square_critical(std::size_t degrees_of_freedom, double alpha) {
  if (degrees_of_freedom == 0 || !(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("chi-square quantile needs df >= 1 and 0 < alpha < 1");
  }
  const boost::math::chi_squared dist(static_cast<double>(degrees_of_freedom));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

double chi_square_statistic(const std::vector<std::size_t>& counts, const std::vector<double>& probabilities) {
  if (counts.size() != probabilities.size()) throw InvalidArgument("counts and probabilities differ in length");
  double total = 0.0;
  for (std::size_t c : counts) total += static_cast<double>(c);
  double stat = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double expected = total * probabilities[k];
    const double diff = static_cast<double>(counts[k]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

std::vector<CheckResult> output_law_checks(const VerifyOptions& options) {
  QuietLog quiet;
  std::vector<CheckResult> out;
  const QuadraticSum q = QuadraticSum::random(4, 2, options.seed);
  const Regularizer zero = Regularizer::zero();
  constexpr std::size_t kM = 3, kS = 2;

  ProxSarahConfig pc;
  pc.rule = ScheduleRule::kAdaptive;
  pc.m = kM;
  pc.b_hat = 1;
  pc.eta = 0.5;
  const StepSchedule schedule = resolve_schedule(pc, q.mode(), q.lipschitz(), true);

  for (OutputRule rule : {OutputRule::kWeightedRandom, OutputRule::kUniformRandom}) {
    std::vector<double> p((kM + 1) * kS);
    for (std::size_t s = 0; s < kS; ++s) {
      for (std::size_t t = 0; t <= kM; ++t) {
        p[s * (kM + 1) + t] = rule == OutputRule::kWeightedRandom
                                  ? schedule.gammas[t] / (static_cast<double>(kS) * schedule.sigma_m)
                                  : 1.0 / static_cast<double>(p.size());
      }
    }
    std::vector<std::size_t> counts(p.size(), 0);
    SolverConfig cfg = base_config(pc, kS, 0);
    cfg.keep_iterates = false;
    cfg.output = rule;
    for (std::size_t rep = 0; rep < options.output_law_repetitions; ++rep) {
      cfg.seed = options.seed + rep;
      const RunResult r = prox_sarah(q, zero, cfg);
      ++counts[(r.selected_index.outer - 1) * (kM + 1) + r.selected_index.inner];
    }
    const double stat = chi_square_statistic(counts, p);
    const double critical = chi_square_critical(p.size() - 1, 0.001);
    Check check(std::string(rule == OutputRule::kWeightedRandom ? "weighted" : "uniform") +
                    " output-iterate frequencies, chi-square at 0.001 (m=3, S=2)",
                critical);
    check.observe(stat, [=] {
      std::string s = "probabilities " + show(p) + " counts [";
      for (std::size_t k = 0; k < counts.size(); ++k) s += (k ? ", " : "") + std::to_string(counts[k]);
      return s + "]";
    });
    out.push_back(check.done());
  }
  return out;
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> all;
  for (auto suite : {estimator_identity_checks, step_size_checks, gradient_checks, reduction_checks,
                     accounting_checks, output_law_checks}) {
    std::vector<CheckResult> part = suite(options);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  for (const CheckResult& r : results) {
    char line[320];
    std::snprintf(line, sizeof line, "%-88s %s  max residual %.3e (tol %.1e)", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                  r.max_residual, r.tolerance);
    out << line << "\n";
    if (!r.pass && !r.detail.empty()) out << "    offending inputs: " << r.detail << "\n";
  }
  return out.str();
}

}  // namespace proxsarah
