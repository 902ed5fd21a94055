#include "proxsarah/presets.hpp"

#include "proxsarah/errors.hpp"
#include "proxsarah/log.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace proxsarah {

namespace {

using u128 = unsigned __int128;

// Largest k with k^p <= n.
std::size_t iroot(u128 n, int p) {
  auto pow_le = [&](u128 k) {
    u128 acc = 1;
    for (int i = 0; i < p; ++i) {
      acc *= k;
      if (acc > n) return false;
    }
    return true;
  };
  std::size_t lo = 0;
  std::size_t hi = 1;
  while (pow_le(hi)) hi *= 2;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (pow_le(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("solver parameter '" + key + "' expects a nonnegative integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError("solver parameter '" + key + "' expects a real number, got '" + value + "'");
  }
  return out;
}

bool parse_flag(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("solver parameter '" + key + "' expects true or false, got '" + value + "'");
}

void require_n(std::size_t n) {
  if (n == 0) throw ConfigError("preset parameters need n >= 1");
}

void require_L(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("preset parameters need L > 0");
}

ProxSarahConfig tradeoff_preset(double gamma_bar, std::size_t m, std::size_t n, double L) {
  if (n < 2) throw ConfigError("trade-off presets need n >= 2");
  ProxSarahConfig cfg;
  cfg.m = std::max<std::size_t>(m, 1);
  cfg.gamma_bar = gamma_bar;
  const double c = 2.0 / (3.0 * L * L * gamma_bar * gamma_bar);
  if (static_cast<double>(cfg.m) >= c) {
    cfg.rule = ScheduleRule::kTradeoff;
    cfg.b_hat = tradeoff_config(gamma_bar, L, cfg.m, n).b_hat;
    return cfg;
  }
  // Outside the trade-off range: keep gamma and eta, use the floor(m / C) batch.
  cfg.rule = ScheduleRule::kExplicit;
  cfg.gamma = gamma_bar;
  cfg.eta = 2.0 / (4.0 + L * gamma_bar);
  cfg.b_hat = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(static_cast<double>(cfg.m) / c)), 1,
                                      n - 1);
  log::warn("m = " + std::to_string(cfg.m) + " < C = " + std::to_string(c) +
            "; using b_hat = max(1, floor(m / C)) with the trade-off gamma and eta");
  return cfg;
}

ProxSarahConfig adaptive_preset(double gamma_m, std::size_t m, std::size_t b_hat, double L) {
  ProxSarahConfig cfg;
  cfg.rule = ScheduleRule::kAdaptive;
  cfg.m = std::max<std::size_t>(m, 1);
  cfg.b_hat = std::max<std::size_t>(b_hat, 1);
  // gamma_m = delta / L with delta = 2/eta - 3.
  cfg.eta = 2.0 / (3.0 + gamma_m * L);
  return cfg;
}

ProxSvrgConfig svrg_preset(bool minibatch, std::size_t n, double L) {
  ProxSvrgConfig cfg;
  if (minibatch) {
    cfg.b_hat = std::max<std::size_t>(ipow_two_thirds(n), 1);
    cfg.m = std::max<std::size_t>(icbrt(n), 1);
    cfg.eta = 1.0 / (3.0 * L);
  } else {
    cfg.b_hat = 1;
    cfg.m = n;
    cfg.eta = 1.0 / (3.0 * static_cast<double>(n) * L);
  }
  return cfg;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

std::size_t isqrt(std::size_t n) { return iroot(n, 2); }
std::size_t icbrt(std::size_t n) { return iroot(n, 3); }
std::size_t ipow_two_thirds(std::size_t n) { return iroot(static_cast<u128>(n) * n, 3); }

const std::vector<PresetEntry>& preset_catalog() {
  static const std::vector<PresetEntry> catalog = {
      {"v1", "single sample, constant steps gamma = sqrt(2)/(L sqrt(3m)), m = n", false},
      {"v2", "gamma = 0.95, trade-off mini-batch, m = floor(sqrt(n))", false},
      {"v3", "gamma = 0.99, trade-off mini-batch, m = floor(sqrt(n))", false},
      {"v4", "gamma = 0.95, trade-off mini-batch, m = floor(n^(1/3))", false},
      {"v5", "gamma = 0.99, trade-off mini-batch, m = floor(n^(1/3))", false},
      {"A-v1", "single sample, adaptive steps, eta = 1/2, m = n", false},
      {"A-v2", "adaptive steps with gamma_m = 0.99, b_hat = m = floor(sqrt(n))", false},
      {"A-v3", "adaptive steps with gamma_m = 0.99, b_hat = m = floor(n^(1/3))", false},
      {"prox-svrg", "ProxSVRG, single sample with eta = 1/(3nL); minibatch=true uses b_hat = n^(2/3), m = n^(1/3), eta = 1/(3L)", true},
      {"prox-spiderboost", "ProxSpiderBoost, b_hat = m = floor(sqrt(n)), eta = 1/(2L)", true},
      {"prox-sgd", "ProxSGD, eta_t = eta0/(1 + eta_tilde floor(t/n)), eta0 = 0.1, eta_tilde = 1", true},
      {"prox-gd", "proximal gradient descent, eta = 1/L", true},
  };
  return catalog;
}

std::string canonical_preset_name(const std::string& name) {
  std::string key = lower(name);
  if (key.rfind("proxsarah-", 0) == 0) key = key.substr(10);
  for (const PresetEntry& entry : preset_catalog()) {
    if (lower(entry.name) == key) return entry.name;
  }
  if (key == "proxsvrg") return "prox-svrg";
  if (key == "proxspiderboost") return "prox-spiderboost";
  if (key == "proxsgd") return "prox-sgd";
  if (key == "proxgd") return "prox-gd";
  throw ConfigError("unknown solver '" + name + "'");
}

Method make_preset(const std::string& name, std::size_t n, double L) {
  require_n(n);
  require_L(L);
  const std::string key = canonical_preset_name(name);
  const std::size_t root2 = std::max<std::size_t>(isqrt(n), 1);
  const std::size_t root3 = std::max<std::size_t>(icbrt(n), 1);
  if (key == "v1") {
    ProxSarahConfig cfg;
    cfg.rule = ScheduleRule::kConstant;
    cfg.m = n;
    cfg.b_hat = 1;
    return cfg;
  }
  if (key == "v2") return tradeoff_preset(0.95, root2, n, L);
  if (key == "v3") return tradeoff_preset(0.99, root2, n, L);
  if (key == "v4") return tradeoff_preset(0.95, root3, n, L);
  if (key == "v5") return tradeoff_preset(0.99, root3, n, L);
  if (key == "A-v1") {
    ProxSarahConfig cfg;
    cfg.rule = ScheduleRule::kAdaptive;
    cfg.m = n;
    cfg.b_hat = 1;
    cfg.eta = 0.5;
    return cfg;
  }
  if (key == "A-v2") return adaptive_preset(0.99, root2, root2, L);
  if (key == "A-v3") return adaptive_preset(0.99, root3, root3, L);
  if (key == "prox-svrg") return svrg_preset(false, n, L);
  if (key == "prox-spiderboost") {
    ProxSpiderBoostConfig cfg;
    cfg.b_hat = root2;
    cfg.m = root2;
    cfg.eta = 1.0 / (2.0 * L);
    return cfg;
  }
  if (key == "prox-sgd") return ProxSgdConfig{};
  return ProxGdConfig{1.0 / L};
}

void apply_override(Method& method, const std::string& key, const std::string& value, std::size_t n, double L) {
  auto unknown = [&](const char* solver) {
    throw ConfigError("solver parameter '" + key + "' is not valid for " + solver);
  };
  if (auto* c = std::get_if<ProxSarahConfig>(&method)) {
    if (key == "m") {
      c->m = parse_count(key, value);
    } else if (key == "b_hat") {
      c->b_hat = parse_count(key, value);
      if (c->rule == ScheduleRule::kTradeoff) {
        // A fixed batch turns the trade-off rule into explicit steps.
        const TradeoffChoice choice = tradeoff_config(c->gamma_bar, L, c->m, n);
        c->rule = ScheduleRule::kExplicit;
        c->gamma = c->gamma_bar;
        c->eta = choice.eta;
      }
    } else if (key == "b_s") {
      c->b_s = parse_count(key, value);
    } else if (key == "eta") {
      if (c->rule == ScheduleRule::kConstant || c->rule == ScheduleRule::kTradeoff) {
        // Keep the rule's gamma and batch, replace only eta.
        std::size_t b_hat = c->b_hat;
        const StepSchedule s = resolve_schedule(*c, OracleMode::finite_sum(n), L, false, &b_hat);
        c->rule = ScheduleRule::kExplicit;
        c->gamma = s.gammas.front();
        c->b_hat = b_hat;
      }
      c->eta = parse_real(key, value);
    } else if (key == "gamma") {
      c->gamma = parse_real(key, value);
      c->rule = ScheduleRule::kExplicit;
    } else if (key == "gamma_bar") {
      c->gamma_bar = parse_real(key, value);
    } else if (key == "form") {
      if (value == "eta") {
        c->form = AdaptiveForm::kEtaBracket;
      } else if (value == "unit") {
        c->form = AdaptiveForm::kUnitBracket;
      } else {
        throw ConfigError("solver parameter 'form' expects eta or unit, got '" + value + "'");
      }
    } else if (key == "rule") {
      if (value == "constant") {
        c->rule = ScheduleRule::kConstant;
      } else if (value == "adaptive") {
        c->rule = ScheduleRule::kAdaptive;
      } else if (value == "tradeoff") {
        c->rule = ScheduleRule::kTradeoff;
      } else if (value == "adaptive-noncomposite") {
        c->rule = ScheduleRule::kAdaptiveNonComposite;
      } else if (value == "fixed-noncomposite") {
        c->rule = ScheduleRule::kFixedNonComposite;
      } else if (value == "explicit") {
        c->rule = ScheduleRule::kExplicit;
      } else {
        throw ConfigError("solver parameter 'rule' has unknown value '" + value + "'");
      }
    } else {
      unknown("ProxSARAH");
    }
    return;
  }
  if (auto* c = std::get_if<ProxSvrgConfig>(&method)) {
    if (key == "minibatch") {
      *c = svrg_preset(parse_flag(key, value), n, L);
    } else if (key == "m") {
      c->m = parse_count(key, value);
    } else if (key == "b_hat") {
      c->b_hat = parse_count(key, value);
    } else if (key == "eta") {
      c->eta = parse_real(key, value);
    } else {
      unknown("ProxSVRG");
    }
    return;
  }
  if (auto* c = std::get_if<ProxSpiderBoostConfig>(&method)) {
    if (key == "m") {
      c->m = parse_count(key, value);
    } else if (key == "b_hat") {
      c->b_hat = parse_count(key, value);
    } else if (key == "b_s") {
      c->b_s = parse_count(key, value);
    } else if (key == "eta") {
      c->eta = parse_real(key, value);
    } else {
      unknown("ProxSpiderBoost");
    }
    return;
  }
  if (auto* c = std::get_if<ProxSgdConfig>(&method)) {
    if (key == "eta0") {
      c->eta0 = parse_real(key, value);
    } else if (key == "eta_tilde") {
      c->eta_tilde = parse_real(key, value);
    } else if (key == "b_hat") {
      c->b_hat = parse_count(key, value);
    } else {
      unknown("ProxSGD");
    }
    return;
  }
  auto& c = std::get<ProxGdConfig>(method);
  if (key == "eta") {
    c.eta = parse_real(key, value);
  } else {
    unknown("ProxGD");
  }
}

std::string method_family(const Method& method) {
  switch (method.index()) {
    case 0:
      return "ProxSARAH";
    case 1:
      return "ProxSVRG";
    case 2:
      return "ProxSpiderBoost";
    case 3:
      return "ProxSGD";
    default:
      return "ProxGD";
  }
}

std::string describe_preset(const std::string& name, std::size_t n, double L) {
  const std::string key = canonical_preset_name(name);
  const Method method = make_preset(key, n, L);
  std::ostringstream out;
  out << key << " (" << method_family(method) << ") for n = " << n << ", L = " << fmt(L) << "\n";
  for (const PresetEntry& entry : preset_catalog()) {
    if (entry.name == key) out << "  " << entry.summary << "\n";
  }
  if (key == "v1") out << "  gamma = sqrt(2)/(L sqrt(3m)), eta = 2 sqrt(3m)/(4 sqrt(3m) + sqrt(2))\n";
  if (const auto* c = std::get_if<ProxSarahConfig>(&method)) {
    std::size_t b_hat = c->b_hat;
    const StepSchedule s = resolve_schedule(*c, OracleMode::finite_sum(n), L, false, &b_hat);
    out << "  m      = " << s.m() << "\n";
    out << "  b_hat  = " << b_hat << "\n";
    out << "  b_s    = " << n << "\n";
    if (c->rule == ScheduleRule::kAdaptive) {
      out << "  eta    = " << fmt(s.etas.front()) << "\n";
      out << "  gamma_0 = " << fmt(s.gammas.front()) << "\n";
      out << "  gamma_m = " << fmt(s.gammas.back()) << "\n";
      out << "  sum gamma = " << fmt(s.sigma_m) << "\n";
    } else {
      out << "  gamma  = " << fmt(s.gammas.front()) << "\n";
      out << "  eta    = " << fmt(s.etas.front()) << "\n";
    }
    if (s.clamped) out << "  (gamma clamped to 1)\n";
  } else if (const auto* c = std::get_if<ProxSvrgConfig>(&method)) {
    out << "  m      = " << c->m << "\n  b_hat  = " << c->b_hat << "\n  eta    = " << fmt(c->eta) << "\n";
  } else if (const auto* c = std::get_if<ProxSpiderBoostConfig>(&method)) {
    out << "  m      = " << c->m << "\n  b_hat  = " << c->b_hat << "\n  eta    = " << fmt(c->eta) << "\n";
  } else if (const auto* c = std::get_if<ProxSgdConfig>(&method)) {
    out << "  eta0   = " << fmt(c->eta0) << "\n  eta_tilde = " << fmt(c->eta_tilde) << "\n  b_hat  = " << c->b_hat
        << "\n";
  } else {
    out << "  eta    = " << fmt(std::get<ProxGdConfig>(method).eta) << "\n";
  }
  return out.str();
}

}  // namespace proxsarah
