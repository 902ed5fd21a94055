#pragma once

#include "proxsarah/solvers.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace proxsarah {

/// floor(sqrt(n)), floor(n^(1/3)) and floor(n^(2/3)) in exact integer arithmetic.
std::size_t isqrt(std::size_t n);
std::size_t icbrt(std::size_t n);
std::size_t ipow_two_thirds(std::size_t n);

struct PresetEntry {
  std::string name;
  std::string summary;
  bool baseline = false;
};

/// The eight ProxSARAH presets followed by the four baselines.
const std::vector<PresetEntry>& preset_catalog();

/// Canonical preset name ("v1", "A-v2", "prox-svrg", ...). Accepts a
/// "ProxSARAH-" prefix and any letter case. Throws ConfigError when unknown.
std::string canonical_preset_name(const std::string& name);

/// Method for a preset on a problem with n components and constant L.
/// For v2..v5, when m < C the trade-off rule is out of range and b_hat falls
/// back to max(1, floor(m / C)) with a warning.
Method make_preset(const std::string& name, std::size_t n, double L);

/// Sets one solver parameter ("m", "b_hat", "b_s", "eta", "gamma", "gamma_bar",
/// "eta0", "eta_tilde", "form", "minibatch"). Throws ConfigError naming the key.
void apply_override(Method& method, const std::string& key, const std::string& value, std::size_t n, double L);

/// Human-readable derived parameters (gamma, eta, m, b_hat) for (n, L).
std::string describe_preset(const std::string& name, std::size_t n, double L);

/// Short label of a resolved method, e.g. "ProxSARAH" or "ProxSVRG".
std::string method_family(const Method& method);

}  // namespace proxsarah
