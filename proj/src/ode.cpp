#include "ptlz/ode.hpp"

namespace ptlz {

std::string to_string(IntegrationMethod method) {
  return method == IntegrationMethod::fixed_rk4 ? "fixed_rk4" : "adaptive_embedded_rk45";
}

IntegrationMethod integration_method_from_string(const std::string& name) {
  if (name == "fixed_rk4") return IntegrationMethod::fixed_rk4;
  if (name == "adaptive_embedded_rk45") return IntegrationMethod::adaptive_embedded_rk45;
  throw ValidationError("unknown integration method: " + name);
}

}  // namespace ptlz
