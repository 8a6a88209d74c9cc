#pragma once

#include <string>
#include <vector>

#include "ifsm/model.hpp"

// Reference models used by the tests, the acceptance suite and the CLI
// (`--model builtin:<name>`).
namespace ifsm::models {

// tau_0(x) = x/3, tau_1(x) = x/3 + 2/3 on [0, 1]; Lambda = {0, 1}.
IfsmModel cantor(std::vector<double> p = {0.5, 0.5});
// tau(x) = x/2 on [0, 1].
IfsmModel halving();
// x/2, x/2 + (1/2, 0), x/2 + (1/4, 1/2) on [0, 1]^2, uniform weights.
IfsmModel sierpinski();
// Cantor maps with q_x = (1 - h(x)) nu1 + h(x) nu2, h(x) = h_scale * x,
// nu1 = (0.8, 0.2), nu2 = (0.2, 0.8).
IfsmModel mixture(double h_scale = 1.0);
// Cantor maps with q_x(j) proportional to exp(A(tau_j(x))), A(y) = y^2 / 2, uniform base.
IfsmModel thermodynamic();
// Degree-2 skew system on [0, 1]^2 (max metric) with
// phi_0(z) = 0.2 z1 + 0.3 z2, phi_1(z) = 0.3 z1 + 0.2 z2 + 0.5, and mixture
// weights driven by h(z) = z1 between (0.6, 0.4) and (0.4, 0.6).
IfsmModel gifs_skew();
// Cantor maps with q_x = delta at atom 0: the second map is never chosen.
IfsmModel h4_violating();

std::vector<std::string> names();
IfsmModel by_name(const std::string& name);

}  // namespace ifsm::models
