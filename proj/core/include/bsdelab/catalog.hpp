#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bsdelab/generator.hpp"

namespace bsdelab {

// Named drivers: zero | linear_y | gamma_abs_z | mixed | affine. All satisfy
// |f - f0| <= beta|y| + gamma|z| by construction and are Lipschitz.
std::vector<std::string> catalog_drivers();
// Named intercepts f0(t): zero | constant (= f0_value).
std::vector<std::string> catalog_intercepts();
// Named terminals as functions of the first coordinate of W_T:
// constant (c) | w_t (c W) | abs_w_t (c|W|) | exp_abs_w_t (e^{c|W|}) |
// exp_sq_w_t (e^{c W^2}, needs c < 1/(2T)).
std::vector<std::string> catalog_terminals();

GeneratorSpec make_catalog_generator(const std::string& driver, double beta, double gamma,
                                     const std::string& f0_name, double f0_value,
                                     int z_dim = 1, double horizon = 1.0);

TerminalSpec make_catalog_terminal(const std::string& kind, double c, double T);

// E[xi(W_T)] in closed form, when the kind has one (all of them do, but
// exp_sq_w_t only for c < 1/(2T)).
std::optional<double> terminal_mean(const std::string& kind, double c, double T);

// Exact Y_0 for instances with a closed-form solution; nullopt otherwise.
std::optional<double> oracle_y0(const std::string& driver, const std::string& f0_name,
                                double f0_value, double beta, double gamma,
                                const std::string& terminal, double c, double T);

}  // namespace bsdelab
