#pragma once

#include <span>

namespace nfpto {

// Area-normalized geometric mean G = prod_i gamma_i^(A_i / sum A), evaluated
// literally with pow. Reference form; prone to underflow for many tiny
// factors. Requires gamma_i > 0 and A_i > 0.
double nfp_product_form(std::span<const double> values,
                        std::span<const double> areas);

// Same map in the log domain: exp(sum_i log(gamma_i) * A_i / sum A) with a
// single final exponentiation. Inputs are log(gamma_i) <= 0 (gamma in (0,1]).
double nfp_log_form(std::span<const double> log_values,
                    std::span<const double> areas);

}  // namespace nfpto
