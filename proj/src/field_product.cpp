#include "nfpto/field_product.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nfpto {

namespace {

double total_area(std::span<const double> areas) {
  double total = 0.0;
  for (size_t i = 0; i < areas.size(); ++i) {
    if (!(areas[i] > 0.0))
      throw std::domain_error("field product: areas must be positive (entry " +
                              std::to_string(i) + ")");
    total += areas[i];
  }
  return total;
}

}  // namespace

double nfp_product_form(std::span<const double> values,
                        std::span<const double> areas) {
  if (values.size() != areas.size())
    throw std::invalid_argument("field product: values/areas length mismatch");
  if (values.empty())
    throw std::invalid_argument("field product: empty input");
  const double total = total_area(areas);
  double g = 1.0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0))
      throw std::domain_error(
          "field product: values must be positive (entry " +
          std::to_string(i) + ")");
    g *= std::pow(values[i], areas[i] / total);
  }
  return g;
}

double nfp_log_form(std::span<const double> log_values,
                    std::span<const double> areas) {
  if (log_values.size() != areas.size())
    throw std::invalid_argument("field product: values/areas length mismatch");
  if (log_values.empty())
    throw std::invalid_argument("field product: empty input");
  const double total = total_area(areas);
  double acc = 0.0;
  for (size_t i = 0; i < log_values.size(); ++i) {
    if (!(log_values[i] <= 0.0))  // also rejects NaN
      throw std::domain_error(
          "field product: log values must be <= 0 (entry " +
          std::to_string(i) + ")");
    acc += log_values[i] * (areas[i] / total);
  }
  return std::exp(acc);
}

}  // namespace nfpto
