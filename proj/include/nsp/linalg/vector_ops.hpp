#pragma once

#include <span>
#include <vector>

namespace nsp {

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> x);
double norm_inf(std::span<const double> x);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

std::vector<double> add(std::span<const double> a, std::span<const double> b);
std::vector<double> subtract(std::span<const double> a, std::span<const double> b);
std::vector<double> scaled(std::span<const double> x, double alpha);

/// a + alpha * b
std::vector<double> add_scaled(std::span<const double> a, double alpha,
                               std::span<const double> b);

bool all_finite(std::span<const double> x);

/// Mean of squared differences.
double mean_squared_error(std::span<const double> a, std::span<const double> b);

}  // namespace nsp
