#pragma once

#include <vector>

namespace specdegen {

// Composite Simpson on uniform samples; an odd interval count closes with the 3/8 rule.
double simpson(const std::vector<double>& v, double h, size_t first = 0, size_t last = size_t(-1));

// int_{x0}^{x_end} of uniformly sampled v.
double tail_integral(const std::vector<double>& x, const std::vector<double>& v, double x0);

}  // namespace specdegen
