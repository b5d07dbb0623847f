#pragma once

#include <span>

namespace tneb {

// Hartigan's dip statistic of a 1D sample: the sup distance between the
// empirical CDF and the closest unimodal CDF, in (0, 0.25]. Values need not be
// sorted. The result is never below 1/(2n).
double dip_statistic(std::span<const double> values);

}  // namespace tneb
