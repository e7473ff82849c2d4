#pragma once

#include <vector>

namespace rrf::stats {

/// Nearest-rank percentile, q in [0, 100]: the ceil(q/100 * N)-th smallest sample
/// (the smallest one for q = 0).
double percentile(std::vector<double> samples, double q);

double mean(const std::vector<double>& samples);

struct Summary {
  double min, p25, p50, p75, max, mean;
};

Summary summarize(const std::vector<double>& samples);

}  // namespace rrf::stats
