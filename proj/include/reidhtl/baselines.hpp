#pragma once

#include <optional>
#include <vector>

#include "reidhtl/types.hpp"

namespace reidhtl {

/// Entrywise mean of the source metrics (Avg-Source).
Metric avg_source(const std::vector<Metric>& sources);

/// KISSME: (Σ_S + εI)⁻¹ − (Σ_D + εI)⁻¹, clipped to the PSD cone. Each
/// scatter gets its own ridge ε = 1e-6·trace/d unless `regularization` is
/// given. SingularScatter when a regularized scatter is still not positive
/// definite.
Metric kissme(const PairData& pairs, std::optional<double> regularization = std::nullopt);

Metric euclidean(int dim);

}  // namespace reidhtl
