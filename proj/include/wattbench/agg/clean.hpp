#pragma once

#include "wattbench/agg/resample.hpp"
#include "wattbench/core/types.hpp"

namespace wattbench {

struct CleanResult {
  Series series;
  int removed = 0;
};

/// Robust outlier removal: points with |x - median| > mad_k * MAD become
/// missing. A constant series has MAD 0 and nothing strictly exceeds 0, so it
/// passes through untouched. method=none is the identity.
CleanResult clean(const Series& series, const CleaningConfig& config);

}  // namespace wattbench
