#pragma once

#include <cstddef>
#include <vector>

#include "callctx/context/usage.hpp"

namespace callctx::context {

struct Similarity {
  double value = 0.0;
  bool empty_target = false;  // S_l was empty; value is defined as 0
};

// |S_l ∩ S_u| / |S_l|
Similarity usage_similarity(const TokenSet& target_left, const TokenSet& usage_left);

// Highest similarity first; ties prefer same-file usages, then the nearer
// site, then path order. At most `k` are returned.
std::vector<UsageContext> rank_usages(std::vector<UsageContext> usages, std::size_t k);

// Usages shown to a model by default.
inline constexpr std::size_t kDefaultUsageCount = 3;

}  // namespace callctx::context
