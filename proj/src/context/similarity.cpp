#include "callctx/context/similarity.hpp"

#include <algorithm>
#include <tuple>

namespace callctx::context {

Similarity usage_similarity(const TokenSet& target_left, const TokenSet& usage_left) {
  if (target_left.empty()) return {0.0, true};
  std::size_t shared = 0;
  auto a = target_left.begin();
  auto b = usage_left.begin();
  while (a != target_left.end() && b != usage_left.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++shared;
      ++a;
      ++b;
    }
  }
  return {static_cast<double>(shared) / static_cast<double>(target_left.size()), false};
}

std::vector<UsageContext> rank_usages(std::vector<UsageContext> usages, std::size_t k) {
  auto key = [](const UsageContext& u) {
    return std::make_tuple(-u.similarity, u.same_file ? 0 : 1, u.same_file ? u.distance : 0u,
                           std::cref(u.file), u.source.begin_byte);
  };
  std::stable_sort(usages.begin(), usages.end(),
                   [&](const UsageContext& a, const UsageContext& b) { return key(a) < key(b); });
  if (usages.size() > k) usages.resize(k);
  return usages;
}

}  // namespace callctx::context
