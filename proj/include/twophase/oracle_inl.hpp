#pragma once

#include <bit>
#include <vector>

namespace twophase::oracle {

namespace detail {

template <typename Fn>
void subsets_rec(const std::vector<NodeId>& nodes, std::size_t start, std::size_t remaining,
                 NodeMask current, Fn& fn) {
  if (remaining == 0) {
    fn(current);
    return;
  }
  for (std::size_t i = start; i + remaining <= nodes.size(); ++i) {
    subsets_rec(nodes, i + 1, remaining - 1, current | (NodeMask{1} << nodes[i]), fn);
  }
}

}  // namespace detail

template <typename Fn>
void for_each_subset(NodeMask universe, std::size_t k, Fn&& fn) {
  std::vector<NodeId> nodes = from_mask(universe);
  if (k > nodes.size()) return;
  detail::subsets_rec(nodes, 0, k, NodeMask{0}, fn);
}

}  // namespace twophase::oracle
