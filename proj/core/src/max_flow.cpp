#include "max_flow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace crs::detail {

MaxFlow::MaxFlow(std::size_t nodes, double eps) : eps_(eps), out_(nodes), level_(nodes), next_(nodes) {}

std::size_t MaxFlow::add_arc(std::size_t from, std::size_t to, double capacity) {
  const std::size_t id = arcs_.size();
  arcs_.push_back({to, capacity, 0.0});
  arcs_.push_back({from, 0.0, 0.0});
  out_[from].push_back(id);
  out_[to].push_back(id + 1);
  return id;
}

bool MaxFlow::build_levels(std::size_t source, std::size_t sink) {
  std::fill(level_.begin(), level_.end(), -1);
  std::deque<std::size_t> queue{source};
  level_[source] = 0;
  while (!queue.empty()) {
    const std::size_t node = queue.front();
    queue.pop_front();
    for (std::size_t a : out_[node]) {
      const std::size_t to = arcs_[a].to;
      if (level_[to] < 0 && residual(a) > eps_) {
        level_[to] = level_[node] + 1;
        queue.push_back(to);
      }
    }
  }
  return level_[sink] >= 0;
}

double MaxFlow::push(std::size_t node, std::size_t sink, double limit) {
  if (node == sink) return limit;
  for (std::size_t& i = next_[node]; i < out_[node].size(); ++i) {
    const std::size_t a = out_[node][i];
    const std::size_t to = arcs_[a].to;
    if (level_[to] != level_[node] + 1 || residual(a) <= eps_) continue;
    const double pushed = push(to, sink, std::min(limit, residual(a)));
    if (pushed > 0.0) {
      arcs_[a].flow += pushed;
      arcs_[a ^ 1].flow -= pushed;
      return pushed;
    }
  }
  return 0.0;
}

double MaxFlow::solve(std::size_t source, std::size_t sink) {
  double total = 0.0;
  while (build_levels(source, sink)) {
    std::fill(next_.begin(), next_.end(), 0);
    while (true) {
      const double pushed = push(source, sink, std::numeric_limits<double>::infinity());
      if (pushed <= eps_) break;
      total += pushed;
    }
  }
  return total;
}

std::vector<std::uint8_t> MaxFlow::source_side(std::size_t source) const {
  std::vector<std::uint8_t> seen(out_.size(), 0);
  std::deque<std::size_t> queue{source};
  seen[source] = 1;
  while (!queue.empty()) {
    const std::size_t node = queue.front();
    queue.pop_front();
    for (std::size_t a : out_[node]) {
      const std::size_t to = arcs_[a].to;
      if (!seen[to] && residual(a) > eps_) {
        seen[to] = 1;
        queue.push_back(to);
      }
    }
  }
  return seen;
}

}  // namespace crs::detail
