// Copyright 2026 The Anatomy-kNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "anatomy/kd_tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace anatomy {
namespace {

// Running k-th smallest distance plus every point seen at or below it.
class KthCollector {
 public:
  explicit KthCollector(std::size_t k) : k_(k) {}

  double bound() const {
    return heap_.size() < k_ ? std::numeric_limits<double>::infinity() : heap_.top();
  }

  void offer(double distance, std::uint32_t index) {
    if (distance > bound()) return;
    candidates_.push_back({distance, index});
    if (heap_.size() < k_) {
      heap_.push(distance);
    } else if (distance < heap_.top()) {
      heap_.pop();
      heap_.push(distance);
    }
  }

  std::vector<Candidate> finish() && {
    double kth = bound();
    std::erase_if(candidates_, [kth](const Candidate& c) { return c.distance > kth; });
    return std::move(candidates_);
  }

 private:
  std::size_t k_;
  std::priority_queue<double> heap_;
  std::vector<Candidate> candidates_;
};

}  // namespace

std::vector<Candidate> within_kth_exhaustive(const FeatureSpace& space, const PointSet& points,
                                             const EncodedQuery& query, std::size_t k) {
  const std::size_t nn = space.numeric_count();
  const std::size_t nc = space.categorical_count();
  std::vector<double> all(points.size);
  for (std::size_t i = 0; i < points.size; ++i) {
    all[i] = space.distance(points.numeric.data() + i * nn, points.categorical.data() + i * nc,
                            query.numeric.data(), query.categorical.data());
  }
  if (points.size == 0 || k == 0) return {};
  std::vector<double> sorted = all;
  std::size_t kth_pos = std::min(k, points.size) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + kth_pos, sorted.end());
  double kth = sorted[kth_pos];
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < points.size; ++i) {
    if (all[i] <= kth) out.push_back({all[i], static_cast<std::uint32_t>(i)});
  }
  return out;
}

KdTree::KdTree(const FeatureSpace& space, const PointSet& points, std::size_t leaf_size)
    : space_(&space), points_(&points), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  for (std::size_t j = 0; j < space.categorical_count(); ++j) {
    word_offset_.push_back(words_per_node_);
    words_per_node_ += space.words(j);
  }
  order_.resize(points.size);
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  if (points.size > 0) build(0, static_cast<std::uint32_t>(points.size));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const FeatureSpace& space = *space_;
  const PointSet& pts = *points_;
  const std::size_t nn = space.numeric_count();
  const std::size_t nc = space.categorical_count();

  auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1});
  box_.resize(box_.size() + 2 * nn);
  coverage_.resize(coverage_.size() + words_per_node_, 0);

  double* box = box_.data() + id * 2 * nn;
  for (std::size_t j = 0; j < nn; ++j) {
    box[2 * j] = std::numeric_limits<double>::infinity();
    box[2 * j + 1] = -std::numeric_limits<double>::infinity();
  }
  std::uint64_t* cover = coverage_.data() + id * words_per_node_;
  std::vector<std::int32_t> first_code(nc);
  std::vector<bool> varied(nc, false);
  for (std::uint32_t p = begin; p < end; ++p) {
    std::uint32_t i = order_[p];
    for (std::size_t j = 0; j < nn; ++j) {
      double v = pts.numeric[i * nn + j];
      box[2 * j] = std::min(box[2 * j], v);
      box[2 * j + 1] = std::max(box[2 * j + 1], v);
    }
    for (std::size_t j = 0; j < nc; ++j) {
      std::int32_t code = pts.categorical[i * nc + j];
      space.accumulate(j, code, cover + word_offset_[j]);
      if (p == begin) {
        first_code[j] = code;
      } else if (code != first_code[j]) {
        varied[j] = true;
      }
    }
  }

  if (end - begin <= leaf_size_) return id;

  // split on the axis with the largest weighted spread
  double best = 0.0;
  int best_numeric = -1;
  int best_categorical = -1;
  for (std::size_t j = 0; j < nn; ++j) {
    double spread = box[2 * j + 1] - box[2 * j];
    double score = space.numeric_weight(j) * spread * spread;
    if (score > best) {
      best = score;
      best_numeric = static_cast<int>(j);
      best_categorical = -1;
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    double score = varied[j] ? space.categorical_weight(j) : 0.0;
    if (score > best) {
      best = score;
      best_categorical = static_cast<int>(j);
      best_numeric = -1;
    }
  }
  if (best_numeric < 0 && best_categorical < 0) return id;  // all points coincide

  std::uint32_t mid = begin + (end - begin) / 2;
  auto first = order_.begin() + begin;
  auto last = order_.begin() + end;
  if (best_numeric >= 0) {
    std::size_t j = static_cast<std::size_t>(best_numeric);
    std::nth_element(first, order_.begin() + mid, last, [&](std::uint32_t a, std::uint32_t b) {
      return pts.numeric[a * nn + j] < pts.numeric[b * nn + j];
    });
  } else {
    std::size_t j = static_cast<std::size_t>(best_categorical);
    std::nth_element(first, order_.begin() + mid, last, [&](std::uint32_t a, std::uint32_t b) {
      return pts.categorical[a * nc + j] < pts.categorical[b * nc + j];
    });
  }

  std::int32_t left = build(begin, mid);
  std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::lower_bound(std::size_t node, const EncodedQuery& query) const {
  const FeatureSpace& space = *space_;
  const std::size_t nn = space.numeric_count();
  const double* box = box_.data() + node * 2 * nn;
  // same summation order and per-term arithmetic as FeatureSpace::distance
  double d = 0.0;
  for (std::size_t j = 0; j < nn; ++j) {
    double q = query.numeric[j];
    double diff = 0.0;
    if (q < box[2 * j]) {
      diff = box[2 * j] - q;
    } else if (q > box[2 * j + 1]) {
      diff = q - box[2 * j + 1];
    }
    d += space.numeric_weight(j) * diff * diff;
  }
  const std::uint64_t* cover = coverage_.data() + node * words_per_node_;
  for (std::size_t j = 0; j < space.categorical_count(); ++j) {
    std::int32_t leaf = query.categorical[j];
    bool in = leaf >= 0 && ((cover[word_offset_[j] + (leaf >> 6)] >> (leaf & 63)) & 1U);
    if (!in) d += space.categorical_weight(j);
  }
  return d;
}

std::vector<Candidate> KdTree::within_kth(const EncodedQuery& query, std::size_t k) const {
  if (nodes_.empty() || k == 0) return {};
  const FeatureSpace& space = *space_;
  const PointSet& pts = *points_;
  const std::size_t nn = space.numeric_count();
  const std::size_t nc = space.categorical_count();
  KthCollector collector(k);

  // explicit stack of (node, lower bound)
  std::vector<std::pair<std::int32_t, double>> stack;
  stack.emplace_back(0, lower_bound(0, query));
  while (!stack.empty()) {
    auto [id, lb] = stack.back();
    stack.pop_back();
    if (lb > collector.bound()) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::uint32_t p = node.begin; p < node.end; ++p) {
        std::uint32_t i = order_[p];
        double d = space.distance(pts.numeric.data() + i * nn, pts.categorical.data() + i * nc,
                                  query.numeric.data(), query.categorical.data());
        collector.offer(d, i);
      }
      continue;
    }
    double lb_left = lower_bound(node.left, query);
    double lb_right = lower_bound(node.right, query);
    // push the farther child first so the nearer one is expanded next
    if (lb_left <= lb_right) {
      stack.emplace_back(node.right, lb_right);
      stack.emplace_back(node.left, lb_left);
    } else {
      stack.emplace_back(node.left, lb_left);
      stack.emplace_back(node.right, lb_right);
    }
  }
  return std::move(collector).finish();
}

}  // namespace anatomy
