#include "cachegeo/placement.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cachegeo {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
// Mass below this is float residue from the running offset, not content.
constexpr double kResidue = 1e-12;

}  // namespace

BlockLayout build_block_layout(const CachingPolicy& policy) {
  if (auto violation = check_budget(policy)) {
    throw std::invalid_argument("build_block_layout: " + *violation);
  }
  BlockLayout layout;
  layout.blocks = static_cast<std::size_t>(policy.memory);
  layout.total_mass = stable_sum(policy.probs);
  layout.content_first_.assign(policy.probs.size(), kNone);

  std::size_t block = 0;
  double offset = 0.0;
  for (std::size_t j = 0; j < policy.probs.size(); ++j) {
    double remaining = policy.probs[j];
    bool first_piece = true;
    double first_start = 0.0;
    while (remaining > kResidue && block < layout.blocks) {
      const double take = std::min(remaining, 1.0 - offset);
      double end = offset + take;
      if (!first_piece) {
        // Wrapped piece [0, b) must stay clear of the first piece [a, 1).
        end = std::min(end, first_start);
      }
      if (end > offset) {
        if (first_piece) {
          layout.content_first_[j] = layout.segments.size();
          first_start = offset;
        }
        layout.segments.push_back({j, block, offset, end});
        first_piece = false;
      }
      remaining -= take;
      offset += take;
      if (offset >= 1.0 - kResidue) {
        ++block;
        offset = 0.0;
      }
    }
  }

  layout.block_begin_.assign(layout.blocks + 1, layout.segments.size());
  for (std::size_t s = layout.segments.size(); s-- > 0;) {
    layout.block_begin_[layout.segments[s].block] = s;
  }
  for (std::size_t b = layout.blocks; b-- > 0;) {
    layout.block_begin_[b] = std::min(layout.block_begin_[b], layout.block_begin_[b + 1]);
  }
  return layout;
}

bool BlockLayout::includes(std::size_t content, double u) const {
  if (content >= content_first_.size()) return false;
  std::size_t s = content_first_[content];
  if (s == kNone) return false;
  for (; s < segments.size() && segments[s].content == content; ++s) {
    if (u >= segments[s].start && u < segments[s].end) return true;
  }
  return false;
}

void sample_cache_into(const BlockLayout& layout, double u, std::vector<std::size_t>& out) {
  out.clear();
  for (std::size_t b = 0; b < layout.blocks; ++b) {
    const auto first = layout.segments.begin() + static_cast<std::ptrdiff_t>(layout.block_begin_[b]);
    const auto last = layout.segments.begin() + static_cast<std::ptrdiff_t>(layout.block_begin_[b + 1]);
    // Segments in a block tile [0, end_of_last) contiguously, so the hit is
    // the first segment ending after u.
    const auto hit = std::upper_bound(first, last, u,
                                      [](double value, const Segment& seg) { return value < seg.end; });
    if (hit != last && u >= hit->start) out.push_back(hit->content);
  }
  std::sort(out.begin(), out.end());
}

std::vector<std::size_t> sample_cache(const BlockLayout& layout, double u) {
  std::vector<std::size_t> out;
  out.reserve(layout.blocks);
  sample_cache_into(layout, u, out);
  return out;
}

}  // namespace cachegeo
