#pragma once

#include <cstddef>
#include <vector>

#include "cachegeo/model.hpp"

namespace cachegeo {

/// One piece of a content's probability mass inside a unit memory block.
/// Intervals are half-open: [start, end).
struct Segment {
  std::size_t content;
  std::size_t block;
  double start;
  double end;
};

/// Sequential-fill layout of a caching policy over M unit blocks.
///
/// Contents are laid out in index order; a content that does not fit in the
/// remainder of the current block continues from offset 0 of the next block.
/// A helper draws one u in [0,1) and caches, from every block, the content
/// whose interval contains u. Each content therefore lands in the cache with
/// probability equal to its total segment length.
struct BlockLayout {
  std::size_t blocks = 0;
  std::vector<Segment> segments;  // ordered by (block, start)
  double total_mass = 0.0;

  /// True when a helper drawing u caches content. O(1): a content owns at
  /// most two segments.
  bool includes(std::size_t content, double u) const;

 private:
  friend BlockLayout build_block_layout(const CachingPolicy& policy);
  friend void sample_cache_into(const BlockLayout& layout, double u, std::vector<std::size_t>& out);
  std::vector<std::size_t> block_begin_;      // first segment of each block, plus end sentinel
  std::vector<std::size_t> content_first_;    // index into segments or npos
};

/// Throws std::invalid_argument for an infeasible policy.
BlockLayout build_block_layout(const CachingPolicy& policy);

/// Content indices (ascending, distinct) cached by a helper that drew u.
std::vector<std::size_t> sample_cache(const BlockLayout& layout, double u);

/// Same as sample_cache, appending into a caller-owned buffer (cleared first).
void sample_cache_into(const BlockLayout& layout, double u, std::vector<std::size_t>& out);

}  // namespace cachegeo
