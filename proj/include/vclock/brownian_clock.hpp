#pragma once

#include <cstdint>
#include <vector>

namespace vclock {

// Brownian motion on clock time [0, inf), sampled lazily.
//
// Coarse nodes u = c h0 are a random walk drawn in order from one stream. Each coarse cell
// is refined by Brownian-bridge midpoints, level by level, to depth L (fine step h = h0 / 2^L)
// from a stream keyed by the cell index. Values therefore depend only on (seed, stream, h0)
// and not on the order of queries; a deeper clock with the same h0 reproduces every node of
// a shallower one. Between fine nodes the path is interpolated linearly.
class BrownianClock {
 public:
  BrownianClock(std::uint64_t seed, std::uint64_t stream, double coarse_step, int depth,
                std::size_t node_budget = 400'000'000);

  // Coarse step h0 and depth L giving a fine step of at most `fine_step`, with h0 = 2^L fine steps.
  static BrownianClock with_fine_step(std::uint64_t seed, std::uint64_t stream, double fine_step, int depth = 10);

  double operator()(double u) const;
  // W at fine node k, i.e. at u = k h.
  double node(std::size_t k) const;
  double fine_step() const { return h_; }
  double coarse_step() const { return h0_; }
  int depth() const { return depth_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  // Fine nodes generated so far.
  std::size_t nodes_materialized() const { return live_cells_ << depth_; }

 private:
  const std::vector<double>& cell(std::size_t c) const;

  std::uint64_t seed_, stream_;
  double h0_, h_;
  int depth_;
  std::size_t mask_;
  std::size_t budget_;
  mutable std::vector<double> coarse_;  // W(c h0)
  mutable std::vector<std::vector<double>> cells_;
  mutable std::size_t live_cells_ = 0;
};

}  // namespace vclock
