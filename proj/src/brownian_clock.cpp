#include "vclock/brownian_clock.hpp"

#include <cmath>
#include <sstream>

#include "vclock/errors.hpp"
#include "vclock/rng.hpp"

namespace vclock {

BrownianClock::BrownianClock(std::uint64_t seed, std::uint64_t stream, double coarse_step, int depth,
                             std::size_t node_budget)
    : seed_(seed), stream_(stream), h0_(coarse_step), depth_(depth), budget_(node_budget) {
  if (!(coarse_step > 0.0) || !std::isfinite(coarse_step)) throw DomainError("BrownianClock: coarse step must be > 0");
  if (depth < 0 || depth > 24) throw DomainError("BrownianClock: depth must lie in [0, 24]");
  h_ = std::ldexp(h0_, -depth_);
  mask_ = (std::size_t{1} << depth_) - 1;
  coarse_.push_back(0.0);
}

BrownianClock BrownianClock::with_fine_step(std::uint64_t seed, std::uint64_t stream, double fine_step, int depth) {
  if (!(fine_step > 0.0)) throw DomainError("BrownianClock: fine step must be > 0");
  return BrownianClock(seed, stream, std::ldexp(fine_step, depth), depth);
}

const std::vector<double>& BrownianClock::cell(std::size_t c) const {
  if (c < cells_.size() && !cells_[c].empty()) return cells_[c];
  const std::size_t width = std::size_t{1} << depth_;
  if ((live_cells_ + 1) * width > budget_) {
    std::ostringstream os;
    os << "BrownianClock: node budget " << budget_ << " exhausted at clock time " << static_cast<double>(c) * h0_;
    throw BudgetError(os.str());
  }
  if (coarse_.size() < c + 2) {
    // one engine replayed from the start keeps coarse values independent of query order
    Engine eng = make_engine({seed_, stream_, kTagClockCoarse});
    std::normal_distribution<double> g;
    std::vector<double> walk(1, 0.0);
    walk.reserve(c + 2);
    const double sd = std::sqrt(h0_);
    while (walk.size() < c + 2) walk.push_back(walk.back() + sd * g(eng));
    // grow geometrically so replays stay amortised
    const std::size_t target = std::max(c + 2, 2 * coarse_.size());
    while (walk.size() < target) walk.push_back(walk.back() + sd * g(eng));
    coarse_ = std::move(walk);
  }
  if (cells_.size() <= c) cells_.resize(c + 1);
  auto& v = cells_[c];
  ++live_cells_;
  v.assign(width + 1, 0.0);
  v[0] = coarse_[c];
  v[width] = coarse_[c + 1];
  Engine eng = make_engine({seed_, stream_, kTagClockCell, c});
  std::normal_distribution<double> g;
  for (std::size_t stride = width / 2; stride >= 1; stride /= 2) {
    const double sd = std::sqrt(0.5 * static_cast<double>(stride) * h_);
    for (std::size_t i = stride; i < width; i += 2 * stride) v[i] = 0.5 * (v[i - stride] + v[i + stride]) + sd * g(eng);
  }
  return v;
}

double BrownianClock::node(std::size_t k) const { return cell(k >> depth_)[k & mask_]; }

double BrownianClock::operator()(double u) const {
  if (!(u >= 0.0)) throw DomainError("BrownianClock: clock time must be >= 0");
  const double pos = u / h_;
  const double fl = std::floor(pos);
  const auto k = static_cast<std::size_t>(fl);
  const auto& v = cell(k >> depth_);
  const std::size_t i = k & mask_;
  const double w = pos - fl;
  if (w == 0.0) return v[i];
  return v[i] + w * (v[i + 1] - v[i]);
}

}  // namespace vclock
