#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gtsim {

using Engine = std::mt19937_64;

// Purpose tags keep the streams of different experiment factors disjoint, so
// changing one seed leaves the others' draws untouched.
enum class StreamPurpose : std::uint32_t {
  problem = 1,
  noise = 2,
  zeta = 3,
  gossip = 4,
  contraction_fit = 5,
  initial_point = 6,
};

/// Independent engine for (seed, purpose, index). `index` is the agent id for
/// per-agent streams.
Engine make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0);

/// The per-run random streams: one noise stream per agent, one coin stream for
/// the snapshot indicator, one stream for gossip edge draws.
class RandomStreams {
 public:
  RandomStreams(int agents, std::uint64_t noise_seed, std::uint64_t zeta_seed,
                std::uint64_t gossip_seed);

  Engine& agent(int i) { return agents_[static_cast<std::size_t>(i)]; }
  Engine& zeta() { return zeta_; }
  Engine& gossip() { return gossip_; }
  int agents() const { return static_cast<int>(agents_.size()); }

 private:
  std::vector<Engine> agents_;
  Engine zeta_;
  Engine gossip_;
};

}  // namespace gtsim
