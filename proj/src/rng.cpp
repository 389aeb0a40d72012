#include "gtsim/rng.hpp"

namespace gtsim {

Engine make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(index & 0xffffffffu),
                    static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

RandomStreams::RandomStreams(int agents, std::uint64_t noise_seed, std::uint64_t zeta_seed,
                             std::uint64_t gossip_seed)
    : zeta_(make_stream(zeta_seed, StreamPurpose::zeta)),
      gossip_(make_stream(gossip_seed, StreamPurpose::gossip)) {
  agents_.reserve(static_cast<std::size_t>(agents));
  for (int i = 0; i < agents; ++i) {
    agents_.push_back(make_stream(noise_seed, StreamPurpose::noise, static_cast<std::uint64_t>(i)));
  }
}

}  // namespace gtsim
