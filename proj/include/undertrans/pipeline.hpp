#pragma once

#include <vector>

#include "undertrans/channel.hpp"
#include "undertrans/decoder.hpp"

namespace undertrans {

/// Decodes one pair's source with the exact scorer under `spec` (the pair's
/// level overrides spec.level).
DecodeRecord decode_pair(const Pair& pair, const ChannelSpec& spec, const BeamConfig& beam,
                         const PenaltyConfig& penalty);

/// Decodes every pair; records come back in corpus order whatever the worker
/// count (0 = hardware concurrency).
std::vector<DecodeRecord> decode_corpus(const std::vector<Pair>& corpus, const ChannelSpec& spec,
                                        const BeamConfig& beam, const PenaltyConfig& penalty,
                                        unsigned workers = 0);

}  // namespace undertrans
