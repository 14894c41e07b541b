#include "undertrans/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "undertrans/scorer.hpp"

namespace undertrans {

DecodeRecord decode_pair(const Pair& pair, const ChannelSpec& spec, const BeamConfig& beam,
                         const PenaltyConfig& penalty) {
  ChannelSpec local = spec;
  local.level = pair.level;
  const ExactScorer scorer(local, pair.source);
  DecodeRecord record = beam_search(scorer, pair.source, beam, penalty);
  record.id = pair.id;
  return record;
}

std::vector<DecodeRecord> decode_corpus(const std::vector<Pair>& corpus, const ChannelSpec& spec,
                                        const BeamConfig& beam, const PenaltyConfig& penalty,
                                        unsigned workers) {
  beam.validate();
  penalty.validate();
  std::vector<DecodeRecord> records(corpus.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, corpus.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      try {
        records[i] = decode_pair(corpus[i], spec, beam, penalty);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

}  // namespace undertrans
