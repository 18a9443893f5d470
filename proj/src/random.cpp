#include "ldcluster/random.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace ldc {

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : counter_(mix(mix(master_seed ^ 0x6a09e667f3bcc909ULL) + mix(stream_id + 0x3c6ef372fe94f82bULL))) {}

double RandomStream::normal() {
  // Ziggurat; the distribution object carries no state between calls.
  boost::random::normal_distribution<double> dist;
  return dist(*this);
}

double RandomStream::exponential(double rate) {
  boost::random::exponential_distribution<double> dist(rate);
  return dist(*this);
}

RandomStream RandomStream::split() {
  return RandomStream(mix((*this)() ^ 0xa54ff53a5f1d36f1ULL));
}

}  // namespace ldc
