#include "krrdd/error.hpp"

#include <string>

namespace krrdd {

BadMagic::BadMagic(std::string path, unsigned expected, unsigned found)
    : DataError(path + ": bad IDX magic " + std::to_string(found) + " (expected " +
                std::to_string(expected) + ")"),
      expected_(expected),
      found_(found) {}

NeedsLargerJitter::NeedsLargerJitter(std::size_t pivot, double jitter)
    : NumericalError("cholesky failed at pivot " + std::to_string(pivot) + " with jitter " +
                     std::to_string(jitter) + "; needs larger jitter"),
      pivot_(pivot),
      jitter_(jitter) {}

ResampleS::ResampleS(std::size_t rank, std::size_t required)
    : NumericalError("phi(S) has rank " + std::to_string(rank) + " < " +
                     std::to_string(required) + "; resample S"),
      rank_(rank),
      required_(required) {}

}  // namespace krrdd
