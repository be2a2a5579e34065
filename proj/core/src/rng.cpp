#include "herdsim/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace herdsim {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// FNV-1a over the path components, separated by 0x1f, folded onto a
// seed-derived basis so distinct seeds give unrelated stream families.
std::uint64_t fnv1a_path(std::uint64_t basis,
                         std::initializer_list<std::string_view> path) {
  std::uint64_t h = basis;
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  for (const auto& part : path) {
    for (unsigned char c : part) {
      h ^= c;
      h *= kPrime;
    }
    h ^= 0x1f;
    h *= kPrime;
  }
  return h;
}

}  // namespace

std::uint64_t Rng::derive_key(std::uint64_t seed,
                              std::initializer_list<std::string_view> path) {
  std::uint64_t s = seed;
  std::uint64_t basis = splitmix64(s) ^ 0xcbf29ce484222325ULL;
  return fnv1a_path(basis, path);
}

Rng::Rng(std::uint64_t seed) { seed_state(seed); }

Rng::Rng(std::uint64_t seed, std::initializer_list<std::string_view> path) {
  seed_state(derive_key(seed, path));
}

void Rng::seed_state(std::uint64_t key) {
  std::uint64_t s = key;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::next_below: bound must be > 0");
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_gaussian_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_double() - 1.0;
    v = 2.0 * next_double() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_gaussian_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

}  // namespace herdsim
