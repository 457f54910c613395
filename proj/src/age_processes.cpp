#include "netmpc/age_processes.hpp"

#include <algorithm>

namespace netmpc {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng CounterRng::stream(std::uint64_t seed, std::uint64_t stream_id) {
  return CounterRng(splitmix64(seed ^ splitmix64(stream_id)));
}

std::uint64_t CounterRng::next_u64() { return splitmix64(seed_ + counter_++ * 0x9e3779b97f4a7c15ull); }

double CounterRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int CounterRng::next_int(int lo, int hi) {
  return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

int CounterRng::sample(const Vec& probs, int lo) {
  const double u = next_double();
  double acc = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return lo + i;
  }
  return lo + static_cast<int>(probs.size()) - 1;
}

void AgeProcessSpec::validate() const {
  if (lo < 0 || hi < lo) throw std::invalid_argument("age bounds must satisfy 0 <= lo <= hi");
  if (chain && script) throw std::invalid_argument("age process cannot be both scripted and chain-driven");
  if (chain && (chain->lo() != lo || chain->hi() != hi))
    throw std::invalid_argument("chain range must match the age bounds");
  if (script) validate_age_sequence(*script, lo, hi);
}

void validate_age_sequence(const std::vector<int>& ages, int lo, int hi) {
  for (std::size_t k = 0; k < ages.size(); ++k) {
    if (ages[k] < lo || ages[k] > hi)
      throw std::invalid_argument("scripted age leaves its range");
    if (k > 0 && ages[k] > ages[k - 1] + 1)
      throw std::invalid_argument("scripted age grows by more than one per step");
  }
}

namespace {

std::vector<int> sample_process(const AgeProcessSpec& spec, int horizon, CounterRng rng) {
  spec.validate();
  if (spec.script) {
    if (static_cast<int>(spec.script->size()) < horizon)
      throw std::invalid_argument("scripted age process shorter than the horizon");
    return std::vector<int>(spec.script->begin(), spec.script->begin() + horizon);
  }
  std::vector<int> ages(horizon);
  for (int k = 0; k < horizon; ++k) {
    if (spec.chain) {
      ages[k] = (k == 0) ? rng.sample(spec.chain->mu_vec(), spec.lo)
                         : rng.sample(spec.chain->phi_mat().row(ages[k - 1]- spec.lo).transpose(), spec.lo);
    } else {
      const int hi = (k == 0) ? spec.hi : std::min(spec.hi, ages[k - 1] + 1);
      ages[k] = rng.next_int(spec.lo, hi);
    }
  }
  return ages;
}

}  // namespace

NetworkRealization sample_realization(const AgeProcessSpec& d,
                                      const AgeProcessSpec& h,
                                      const AgeProcessSpec& s,
                                      int horizon, std::uint64_t seed) {
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (!d.script && !d.chain)
    throw std::invalid_argument("the controller->actuator age process requires a chain or a script");
  NetworkRealization r;
  r.D = sample_process(d, horizon, CounterRng::stream(seed, 1));
  r.H = sample_process(h, horizon, CounterRng::stream(seed, 2));
  r.S = sample_process(s, horizon, CounterRng::stream(seed, 3));
  return r;
}

FirstArrivals first_arrival_times(const NetworkRealization& r) {
  const int horizon = static_cast<int>(r.D.size());
  FirstArrivals f;
  for (int k = 0; k < horizon; ++k) {
    if (f.K_h < 0 && r.H[k] <= k) f.K_h = k;
    if (f.K_d < 0 && r.D[k] <= k) f.K_d = k;
    if (f.K_s < 0 && r.S[k] <= k) f.K_s = k;
    if (f.K_sd < 0 && f.K_s >= 0 && f.K_d >= 0 && k >= f.K_s && k - r.S[k] >= f.K_d)
      f.K_sd = k;
  }
  if (f.K_h < 0 || f.K_d < 0 || f.K_s < 0 || f.K_sd < 0)
    throw std::invalid_argument("realization too short: a first-arrival time never occurs");
  return f;
}

std::vector<int> ages_from_packet_delays(
    const std::vector<std::optional<int>>& delays, int lo, int hi) {
  const int horizon = static_cast<int>(delays.size());
  std::vector<int> ages(horizon);
  for (int k = 0; k < horizon; ++k) {
    int newest = -1;
    for (int j = 0; j <= k; ++j)
      if (delays[j] && j + *delays[j] <= k) newest = j;
    const int age = (newest < 0) ? k + 1 : k - newest;
    if (age > hi || age < lo)
      throw std::invalid_argument("packet trace incompatible with the age bounds");
    ages[k] = age;
  }
  validate_age_sequence(ages, lo, hi);
  return ages;
}

}  // namespace netmpc
