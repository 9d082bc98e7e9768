#pragma once

#include <random>
#include <string>

#include "fixture_world.hpp"
#include "webdep/foundation.hpp"

namespace webdep::testing {

// The list shipped under data/, parsed once.
inline const PublicSuffixList& shipped_psl() {
  static const PublicSuffixList psl =
      PublicSuffixList::load(source_dir() / "data" / "public_suffix_list.dat");
  return psl;
}

inline std::string random_label(std::mt19937_64& rng, std::size_t max_len = 6) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
  std::string s(len(rng), 'a');
  for (auto& c : s) c = kAlphabet[pick(rng)];
  return s;
}

}  // namespace webdep::testing
