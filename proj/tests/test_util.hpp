// Copyright 2026 The dynorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DYNORM_TESTS_TEST_UTIL_HPP_
#define DYNORM_TESTS_TEST_UTIL_HPP_

#include <string>
#include <vector>

#include "dynorm/preference.hpp"

namespace testutil {

inline dynorm::PreferenceSet strict(
    const std::vector<std::string>& order) {
  std::vector<std::vector<std::string>> tiers;
  for (const auto& id : order) tiers.push_back({id});
  return dynorm::PreferenceSet(tiers);
}

// The worked 100-voter election: 70% A>B>C, 20% B>C>A, 10% C>A>B.
inline dynorm::WeightedProfile election_70_20_10() {
  return dynorm::WeightedProfile(
      {"A", "B", "C"},
      {{strict({"A", "B", "C"}), dynorm::Rational(70, 100)},
       {strict({"B", "C", "A"}), dynorm::Rational(20, 100)},
       {strict({"C", "A", "B"}), dynorm::Rational(10, 100)}});
}

// The 24-voter election: 8/24 A>B>C>D, 3/24 D>A>B>C, 6/24 D>A>C>B,
// 7/24 B>C>D>A.
inline dynorm::WeightedProfile election_24() {
  return dynorm::WeightedProfile(
      {"A", "B", "C", "D"},
      {{strict({"A", "B", "C", "D"}), dynorm::Rational(8, 24)},
       {strict({"D", "A", "B", "C"}), dynorm::Rational(3, 24)},
       {strict({"D", "A", "C", "B"}), dynorm::Rational(6, 24)},
       {strict({"B", "C", "D", "A"}), dynorm::Rational(7, 24)}});
}

// The rescaled five-set election after adding C~D > B > A at weight 8/32.
inline dynorm::WeightedProfile election_32() {
  return dynorm::WeightedProfile(
      {"A", "B", "C", "D"},
      {{strict({"A", "B", "C", "D"}), dynorm::Rational(6, 32)},
       {strict({"D", "A", "B", "C"}), dynorm::Rational(3, 32)},
       {strict({"D", "A", "C", "B"}), dynorm::Rational(8, 32)},
       {strict({"B", "C", "D", "A"}), dynorm::Rational(7, 32)},
       {dynorm::PreferenceSet({{"C", "D"}, {"B"}, {"A"}}),
        dynorm::Rational(8, 32)}});
}

inline dynorm::ProfileEntry added_set_p5() {
  return {dynorm::PreferenceSet({{"C", "D"}, {"B"}, {"A"}}),
          dynorm::Rational(8, 32)};
}

}  // namespace testutil

#endif  // DYNORM_TESTS_TEST_UTIL_HPP_
