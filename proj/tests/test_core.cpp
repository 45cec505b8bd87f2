// Copyright 2026 The negcf Authors.
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

#include <charconv>
#include <cmath>
#include <random>

#include <doctest.h>

#include "negcf/core.hpp"

using namespace negcf;

TEST_CASE("stream_rng gives distinct reproducible streams") {
  Rng a1 = stream_rng(42, 0);
  Rng a2 = stream_rng(42, 0);
  Rng b = stream_rng(42, 1);
  CHECK(a1() == a2());
  Rng a3 = stream_rng(42, 0);
  CHECK(a3() != b());
}

TEST_CASE("sigmoid is stable and symmetric") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid(1000.0) == doctest::Approx(1.0));
  CHECK(sigmoid(-1000.0) == doctest::Approx(0.0));
  for (double x : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    CHECK(sigmoid(x) + sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("softplus matches reference values") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(softplus(1.0) == doctest::Approx(1.3132616875182228).epsilon(1e-15));
  CHECK(softplus(1000.0) == doctest::Approx(1000.0));
  CHECK(softplus(-1000.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(softplus(750.0)));
  CHECK(std::isfinite(softplus(-750.0)));
}

TEST_CASE("dot accumulates in double precision") {
  std::vector<float> a = {1.0f, 1e-8f, -1.0f};
  std::vector<float> b = {1.0f, 1.0f, 1.0f};
  CHECK(dot(a, b) == doctest::Approx(1e-8).epsilon(1e-6));
}

TEST_CASE("double_repr round-trips doubles exactly") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = dist(rng);
    std::string s = double_repr(v);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(ec == std::errc());
    REQUIRE(ptr == s.data() + s.size());
    REQUIRE(back == v);
  }
  CHECK(double_repr(0.1) == "0.1");
  CHECK(double_repr(-2.0) == "-2");
}

TEST_CASE("matrix rows are independent spans") {
  Matrix m(3, 2);
  m.row(1)[0] = 5.0f;
  CHECK(m.row(0)[0] == 0.0f);
  CHECK(m.row(1)[0] == 5.0f);
  CHECK(m.size() == 6);
  Matrix n(3, 2);
  CHECK_FALSE(m == n);
  n.row(1)[0] = 5.0f;
  CHECK(m == n);
}

TEST_CASE("fnv1a64 distinguishes nearby strings") {
  CHECK(fnv1a64("a") != fnv1a64("b"));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}
