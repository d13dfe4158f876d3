// Copyright 2026 The salient-reid Authors. All Rights Reserved.
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

#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "helpers.hpp"
#include "sreid/checkpoint.hpp"
#include "sreid/errors.hpp"

using namespace sreid;

TEST_CASE("checkpoint round trip is bit exact") {
  testing::TempDir dir("ckpt");
  Model a(testing::tiny_model_config(5, 1));
  for (Parameter* p : a.parameters()) {
    for (double& v : p->value.values()) v = v * 1.0000001 + 1e-300;
  }
  const auto path = dir.path() / "m.ckpt";
  save_checkpoint(path, a, {{"epoch", 4}});
  const Checkpoint c = load_checkpoint(path);
  CHECK(c.meta["epoch"] == 4);
  Model b(testing::tiny_model_config(5, 2));
  restore(b, c);
  CHECK(testing::snapshot(a) == testing::snapshot(b));
  CHECK(b.ppool(Branch::kEsb).l == a.ppool(Branch::kEsb).l);

  Model wrong(testing::tiny_model_config(6, 1));
  CHECK_THROWS_AS(restore(wrong, c), DataError);
}

TEST_CASE("corrupted checkpoints are rejected") {
  testing::TempDir dir("ckpt_bad");
  const Model m(testing::tiny_model_config());
  const auto path = dir.path() / "m.ckpt";
  save_checkpoint(path, m, {});
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x40;
  std::ofstream(dir.path() / "flipped.ckpt", std::ios::binary) << flipped;
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "flipped.ckpt"), DataError);
  std::ofstream(dir.path() / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() / 3);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "short.ckpt"), DataError);
  std::ofstream(dir.path() / "junk.ckpt") << "hello";
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "junk.ckpt"), DataError);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "none.ckpt"), DataError);
}
