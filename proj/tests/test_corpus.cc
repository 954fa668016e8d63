// Copyright 2026 The Preflab Authors.
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

#include "preflab/corpus.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "preflab/error.h"

using namespace preflab;
using namespace preflab::corpus;

namespace {

PreferenceRecord Rec(const std::string& p, const std::string& w, const std::string& l,
                     const std::string& r = "", RationaleKind kind = RationaleKind::kNone) {
  PreferenceRecord rec;
  rec.prompt = p;
  rec.chosen = w;
  rec.rejected = l;
  rec.rationale = r;
  rec.rationale_kind = kind;
  return rec;
}

Dataset SyntheticSet(size_t n) {
  Dataset ds;
  for (size_t i = 0; i < n; ++i) {
    std::string tag = std::to_string(i);
    ds.push_back(Rec("p" + tag, "w" + tag, "l" + tag,
                     (i % 2 == 0) ? "PREFER:A FEATURE:quality" : "PREFER:B FEATURE:len",
                     RationaleKind::kSynthetic));
  }
  return ds;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/preflab_corpus_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

bool SameRecord(const PreferenceRecord& a, const PreferenceRecord& b) {
  return a.prompt == b.prompt && a.chosen == b.chosen && a.rejected == b.rejected &&
         a.rationale == b.rationale && a.rationale_kind == b.rationale_kind;
}

}  // namespace

TEST_SUITE_BEGIN("corpus");

TEST_CASE("empty input parses to zero records") {
  CHECK(ParseJsonl("", "mem").empty());
  CHECK(ParseJsonl("\n\n  \n", "mem").empty());
}

TEST_CASE("minimal line defaults rationale kind to none") {
  Dataset ds = ParseJsonl(R"({"prompt":"p","chosen":"a","rejected":"b"})", "mem");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].prompt == "p");
  CHECK(ds[0].chosen == "a");
  CHECK(ds[0].rejected == "b");
  CHECK(ds[0].rationale.empty());
  CHECK(ds[0].rationale_kind == RationaleKind::kNone);
}

TEST_CASE("rationale and kind pass through") {
  Dataset ds = ParseJsonl(
      R"({"prompt":"p","chosen":"a","rejected":"b","rationale":"because concise","rationale_kind":"general"})",
      "mem");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].rationale == "because concise");
  CHECK(ds[0].rationale_kind == RationaleKind::kGeneral);
}

TEST_CASE("unknown keys are ignored") {
  Dataset ds = ParseJsonl(
      R"({"prompt":"p","chosen":"a","rejected":"b","extra":42,"meta":{"x":1}})", "mem");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].prompt == "p");
}

TEST_CASE("malformed json reports parse error with line number") {
  std::string text = R"({"prompt":"p","chosen":"a","rejected":"b"})";
  text += "\n{not json\n";
  try {
    ParseJsonl(text, "mem");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("mem:2:") != std::string::npos);
  }
}

TEST_CASE("missing required key reports schema error") {
  try {
    ParseJsonl(R"({"prompt":"p","chosen":"a"})", "mem");
    FAIL("expected schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
    CHECK(std::string(e.what()).find("rejected") != std::string::npos);
  }
}

TEST_CASE("non-object line reports schema error") {
  try {
    ParseJsonl("[1,2,3]", "mem");
    FAIL("expected schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
  }
}

TEST_CASE("load save load round-trips records") {
  TempFile a("roundtrip_a.jsonl");
  TempFile b("roundtrip_b.jsonl");
  Dataset ds;
  ds.push_back(Rec("what is 2+2", "4", "5"));
  ds.push_back(Rec("p\nwith newline", "yes \"quoted\"", "no",
                   "because concise", RationaleKind::kGeneral));
  ds.push_back(Rec("p2", "w2", "l2", "PREFER:A FEATURE:len", RationaleKind::kSynthetic));
  SaveJsonl(ds, a.path);
  Dataset back = LoadJsonl(a.path);
  REQUIRE(back.size() == ds.size());
  for (size_t i = 0; i < ds.size(); ++i) CHECK(SameRecord(ds[i], back[i]));
  // Serialization itself is byte-deterministic.
  SaveJsonl(back, b.path);
  std::ifstream fa(a.path, std::ios::binary), fb(b.path, std::ios::binary);
  std::string ta((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string tb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ta == tb);
  CHECK(!ta.empty());
  CHECK(ta.back() == '\n');
}

TEST_CASE("load missing file is an io error") {
  CHECK_THROWS_AS(LoadJsonl("/tmp/preflab_no_such_file_xyz.jsonl"), Error);
}

TEST_CASE("validate accepts a clean dataset") {
  Dataset ds = SyntheticSet(4);
  CHECK(Validate(ds).empty());
}

TEST_CASE("validate flags duplicate responses") {
  Dataset ds;
  ds.push_back(Rec("p", "same", "same"));
  auto v = Validate(ds);
  REQUIRE(v.size() == 1);
  CHECK(v[0].index == 0);
  CHECK(v[0].what.find("distinct responses") != std::string::npos);
}

TEST_CASE("validate flags rationale with kind none") {
  Dataset ds;
  ds.push_back(Rec("p", "a", "b", "stray text", RationaleKind::kNone));
  auto v = Validate(ds);
  REQUIRE(v.size() == 1);
  CHECK(v[0].what.find("kind/rationale consistency") != std::string::npos);
}

TEST_CASE("validate flags kind without rationale and empty fields") {
  Dataset ds;
  ds.push_back(Rec("", "a", "b"));
  ds.push_back(Rec("p", "a", "b", "", RationaleKind::kDetailed));
  auto v = Validate(ds);
  CHECK(v.size() == 2);
  CHECK(v[0].index == 0);
  CHECK(v[1].index == 1);
}

TEST_CASE("permute on two records swaps the rationales") {
  Dataset ds = SyntheticSet(2);
  for (uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    Dataset out = PermuteRationales(ds, seed);
    REQUIRE(out.size() == 2);
    CHECK(out[0].rationale == ds[1].rationale);
    CHECK(out[1].rationale == ds[0].rationale);
    CHECK(out[0].prompt == ds[0].prompt);
    CHECK(out[0].chosen == ds[0].chosen);
    CHECK(out[0].rejected == ds[0].rejected);
  }
}

TEST_CASE("permute is deterministic per seed") {
  Dataset ds = SyntheticSet(5);
  Dataset a = PermuteRationales(ds, 7);
  Dataset b = PermuteRationales(ds, 7);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].rationale == b[i].rationale);
}

TEST_CASE("permute outputs are derangements preserving the multiset") {
  for (size_t n : {2u, 3u, 5u, 17u}) {
    Dataset ds;
    for (size_t i = 0; i < n; ++i)
      ds.push_back(Rec("p", "a", "b", "r" + std::to_string(i), RationaleKind::kGeneral));
    for (uint64_t seed = 0; seed < 20; ++seed) {
      Dataset out = PermuteRationales(ds, seed);
      std::multiset<std::string> in_set, out_set;
      for (size_t i = 0; i < n; ++i) {
        CHECK(out[i].rationale != ds[i].rationale);
        in_set.insert(ds[i].rationale);
        out_set.insert(out[i].rationale);
      }
      CHECK(in_set == out_set);
    }
  }
}

TEST_CASE("permute rejects tiny or rationale-free datasets") {
  Dataset one = SyntheticSet(1);
  try {
    PermuteRationales(one, 1);
    FAIL("expected invalid-argument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
  Dataset ds = SyntheticSet(3);
  ds[1].rationale.clear();
  ds[1].rationale_kind = RationaleKind::kNone;
  try {
    PermuteRationales(ds, 1);
    FAIL("expected precondition error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPrecondition);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("negate flips the polarity token only") {
  Dataset ds;
  ds.push_back(Rec("p", "a", "b", "PREFER:A FEATURE:len", RationaleKind::kSynthetic));
  ds.push_back(Rec("p", "a", "b", "PREFER:B FEATURE:quality", RationaleKind::kSynthetic));
  Dataset out = NegateRationales(ds);
  CHECK(out[0].rationale == "PREFER:B FEATURE:len");
  CHECK(out[1].rationale == "PREFER:A FEATURE:quality");
}

TEST_CASE("negate is an involution") {
  Dataset ds = SyntheticSet(6);
  Dataset twice = NegateRationales(NegateRationales(ds));
  REQUIRE(twice.size() == ds.size());
  for (size_t i = 0; i < ds.size(); ++i) CHECK(SameRecord(ds[i], twice[i]));
}

TEST_CASE("negate rejects non-synthetic rationales naming the index") {
  Dataset ds = SyntheticSet(3);
  ds[1].rationale_kind = RationaleKind::kGeneral;
  ds[1].rationale = "free text";
  try {
    NegateRationales(ds);
    FAIL("expected unsupported-kind error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupported);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("split produces disjoint deterministic partitions") {
  Dataset ds;
  for (int i = 0; i < 100; ++i)
    ds.push_back(Rec("p" + std::to_string(i), "w" + std::to_string(i), "l"));
  Split s = SplitDataset(ds, 90, 10, 1);
  CHECK(s.train.size() == 90);
  CHECK(s.test.size() == 10);
  std::multiset<std::string> seen;
  for (const auto& r : s.train) seen.insert(r.prompt);
  for (const auto& r : s.test) {
    CHECK(seen.count(r.prompt) == 0);
    seen.insert(r.prompt);
  }
  CHECK(seen.size() == 100);

  Split again = SplitDataset(ds, 90, 10, 1);
  for (size_t i = 0; i < 10; ++i) CHECK(SameRecord(s.test[i], again.test[i]));
}

TEST_CASE("test split is stable across train budgets") {
  Dataset ds;
  for (int i = 0; i < 100; ++i)
    ds.push_back(Rec("p" + std::to_string(i), "w", "l" + std::to_string(i)));
  Split a = SplitDataset(ds, 30, 10, 42);
  Split b = SplitDataset(ds, 60, 10, 42);
  REQUIRE(a.test.size() == 10);
  REQUIRE(b.test.size() == 10);
  for (size_t i = 0; i < 10; ++i) CHECK(SameRecord(a.test[i], b.test[i]));
}

TEST_CASE("split rejects oversubscription") {
  Dataset ds;
  for (int i = 0; i < 100; ++i) ds.push_back(Rec("p", "w" + std::to_string(i), "l"));
  try {
    SplitDataset(ds, 91, 10, 1);
    FAIL("expected invalid-argument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("rationale kind names round-trip") {
  for (RationaleKind k : {RationaleKind::kNone, RationaleKind::kGeneral,
                          RationaleKind::kDetailed, RationaleKind::kSynthetic}) {
    CHECK(RationaleKindFromName(RationaleKindName(k)) == k);
  }
  CHECK_THROWS_AS(RationaleKindFromName("bogus"), Error);
}

TEST_SUITE_END();
