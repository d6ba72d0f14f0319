/*
 * Copyright (C) 2026 The fwhook Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <random>

#include "fwhook/baseline_image.hpp"
#include "fwhook/error.hpp"
#include "fwhook/patcher.hpp"
#include "fwhook/symbol_map.hpp"
#include "fwhook/thumb.hpp"
#include "test_util.hpp"

using namespace fwhook;
using fwhook::testing::FromHex;

namespace {

HookProgram SmallProgram() {
  return HookProgram{{SaveScratch{},
                      Call{std::string("dma_rx"), {ForwardedParam{0}}},
                      ReturnLastResult{}}};
}

Bytes Read(const FirmwareImage& image, Address a, std::uint32_t n) {
  return image.ReadBytes(a, n);
}

}  // namespace

TEST_CASE("stubs are bump-allocated at 4-aligned offsets") {
  const auto syms = BuiltinSymbolMap();
  const auto image = BuildBaselineImage(syms);
  std::vector<PatchAction> actions = {
      InstallStub{"a", HelloWorldProgram(), std::nullopt},
      InstallStub{"b", SmallProgram(), std::nullopt},
  };
  auto plan = Plan(actions, image, syms, PatchConfig{});
  REQUIRE(plan.entries.size() == 2);
  CHECK(plan.entries[0].address == 0x180000);
  CHECK(plan.entries[0].new_bytes.size() == 0x24);
  CHECK(plan.entries[1].address == 0x180024);
  CHECK(plan.entries[1].address % 4 == 0);
}

TEST_CASE("placement window exhaustion is a plan error") {
  const auto syms = BuiltinSymbolMap();
  const auto image = BuildBaselineImage(syms);
  std::vector<PatchAction> actions = {
      InstallStub{"a", HelloWorldProgram(), std::nullopt},
      InstallStub{"b", HelloWorldProgram(), std::nullopt},
  };
  PatchConfig cfg;
  cfg.placement_limit = 0x180030;
  try {
    Plan(actions, image, syms, cfg);
    FAIL("expected plan error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPlan);
    CHECK(std::string(e.what()).find("exhausted") != std::string::npos);
  }
}

TEST_CASE("redirect to a site that is not a BL is rejected") {
  const auto syms = BuiltinSymbolMap();
  const auto image = BuildBaselineImage(syms);
  const Address veneer = syms.Require("wlc_bmac_recv_rx_veneer");
  std::vector<PatchAction> actions = {
      InstallStub{"hook", HelloWorldProgram(), std::nullopt},
      RedirectBranch{veneer, StubRef{"hook"}, BranchKind::kBl},  // PUSH, not BL
  };
  CHECK_THROWS_AS(Plan(actions, image, syms, PatchConfig{}), Error);
}

TEST_CASE("unresolved symbols and unknown stub labels fail planning") {
  const auto syms = BuiltinSymbolMap();
  const auto image = BuildBaselineImage(syms);
  CHECK_THROWS_WITH_AS(
      Plan({ReplaceFunction{"no_such_fn", AddressRef{0x180000}}}, image, syms, {}),
      doctest::Contains("no_such_fn"), Error);
  CHECK_THROWS_WITH_AS(
      Plan({ReplaceFunction{"wlc_bmac_recv", StubRef{"ghost"}}}, image, syms, {}),
      doctest::Contains("ghost"), Error);
}

TEST_CASE("overlapping edits are rejected") {
  const auto syms = BuiltinSymbolMap();
  const auto image = BuildBaselineImage(syms);
  std::vector<PatchAction> actions = {
      InstallStub{"a", HelloWorldProgram(), Address{0x180100}},
      InstallStub{"b", SmallProgram(), Address{0x180110}},
  };
  CHECK_THROWS_WITH_AS(Plan(actions, image, syms, {}), doctest::Contains("overlap"),
                       Error);
}

TEST_CASE("edits into ROM are rejected at plan time") {
  const auto syms = BuiltinSymbolMap();
  const auto image = BuildBaselineImage(syms);
  CHECK_THROWS_AS(Plan({OrWord{Address{0x1000}, 1}}, image, syms, {}), Error);
}

TEST_CASE("hello-world patch set: apply, read back, verify, rollback") {
  const auto syms = BuiltinSymbolMap();
  const auto baseline = BuildBaselineImage(syms);
  auto image = baseline;
  auto plan = Plan(MakeHelloWorldPatchset(syms), image, syms, {}, "helloworld");
  auto manifest = Apply(plan, image);

  CHECK(Read(image, 0x180000, 2) == FromHex("10b5"));
  CHECK(Read(image, 0x180014, 4) == FromHex("18001800"));
  const Address site = syms.Require("wlc_bmac_recv_rx_veneer") + 2;
  CHECK(thumb::DecodeBl(Read(image, site, 4), site) == 0x180000);

  auto report = Verify(image, manifest, syms);
  CHECK(report.ok());
  for (const auto& e : report.entries) CHECK(e.status == CheckStatus::kPass);

  CHECK_THROWS_AS(Apply(plan, image), Error);  // old bytes are gone

  Rollback(manifest, image);
  CHECK(image == baseline);
  CHECK_THROWS_AS(Rollback(manifest, image), Error);
}

TEST_CASE("verify reports a corrupted stub byte") {
  const auto syms = BuiltinSymbolMap();
  auto image = BuildBaselineImage(syms);
  auto manifest = Apply(Plan(MakeHelloWorldPatchset(syms), image, syms, {}), image);
  image.WriteBytes(0x180019, Bytes{'E'});
  auto report = Verify(image, manifest, syms);
  CHECK_FALSE(report.ok());
  CHECK(report.entries[0].status == CheckStatus::kFail);
  CHECK(report.entries[0].detail.find("0x00180019") != std::string::npos);
  CHECK(report.ToText().find("FAILED") != std::string::npos);
}

TEST_CASE("verify catches a redirect that points elsewhere") {
  const auto syms = BuiltinSymbolMap();
  auto image = BuildBaselineImage(syms);
  auto manifest = Apply(Plan(MakeHelloWorldPatchset(syms), image, syms, {}), image);
  const Address site = manifest.entries[1].address;
  auto other = thumb::EncodeBl(site, 0x180004);
  image.WriteBytes(site, Bytes(other.begin(), other.end()));
  auto report = Verify(image, manifest, syms);
  CHECK_FALSE(report.ok());
  CHECK(report.entries[1].detail.find("0x00180004") != std::string::npos);
}

TEST_CASE("monitor patch set targets the coreinit words and wlc_bmac_recv") {
  const auto syms = BuiltinSymbolMap();
  auto image = BuildBaselineImage(syms);
  MctlBits mctl;
  auto plan = Plan(MakeMonitorPatchset(syms, mctl), image, syms, {}, "monitor");
  plan.mctl = mctl;
  REQUIRE(plan.entries.size() == 4);
  CHECK(plan.entries[1].kind == ActionKind::kReplaceFunction);
  CHECK(plan.entries[1].address == 0x1AAD98);
  CHECK(plan.entries[1].branch_target == plan.entries[0].address);
  CHECK(plan.entries[2].address == 0x1AB82C);
  CHECK(plan.entries[3].address == 0x1AB828);
  REQUIRE(plan.traps.size() == 1);
  CHECK(plan.traps[0].handler == "monitor_recv");
  CHECK(plan.traps[0].address % 4 == 0);
  CHECK(plan.traps[0].address < plan.entries[0].end());

  auto manifest = Apply(plan, image);
  CHECK(image.ReadWord(0x1AB82C) == (kBaselineMctlWord | mctl.combined()));
  CHECK(image.ReadWord(0x1AB828) == (kBaselineMctlWord | mctl.combined()));
  CHECK(thumb::DecodeBw(image.ReadBytes(0x1AAD98, 4), 0x1AAD98) == 0x180000);
  CHECK(Verify(image, manifest, syms).ok());
}

TEST_CASE("zero maccontrol mask gives degenerate or_word checks") {
  const auto syms = BuiltinSymbolMap();
  auto image = BuildBaselineImage(syms);
  MctlBits zero{0, 0, 0, 0};
  CHECK_NOTHROW(zero.Validate());
  auto manifest = Apply(Plan(MakeMonitorPatchset(syms, zero), image, syms, {}), image);
  CHECK(image.ReadWord(0x1AB82C) == kBaselineMctlWord);
  auto report = Verify(image, manifest, syms);
  CHECK(report.ok());
  CHECK(report.entries[2].status == CheckStatus::kDegenerate);
  CHECK(report.entries[3].status == CheckStatus::kDegenerate);
}

TEST_CASE("MctlBits validation") {
  MctlBits m;
  CHECK(m.combined() == 0x01D00000);
  CHECK_NOTHROW(m.Validate());
  m.keepbadfcs = m.promisc;
  CHECK_THROWS_AS(m.Validate(), Error);
  m.keepbadfcs = 3;
  CHECK_THROWS_AS(m.Validate(), Error);
}

TEST_CASE("manifest round-trips through JSON") {
  const auto syms = BuiltinSymbolMap();
  auto image = BuildBaselineImage(syms);
  auto plan = Plan(MakeMonitorPatchset(syms, MctlBits{}), image, syms, {}, "monitor");
  plan.mctl = MctlBits{};
  auto text = SerializeManifest(plan);
  CHECK(ParseManifest(text) == plan);
  CHECK(text.find("\"patchset\": \"monitor\"") != std::string::npos);
  CHECK_THROWS_AS(ParseManifest("{}"), Error);
  CHECK_THROWS_AS(ParseManifest("not json"), Error);
}

TEST_CASE("manifest lists exactly the ranges that differ from the baseline") {
  const auto syms = BuiltinSymbolMap();
  const auto baseline = BuildBaselineImage(syms);
  auto image = baseline;
  auto manifest = Apply(Plan(MakeMonitorPatchset(syms, MctlBits{}), image, syms, {}), image);
  for (const auto& region : image.regions()) {
    const auto& before = baseline.FindRegion(region.name)->bytes;
    for (std::size_t i = 0; i < region.bytes.size(); ++i) {
      if (region.bytes[i] == before[i]) continue;
      const Address a = region.base + static_cast<Address>(i);
      bool covered = false;
      for (const auto& e : manifest.entries) {
        covered |= a >= e.address && a < e.end();
      }
      CHECK_MESSAGE(covered, "unlisted change at ", Hex32(a));
    }
  }
}

TEST_CASE("property: apply then rollback restores the image for random action sets") {
  const auto syms = BuiltinSymbolMap();
  const auto baseline = BuildBaselineImage(syms);
  std::mt19937_64 rng(0x5eed);
  int planned = 0;
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<PatchAction> actions;
    const int stubs = 1 + static_cast<int>(rng() % 3);
    for (int s = 0; s < stubs; ++s) {
      const std::string label = "s" + std::to_string(s);
      if (rng() % 2) {
        actions.push_back(InstallStub{label, HelloWorldProgram(), std::nullopt});
      } else {
        actions.push_back(InstallStub{label, NativeTrap{"t" + std::to_string(s)},
                                      std::nullopt});
      }
    }
    if (rng() % 2) {
      actions.push_back(ReplaceFunction{"wlc_bmac_recv", StubRef{"s0"}});
    }
    if (rng() % 2) {
      actions.push_back(RedirectBranch{syms.Require("wlc_bmac_recv_rx_veneer") + 2,
                                       StubRef{"s" + std::to_string(stubs - 1)},
                                       BranchKind::kBl});
    }
    actions.push_back(OrWord{std::string("coreinit_mctrl_mask_word"),
                             static_cast<std::uint32_t>(rng())});
    auto image = baseline;
    auto plan = Plan(actions, image, syms, {});
    auto manifest = Apply(plan, image);
    CHECK(Verify(image, manifest, syms).ok());
    Rollback(manifest, image);
    CHECK(image == baseline);
    ++planned;
  }
  CHECK(planned >= 100);
}
