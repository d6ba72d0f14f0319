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

#include "fwhook/baseline_image.hpp"
#include "fwhook/chip_sim.hpp"
#include "fwhook/error.hpp"

using namespace fwhook;

namespace {

const MctlBits kBits;
const CorpusSpec kSpecDefaults;
const MacAddr kSta = kSpecDefaults.sta_mac;
const MacAddr kBss = kSpecDefaults.joined_bssid;
const MacAddr kOther = {0x06, 1, 2, 3, 4, 5};
const MacAddr kOtherBss = {0x0A, 9, 9, 9, 9, 9};

Dot11Frame Data(const MacAddr& to, bool fcs_ok = true) {
  Dot11Frame f;
  f.subtype = Subtype::kData;
  f.addr1 = to;
  f.addr2 = kBss;
  f.addr3 = kOther;
  f.body = {0xAA, 0xAA, 0x03, 0, 0, 0, 0x08, 0x00, 0x45, 0x00};
  f.fcs_ok = fcs_ok;
  return f;
}

Dot11Frame Beacon(const MacAddr& bss) {
  Dot11Frame f;
  f.subtype = Subtype::kBeacon;
  f.addr1 = kBroadcastMac;
  f.addr2 = f.addr3 = bss;
  f.body = {0, 0, 0, 0, 0, 0, 0, 0, 0x64, 0, 1, 0};
  return f;
}

// Combination index k: bit0 promisc, bit1 keepcontrol, bit2 bcns_promisc,
// bit3 keepbadfcs.
std::uint32_t Combo(int k) {
  std::uint32_t m = 0;
  if (k & 1) m |= kBits.promisc;
  if (k & 2) m |= kBits.keepcontrol;
  if (k & 4) m |= kBits.bcns_promisc;
  if (k & 8) m |= kBits.keepbadfcs;
  return m;
}

struct Booted {
  SymbolMap syms = BuiltinSymbolMap();
  PatchManifest manifest;
  std::unique_ptr<Simulator> sim;
};

Booted Boot(const char* patchset, SimConfig cfg = {}) {
  Booted b;
  auto image = BuildBaselineImage(b.syms);
  const PatchManifest* m = nullptr;
  if (std::string(patchset) == "monitor") {
    b.manifest = Apply(Plan(MakeMonitorPatchset(b.syms, cfg.mctl), image, b.syms, {}), image);
    m = &b.manifest;
  } else if (std::string(patchset) == "helloworld") {
    b.manifest = Apply(Plan(MakeHelloWorldPatchset(b.syms), image, b.syms, {}), image);
    m = &b.manifest;
  }
  b.sim = std::make_unique<Simulator>(std::move(image), b.syms, m, cfg);
  return b;
}

}  // namespace

TEST_CASE("d11_accept matches the truth-table oracle") {
  // Masks from tests/oracle/filter_oracle.py: bit k set = accepted under Combo(k).
  struct Row {
    const char* name;
    Dot11Frame frame;
    std::uint16_t good_mask;
  };
  Dot11Frame probe = Beacon(kOtherBss);
  probe.subtype = Subtype::kProbeResponse;
  probe.addr1 = kSta;
  Dot11Frame ctl;
  ctl.subtype = Subtype::kRts;
  ctl.addr1 = kOther;
  ctl.addr2 = kSta;
  Dot11Frame mcast = Data({0x01, 0x00, 0x5E, 0, 0, 1});
  mcast.addr2 = kOtherBss;
  Dot11Frame foreign = Data(kOther);
  foreign.addr2 = kOtherBss;
  const Row rows[] = {
      {"own_data", Data(kSta), 0xFFFF},
      {"foreign_data", foreign, 0xAAAA},
      {"broadcast_data", Data(kBroadcastMac), 0xFFFF},
      {"multicast_data", mcast, 0xFFFF},
      {"own_beacon", Beacon(kBss), 0xFFFF},
      {"foreign_beacon", Beacon(kOtherBss), 0xF0F0},
      {"foreign_probe_response", probe, 0xF0F0},
      {"control", ctl, 0xCCCC},
  };
  const std::uint16_t kBadFcsMask = 0xFF00;

  int cases = 0, mismatches = 0;
  for (const auto& row : rows) {
    for (bool fcs_ok : {true, false}) {
      Dot11Frame f = row.frame;
      f.fcs_ok = fcs_ok;
      const std::uint16_t want = fcs_ok ? row.good_mask : kBadFcsMask;
      for (int k = 0; k < 16; ++k) {
        // Unrelated maccontrol bits must not matter.
        const std::uint32_t mc = Combo(k) | kBaselineMctlWord;
        const bool expect = (want >> k) & 1;
        const bool got = D11Accept(f, mc, kSta, kBss);
        ++cases;
        if (got != expect) {
          ++mismatches;
          MESSAGE(row.name, fcs_ok ? "" : " (bad FCS)", " combo ", k);
        }
      }
    }
  }
  CHECK(cases == 256);
  CHECK(mismatches == 0);
}

TEST_CASE("boot reads the coreinit words from the image") {
  auto stock = Boot("none");
  CHECK(stock.sim->mode() == SimMode::kStock);
  CHECK(stock.sim->maccontrol() == kBaselineMctlWord);
  CHECK((stock.sim->maccontrol() & kBits.combined()) == 0);

  auto mon = Boot("monitor");
  CHECK(mon.sim->mode() == SimMode::kPatched);
  CHECK((mon.sim->maccontrol() & kBits.combined()) == kBits.combined());
  REQUIRE(mon.sim->mctl_history().size() == 1);
  CHECK(mon.sim->mctl_history()[0].source == "wlc_bmac_mctrl");

  auto hello = Boot("helloworld");
  CHECK(hello.sim->mode() == SimMode::kStock);
}

TEST_CASE("boot rejects a manifest that does not match the image") {
  auto syms = BuiltinSymbolMap();
  auto image = BuildBaselineImage(syms);
  auto plan = Plan(MakeMonitorPatchset(syms, kBits), image, syms, {});
  // Plan only, never applied.
  CHECK_THROWS_AS(Simulator(image, syms, &plan), Error);
  auto manifest = Apply(plan, image);
  manifest.entries[0].new_bytes[0] ^= 1;
  CHECK_THROWS_AS(Simulator(image, syms, &manifest), Error);
}

TEST_CASE("wlc_bmac_mctrl semantics") {
  auto b = Boot("none");
  Simulator& sim = *b.sim;
  const std::uint32_t before = sim.maccontrol();
  sim.Mctrl(0, 0xFFFFFFFF);
  CHECK(sim.maccontrol() == before);
  const std::uint32_t m = kBits.combined();
  sim.Mctrl(m, m);
  CHECK((sim.maccontrol() & m) == m);
  CHECK((sim.maccontrol() & ~m) == before);
  sim.Mctrl(m, 0);
  CHECK(sim.maccontrol() == before);
}

TEST_CASE("inject_air_frame and the ring") {
  SimConfig cfg;
  cfg.ring_capacity = 2;
  auto b = Boot("none", cfg);
  Simulator& sim = *b.sim;
  CHECK_FALSE(sim.interrupt_pending());
  CHECK_FALSE(sim.InjectAirFrame(Data(kOther)));  // foreign, filtered
  CHECK(sim.ring().queue.empty());
  CHECK_FALSE(sim.interrupt_pending());
  CHECK(sim.InjectAirFrame(Data(kSta)));
  CHECK(sim.interrupt_pending());
  CHECK(sim.ring().queue.size() == 1);
  CHECK(sim.ring().posted == 1);
  CHECK(sim.InjectAirFrame(Data(kSta)));
  CHECK_FALSE(sim.InjectAirFrame(Data(kSta)));  // no posted buffers
  const auto& c = sim.counters();
  CHECK(c.dropped_by_overflow == 1);
  CHECK(c.dropped_by_filter == 1);
  CHECK(c.frames_offered == c.frames_accepted + c.dropped_by_filter + c.dropped_by_overflow);
  CHECK(sim.ring().queue.size() + sim.ring().posted <= sim.ring().capacity);
}

TEST_CASE("dma_rx and dma_rxfill") {
  SimConfig cfg;
  cfg.ring_capacity = 8;
  auto b = Boot("none", cfg);
  Simulator& sim = *b.sim;
  CHECK(sim.DmaRx(0) == 0);
  sim.InjectAirFrame(Data(kSta));
  auto p = sim.DmaRx(0);
  REQUIRE(p != 0);
  REQUIRE(sim.Packet(p) != nullptr);
  CHECK(sim.Packet(p)->fcs_ok);
  CHECK(sim.DmaRx(0) == 0);
  CHECK(sim.counters().dma_rx_calls == 3);

  for (int i = 0; i < 3; ++i) sim.InjectAirFrame(Data(kSta));
  for (int i = 0; i < 3; ++i) CHECK(sim.DmaRx(0) != 0);
  CHECK(sim.ring().posted == 4);
  sim.DmaRxfill(0);
  CHECK(sim.ring().posted == 8);
  CHECK(sim.counters().rxfill_calls == 1);
}

TEST_CASE("dngl_sendpkt frames payloads and checks headroom") {
  auto b = Boot("none");
  Simulator& sim = *b.sim;
  auto p = sim.AllocPacket({{1, 2, 3}, 8, 0, 6, true});
  sim.SendPkt(p, 0xF);
  REQUIRE(sim.host_queue().size() == 1);
  auto f = DecodeSdio(sim.host_queue()[0]);
  CHECK(f.channel == 0xF);
  CHECK(f.payload == Bytes{1, 2, 3});

  auto tight = sim.AllocPacket({{1}, 0, 0, 6, true});
  CHECK_THROWS_WITH_AS(sim.SendPkt(tight, 0xF), doctest::Contains("headroom"), Error);
  CHECK_THROWS_AS(sim.SendPkt(0x1234, 0xF), Error);
}

TEST_CASE("stock receive path") {
  auto b = Boot("none");
  Simulator& sim = *b.sim;
  SUBCASE("two own data frames become Ethernet on the data channel") {
    sim.InjectAirFrame(Data(kSta));
    sim.InjectAirFrame(Data(kBroadcastMac));
    CHECK(sim.DispatchInterrupt() == 0);
    REQUIRE(sim.host_queue().size() == 2);
    for (const auto& wire : sim.host_queue()) {
      auto f = DecodeSdio(wire);
      CHECK(f.channel == 0x2);
      CHECK(f.payload.size() == 14 + 2);
    }
    CHECK(DecodeSdio(sim.host_queue()[0]).payload == Dot11ToEthernet(Data(kSta)));
  }
  SUBCASE("a beacon is consumed") {
    sim.InjectAirFrame(Beacon(kBss));
    sim.DispatchInterrupt();
    CHECK(sim.host_queue().empty());
    CHECK(sim.counters().mgmt_consumed == 1);
  }
  SUBCASE("empty ring: nothing delivered, one rxfill") {
    sim.DispatchInterrupt();
    CHECK(sim.host_queue().empty());
    CHECK(sim.counters().rxfill_calls == 1);
    CHECK(sim.counters().dma_rx_calls == 1);
  }
  SUBCASE("rxbnd frames means more work") {
    for (int i = 0; i < 9; ++i) sim.InjectAirFrame(Data(kSta));
    CHECK(sim.DispatchInterrupt() == 1);
    CHECK(sim.host_queue().size() == 8);
    CHECK(sim.DispatchInterrupt() == 0);
    CHECK(sim.host_queue().size() == 9);
  }
}

TEST_CASE("dispatch log follows the handler chain") {
  auto b = Boot("none");
  b.sim->DispatchInterrupt();
  const Address expected[] = {0x180FEE, 0x181032, 0x181100, 0x181E48, 0x181A88, 0x180E5C};
  const auto& log = b.sim->dispatch_log();
  REQUIRE(log.size() >= std::size(expected));
  for (std::size_t i = 0; i < std::size(expected); ++i) {
    CHECK(log[i].address == expected[i]);
    CHECK(log[i].dispatch == 1);
  }
  CHECK(log.back().name == "wlc_bmac_recv");
}

TEST_CASE("monitor handler trace with a three-frame ring") {
  auto b = Boot("monitor");
  Simulator& sim = *b.sim;
  const Address cell = b.syms.Require("dpc_rx_count");
  for (int i = 0; i < 3; ++i) REQUIRE(sim.InjectAirFrame(Data(kOther)));
  const auto before = sim.counters();
  const std::uint32_t cell_before = sim.image().ReadWord(cell);

  CHECK(sim.DispatchInterrupt() == 1);
  CHECK(sim.last_dispatch_pcs().front() == 0x1AAD98);
  const auto& c = sim.counters();
  CHECK(c.dma_rx_calls - before.dma_rx_calls == 8);
  CHECK(c.sendpkt_calls - before.sendpkt_calls == 3);
  CHECK(c.rxfill_calls - before.rxfill_calls == 1);
  CHECK(sim.image().ReadWord(cell) - cell_before == 8);
  for (const auto& wire : sim.host_queue()) {
    auto f = DecodeSdio(wire);
    CHECK(f.channel == kMonitorChannel);
    CHECK(ParseMonitorRecord(f.payload) == Data(kOther));
  }

  SUBCASE("empty ring still loops rxbnd times") {
    CHECK(sim.DispatchInterrupt() == 1);
    CHECK(sim.counters().dma_rx_calls - before.dma_rx_calls == 16);
    CHECK(sim.counters().sendpkt_calls - before.sendpkt_calls == 3);
  }
}

TEST_CASE("corrected loop exits early and reports no more work") {
  SimConfig cfg;
  cfg.corrected_loop = true;
  auto b = Boot("monitor", cfg);
  for (int i = 0; i < 3; ++i) b.sim->InjectAirFrame(Data(kSta));
  CHECK(b.sim->DispatchInterrupt() == 0);
  CHECK(b.sim->counters().dma_rx_calls == 4);
  CHECK(b.sim->image().ReadWord(b.syms.Require("dpc_rx_count")) == 3);
}

TEST_CASE("monitor handler re-asserts maccontrol") {
  auto b = Boot("monitor");
  Simulator& sim = *b.sim;
  sim.Mctrl(kBits.combined(), 0, "harness");
  CHECK((sim.maccontrol() & kBits.combined()) == 0);
  sim.DispatchInterrupt();
  CHECK((sim.maccontrol() & kBits.combined()) == kBits.combined());
  CHECK(sim.mctl_history().back().source == "monitor_recv");

  SimConfig off;
  off.reassert_mctl = false;
  auto c = Boot("monitor", off);
  c.sim->Mctrl(kBits.combined(), 0, "harness");
  c.sim->DispatchInterrupt();
  CHECK((c.sim->maccontrol() & kBits.combined()) == 0);
}

TEST_CASE("hello-world patch prints on every dma_rx through the veneer") {
  auto b = Boot("helloworld");
  Simulator& sim = *b.sim;
  sim.InjectAirFrame(Data(kSta));
  sim.DispatchInterrupt();
  CHECK(sim.host_queue().size() == 1);
  // One frame plus the empty poll that ends the loop.
  CHECK(sim.ConsoleDump() == "hello world\nhello world\n");
  CHECK(sim.counters().dma_rx_calls == 2);
}

TEST_CASE("console ring keeps only the newest 16 KiB") {
  ConsoleRing ring;
  for (int i = 0; i < 2000; ++i) ring.Write("0123456789\n");
  CHECK(ring.Dump().size() == 16 * 1024);
  CHECK(ring.bytes_written() == 22000);
  CHECK(ring.Dump().substr(ring.Dump().size() - 11) == "0123456789\n");
  ConsoleRing small(4);
  small.Write("abcdefg");
  CHECK(small.Dump() == "defg");
}

TEST_CASE("config validation") {
  SimConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  cfg.rxbnd = 0;
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg = {};
  cfg.stock_data_channel = 0xF;
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg = {};
  cfg.mctl.promisc = cfg.mctl.keepcontrol;
  CHECK_THROWS_AS(cfg.Validate(), Error);
}

TEST_CASE("monitor completeness and conservation over a mixed corpus") {
  CorpusSpec spec;
  spec.seed = 3;
  for (auto& n : spec.counts) n = 6;
  auto frames = GenCorpus(spec);
  auto b = Boot("monitor");
  Simulator& sim = *b.sim;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(sim.InjectAirFrame(frames[i]));
    if (i % 4 == 3) sim.DispatchInterrupt();
  }
  sim.DispatchInterrupt();
  auto delivered = HostDeliver(sim.host_queue());
  CHECK(delivered.malformed.empty());
  CHECK(delivered.ethernet.empty());
  REQUIRE(delivered.monitor.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(ParseMonitorRecord(delivered.monitor[i]) == frames[i]);
  }
  const auto& c = sim.counters();
  CHECK(c.frames_offered == c.frames_accepted + c.dropped_by_filter + c.dropped_by_overflow);
}

TEST_CASE("determinism: identical inputs give identical host streams") {
  CorpusSpec spec;
  spec.seed = 11;
  for (auto& n : spec.counts) n = 5;
  auto run = [&](const char* ps) {
    auto b = Boot(ps);
    for (const auto& f : GenCorpus(spec)) {
      b.sim->InjectAirFrame(f);
      if (b.sim->ring().queue.size() == 4) b.sim->DispatchInterrupt();
    }
    b.sim->DispatchInterrupt();
    return std::make_pair(b.sim->host_queue(), b.sim->ReportJson());
  };
  CHECK(run("monitor") == run("monitor"));
  CHECK(run("none") == run("none"));
}

TEST_CASE("report JSON carries counters, trace and maccontrol history") {
  auto b = Boot("monitor");
  b.sim->DispatchInterrupt();
  auto report = b.sim->ReportJson();
  CHECK(report.find("\"mode\": \"patched\"") != std::string::npos);
  CHECK(report.find("\"dma_rx_calls\": 8") != std::string::npos);
  CHECK(report.find("\"0x00180FEE\"") != std::string::npos);
  CHECK(report.find("maccontrol_history") != std::string::npos);
}
