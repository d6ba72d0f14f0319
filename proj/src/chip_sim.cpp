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

#include "fwhook/chip_sim.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "fwhook/error.hpp"

namespace fwhook {

namespace {

constexpr std::uint32_t kPacketHandleBase = 0x9B000000;
constexpr std::size_t kMaxFormatLength = 256;

[[noreturn]] void SimError(const std::string& what) {
  throw Error(ErrorCode::kSim, what);
}

}  // namespace

bool D11Accept(const Dot11Frame& frame, std::uint32_t maccontrol,
               const MacAddr& sta_mac, const MacAddr& joined_bssid,
               const MctlBits& bits) {
  auto has = [&](std::uint32_t bit) { return (maccontrol & bit) == bit; };
  if (!frame.fcs_ok) return has(bits.keepbadfcs);
  if (frame.type() == FrameType::kControl) return has(bits.keepcontrol);
  if ((frame.subtype == Subtype::kBeacon || frame.subtype == Subtype::kProbeResponse) &&
      frame.bssid() != joined_bssid) {
    return has(bits.bcns_promisc);
  }
  if (!IsGroupAddress(frame.addr1) && frame.addr1 != sta_mac) return has(bits.promisc);
  return true;
}

void PacketBuffer::Prepend(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > headroom) {
    SimError("packet headroom " + std::to_string(headroom) + " cannot hold " +
             std::to_string(bytes.size()) + " bytes");
  }
  data.insert(data.begin(), bytes.begin(), bytes.end());
  headroom -= bytes.size();
}

void ConsoleRing::Write(std::string_view text) {
  written_ += text.size();
  if (text.size() >= capacity_) {
    text_.assign(text.substr(text.size() - capacity_));
    return;
  }
  text_.append(text);
  if (text_.size() > capacity_) text_.erase(0, text_.size() - capacity_);
}

void SimConfig::Validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "config: " + what);
  };
  if (rxbnd == 0) bad("rxbnd must be positive");
  if (ring_capacity == 0) bad("ring_capacity must be positive");
  if (stock_data_channel > 0xF || stock_data_channel == kMonitorChannel) {
    bad("stock_data_channel must be 0-14");
  }
  if (fuel == 0) bad("fuel must be positive");
  mctl.Validate();
}

const char* SimModeName(SimMode mode) {
  return mode == SimMode::kStock ? "stock" : "patched";
}

class Simulator::Env : public TrapEnv {
 public:
  explicit Env(Simulator& sim) : sim_(sim) {}

  std::uint32_t OnTrap(std::string_view tag, const TrapArgs& a,
                       FirmwareImage& image) override {
    if (tag == "printf") return Printf(a, image);
    if (tag == "dma_rx") return sim_.DmaRx(sim_.FifoFromDi(a[0]));
    if (tag == "dma_rxfill") {
      sim_.DmaRxfill(sim_.FifoFromDi(a[0]));
      return 0;
    }
    if (tag == "dngl_sendpkt") {
      if (a[0] != kSdioInfoHandle) SimError("dngl_sendpkt: bad SDIO_INFO handle");
      sim_.SendPkt(a[1], static_cast<std::uint8_t>(a[2]));
      return 0;
    }
    if (tag == "wlc_bmac_mctrl") {
      sim_.Mctrl(a[1], a[2], "wlc_bmac_mctrl");
      return 0;
    }
    if (tag == "monitor_recv") return sim_.MonitorRecv(a);
    SimError("no native handler for trap '" + std::string(tag) + "'");
  }

 private:
  std::string ReadCString(const FirmwareImage& image, Address at) {
    std::string s;
    for (;;) {
      if (!image.IsMapped(at, 1)) SimError("printf: string at " + Hex32(at) + " is unmapped");
      char c = static_cast<char>(image.ReadBytes(at++, 1)[0]);
      if (c == '\0') return s;
      if (s.size() == kMaxFormatLength) return s;
      s += c;
    }
  }

  std::uint32_t Printf(const TrapArgs& a, FirmwareImage& image) {
    const std::string fmt = ReadCString(image, a[0]);
    std::string out;
    std::size_t next = 1;
    for (std::size_t i = 0; i < fmt.size(); ++i) {
      if (fmt[i] != '%' || i + 1 == fmt.size()) {
        out += fmt[i];
        continue;
      }
      const char spec = fmt[++i];
      if (spec == '%') {
        out += '%';
        continue;
      }
      const std::uint32_t v = next < a.size() ? a[next++] : 0;
      char buf[16];
      switch (spec) {
        case 'd': std::snprintf(buf, sizeof(buf), "%d", static_cast<std::int32_t>(v)); break;
        case 'u': std::snprintf(buf, sizeof(buf), "%u", v); break;
        case 'x': std::snprintf(buf, sizeof(buf), "%x", v); break;
        case 'p': std::snprintf(buf, sizeof(buf), "0x%08x", v); break;
        case 's': out += ReadCString(image, v); continue;
        default: buf[0] = '%', buf[1] = spec, buf[2] = '\0';
      }
      out += buf;
    }
    if (out.empty() || out.back() != '\n') out += '\n';
    sim_.console_.Write(out);
    return static_cast<std::uint32_t>(out.size());
  }

  Simulator& sim_;
};

Simulator::Simulator(FirmwareImage image, SymbolMap syms, const PatchManifest* manifest,
                     SimConfig config)
    : image_(std::move(image)),
      syms_(std::move(syms)),
      config_(config),
      env_(std::make_unique<Env>(*this)) {
  if (manifest != nullptr && manifest->mctl) config_.mctl = *manifest->mctl;
  config_.Validate();
  if (!image_.FindRegion("ram")) SimError("boot: image has no RAM region");
  ring_.capacity = config_.ring_capacity;
  ring_.posted = config_.ring_capacity;

  for (const char* name :
       {"printf", "dma_rx", "dma_rxfill", "dngl_sendpkt", "wlc_bmac_mctrl"}) {
    traps_.Register(syms_.Require(name), name);
  }
  if (manifest != nullptr) {
    auto report = Verify(image_, *manifest, syms_);
    if (!report.ok()) {
      throw Error(ErrorCode::kVerify,
                  "boot: manifest does not match the image\n" + report.ToText());
    }
    for (const auto& t : manifest->traps) {
      if (t.handler != "monitor_recv") {
        SimError("boot: manifest registers unknown trap handler '" + t.handler + "'");
      }
      traps_.Register(t.address, t.handler);
      mode_ = SimMode::kPatched;
    }
  }
  RunFirmware(syms_.Require("wlc_coreinit"), std::array{kWlcHwHandle});
}

Simulator::~Simulator() = default;

std::uint32_t Simulator::RunFirmware(Address entry, std::span<const std::uint32_t> args) {
  InterpConfig ic;
  ic.fuel = config_.fuel;
  Interpreter cpu(image_, traps_, *env_, ic);
  cpu.set_trace([this](const StepRecord& s) { last_pcs_.push_back(s.address); });
  std::uint32_t r = cpu.CallStub(entry, args);
  counters_.instructions += cpu.instructions_executed();
  counters_.traps += cpu.traps_taken();
  return r;
}

std::uint32_t Simulator::FifoFromDi(std::uint32_t di) const {
  if (di < kDiHandleBase || di >= kDiHandleBase + kFifoCount) {
    SimError("bad DMA handle " + Hex32(di));
  }
  return di - kDiHandleBase;
}

void Simulator::Mctrl(std::uint32_t mask, std::uint32_t value, std::string_view source) {
  maccontrol_ = (maccontrol_ & ~mask) | (value & mask);
  ++counters_.mctrl_calls;
  mctl_history_.push_back(
      {counters_.dispatches, std::string(source), mask, value, maccontrol_});
}

bool Simulator::InjectAirFrame(const Dot11Frame& frame) {
  ++counters_.frames_offered;
  if (!D11Accept(frame, maccontrol_, config_.sta_mac, config_.joined_bssid, config_.mctl)) {
    ++counters_.dropped_by_filter;
    return false;
  }
  if (ring_.posted == 0) {
    ++counters_.dropped_by_overflow;
    return false;
  }
  ring_.queue.push_back(frame);
  --ring_.posted;
  ++counters_.frames_accepted;
  interrupt_pending_ = true;
  return true;
}

std::uint32_t Simulator::DispatchInterrupt() {
  ++counters_.dispatches;
  interrupt_pending_ = false;
  last_pcs_.clear();
  for (const auto& name : ReceiveDispatchChain()) {
    dispatch_log_.push_back({counters_.dispatches, syms_.Require(name), name});
  }
  std::uint32_t result;
  if (mode_ == SimMode::kStock) {
    result = StockRecv(config_.rxbnd) ? 1 : 0;
  } else {
    const std::array<std::uint32_t, 4> args = {kWlcHwHandle, 0, config_.rxbnd,
                                               syms_.Require("dpc_rx_count")};
    result = RunFirmware(syms_.Require("wlc_bmac_recv"), args);
  }
  last_return_ = result;
  return result;
}

std::uint32_t Simulator::AllocPacket(PacketBuffer buffer) {
  const std::uint32_t h = kPacketHandleBase + next_packet_++;
  packets_.emplace(h, std::move(buffer));
  return h;
}

const PacketBuffer* Simulator::Packet(std::uint32_t handle) const {
  auto it = packets_.find(handle);
  return it == packets_.end() ? nullptr : &it->second;
}

PacketBuffer Simulator::TakePacket(std::uint32_t handle) {
  auto it = packets_.find(handle);
  if (it == packets_.end()) SimError("unknown packet handle " + Hex32(handle));
  PacketBuffer p = std::move(it->second);
  packets_.erase(it);
  return p;
}

std::uint32_t Simulator::DmaRx(std::uint32_t fifo) {
  ++counters_.dma_rx_calls;
  if (fifo != 0 || ring_.queue.empty()) return 0;
  Dot11Frame f = std::move(ring_.queue.front());
  ring_.queue.pop_front();
  return AllocPacket({SerializeDot11(f), config_.headroom, fifo, f.channel, f.fcs_ok});
}

void Simulator::DmaRxfill(std::uint32_t /*fifo*/) {
  ++counters_.rxfill_calls;
  ring_.posted = ring_.capacity - static_cast<std::uint32_t>(ring_.queue.size());
}

void Simulator::SendPkt(std::uint32_t packet, std::uint8_t channel) {
  PacketBuffer p = TakePacket(packet);
  if (p.headroom < kSdioHeaderSize) {
    SimError("dngl_sendpkt: packet has " + std::to_string(p.headroom) +
             " bytes of headroom, SDIO header needs " + std::to_string(kSdioHeaderSize));
  }
  host_queue_.push_back(EncodeSdio(channel, p.data));
  ++counters_.sendpkt_calls;
}

bool Simulator::StockRecv(std::uint32_t bound) {
  const Address veneer = syms_.Require("wlc_bmac_recv_rx_veneer");
  std::vector<std::uint32_t> received;
  while (received.size() < bound) {
    std::uint32_t p = RunFirmware(veneer, std::array{kDiHandleBase});
    if (p == 0) break;
    received.push_back(p);
  }
  DmaRxfill(0);

  for (std::uint32_t h : received) {
    PacketBuffer p = TakePacket(h);
    Dot11Frame f = ParseDot11(p.data, p.fcs_ok, p.channel);
    switch (f.type()) {
      case FrameType::kManagement:
        ++counters_.mgmt_consumed;
        break;
      case FrameType::kControl:
        ++counters_.ctl_consumed;
        break;
      case FrameType::kData:
        if (f.fcs_ok && (f.addr1 == config_.sta_mac || IsGroupAddress(f.addr1))) {
          p.data = Dot11ToEthernet(f);
          SendPkt(AllocPacket(std::move(p)), config_.stock_data_channel);
          ++counters_.data_delivered;
        } else {
          ++counters_.data_dropped;
        }
        break;
    }
  }
  return received.size() >= bound;
}

std::uint32_t Simulator::MonitorRecv(const TrapArgs& args) {
  const std::uint32_t fifo = args[1];
  const Address cnt = args[3];
  const std::int64_t bound_limit = config_.rxbnd;  // wlc_hw->wlc->pub->tunables->rxbnd

  auto forward = [&](std::uint32_t p) {
    PacketBuffer& buf = packets_.at(p);
    Dot11Frame meta;
    meta.channel = buf.channel;
    meta.fcs_ok = buf.fcs_ok;
    buf.Prepend(BuildRadiotap(meta));
    SendPkt(p, kMonitorChannel);
  };

  std::int64_t n = 0;
  if (!config_.corrected_loop) {
    do {
      if (std::uint32_t p = DmaRx(fifo)) forward(p);
      n++;
    } while (n < bound_limit);
  } else {
    while (n < bound_limit) {
      std::uint32_t p = DmaRx(fifo);
      if (p == 0) break;
      forward(p);
      n++;
    }
  }
  if (!image_.IsWritable(cnt, 4)) SimError("monitor_recv: count cell " + Hex32(cnt) + " is not writable");
  image_.WriteWord(cnt, image_.ReadWord(cnt) + static_cast<std::uint32_t>(n));

  DmaRxfill(fifo);
  if (config_.reassert_mctl) {
    Mctrl(config_.mctl.combined(), config_.mctl.combined(), "monitor_recv");
  }
  return n < bound_limit ? 0 : 1;
}

std::vector<Bytes> Simulator::TakeHostQueue() {
  std::vector<Bytes> out;
  out.swap(host_queue_);
  return out;
}

std::string Simulator::ReportJson() const {
  nlohmann::ordered_json doc;
  doc["mode"] = SimModeName(mode_);
  doc["maccontrol"] = Hex32(maccontrol_);
  doc["config"] = {{"rxbnd", config_.rxbnd},
                   {"mctl_combined", Hex32(config_.mctl.combined())},
                   {"stock_data_channel", config_.stock_data_channel},
                   {"corrected_loop", config_.corrected_loop},
                   {"ring_capacity", config_.ring_capacity}};
  const auto& c = counters_;
  doc["counters"] = {{"frames_offered", c.frames_offered},
                     {"frames_accepted", c.frames_accepted},
                     {"dropped_by_filter", c.dropped_by_filter},
                     {"dropped_by_overflow", c.dropped_by_overflow},
                     {"dma_rx_calls", c.dma_rx_calls},
                     {"sendpkt_calls", c.sendpkt_calls},
                     {"rxfill_calls", c.rxfill_calls},
                     {"mctrl_calls", c.mctrl_calls},
                     {"dispatches", c.dispatches},
                     {"mgmt_consumed", c.mgmt_consumed},
                     {"ctl_consumed", c.ctl_consumed},
                     {"data_delivered", c.data_delivered},
                     {"data_dropped", c.data_dropped},
                     {"instructions", c.instructions},
                     {"traps", c.traps}};
  doc["ring"] = {{"capacity", ring_.capacity},
                 {"posted", ring_.posted},
                 {"queued", ring_.queue.size()}};
  if (auto cell = syms_.Lookup("dpc_rx_count")) {
    doc["count_cell"] = image_.ReadWord(cell->address);
  }
  auto chain = nlohmann::ordered_json::array();
  for (const auto& s : dispatch_log_) {
    chain.push_back({{"dispatch", s.dispatch}, {"address", Hex32(s.address)}, {"name", s.name}});
  }
  doc["dispatch_trace"] = chain;
  auto hist = nlohmann::ordered_json::array();
  for (const auto& e : mctl_history_) {
    hist.push_back({{"dispatch", e.dispatch},
                    {"source", e.source},
                    {"mask", Hex32(e.mask)},
                    {"value", Hex32(e.value)},
                    {"maccontrol", Hex32(e.maccontrol)}});
  }
  doc["maccontrol_history"] = hist;
  return doc.dump(2) + "\n";
}

}  // namespace fwhook
