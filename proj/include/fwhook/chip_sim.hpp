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

// Behavioral model of the chip's receive pipeline: D11 filtering under
// maccontrol, the DMA receive ring, the FIQ dispatch chain, the stock and
// monitor-mode receive handlers, dngl_sendpkt framing and the firmware
// console. Firmware code present in the image runs on the Thumb interpreter;
// everything it calls is a native trap handler.

#ifndef FWHOOK_CHIP_SIM_HPP_
#define FWHOOK_CHIP_SIM_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fwhook/capture.hpp"
#include "fwhook/dot11.hpp"
#include "fwhook/firmware_image.hpp"
#include "fwhook/patcher.hpp"
#include "fwhook/symbol_map.hpp"
#include "fwhook/thumb_interp.hpp"

namespace fwhook {

// Opaque handles the firmware passes around. None of them are addresses.
inline constexpr std::uint32_t kWlcHwHandle = 0x57C00000;
inline constexpr std::uint32_t kSdioInfoHandle = 0x5D100000;
inline constexpr std::uint32_t kDiHandleBase = 0xD1000000;  // + fifo
inline constexpr std::uint32_t kFifoCount = 4;

// Accept/drop decision of the D11 core, checked in order: bad FCS, control,
// foreign beacon or probe response, foreign unicast.
bool D11Accept(const Dot11Frame& frame, std::uint32_t maccontrol,
               const MacAddr& sta_mac, const MacAddr& joined_bssid,
               const MctlBits& bits = {});

struct PacketBuffer {
  Bytes data;
  std::size_t headroom = 0;
  std::uint32_t fifo = 0;
  // Receive descriptor.
  std::uint8_t channel = 0;
  bool fcs_ok = true;

  // Throws kSim when `bytes` does not fit in the headroom.
  void Prepend(std::span<const std::uint8_t> bytes);
};

// queue.size() + posted <= capacity at all times.
struct DmaRing {
  std::uint32_t capacity = 32;
  std::uint32_t posted = 32;
  std::deque<Dot11Frame> queue;
};

// Fixed-size console that drops its oldest bytes when full.
class ConsoleRing {
 public:
  explicit ConsoleRing(std::size_t capacity = 16 * 1024) : capacity_(capacity) {}
  void Write(std::string_view text);
  const std::string& Dump() const { return text_; }
  std::uint64_t bytes_written() const { return written_; }

 private:
  std::size_t capacity_;
  std::string text_;
  std::uint64_t written_ = 0;
};

struct SimConfig {
  std::uint32_t rxbnd = 8;
  MctlBits mctl;
  std::uint8_t stock_data_channel = 0x2;
  bool corrected_loop = false;
  // Test knob: when false the monitor handler skips its wlc_bmac_mctrl call.
  bool reassert_mctl = true;
  std::uint32_t ring_capacity = 32;
  std::uint32_t headroom = 32;
  MacAddr sta_mac = CorpusSpec{}.sta_mac;
  MacAddr joined_bssid = CorpusSpec{}.joined_bssid;
  std::uint64_t fuel = 10000;

  // Throws kInvalidArgument.
  void Validate() const;
};

enum class SimMode { kStock, kPatched };
const char* SimModeName(SimMode mode);

struct SimCounters {
  std::uint64_t frames_offered = 0;
  std::uint64_t frames_accepted = 0;
  std::uint64_t dropped_by_filter = 0;
  std::uint64_t dropped_by_overflow = 0;
  std::uint64_t dma_rx_calls = 0;
  std::uint64_t sendpkt_calls = 0;
  std::uint64_t rxfill_calls = 0;
  std::uint64_t mctrl_calls = 0;
  std::uint64_t dispatches = 0;
  std::uint64_t mgmt_consumed = 0;
  std::uint64_t ctl_consumed = 0;
  std::uint64_t data_delivered = 0;
  std::uint64_t data_dropped = 0;
  std::uint64_t instructions = 0;
  std::uint64_t traps = 0;

  bool operator==(const SimCounters&) const = default;
};

struct DispatchStep {
  std::uint64_t dispatch = 0;
  Address address = 0;
  std::string name;
};

struct MctlEvent {
  std::uint64_t dispatch = 0;  // 0 = during boot
  std::string source;
  std::uint32_t mask = 0;
  std::uint32_t value = 0;
  std::uint32_t maccontrol = 0;  // after the write
};

class Simulator {
 public:
  // boot: verifies the manifest against the image, builds the trap table and
  // runs wlc_coreinit from the image so maccontrol reflects its words.
  // Patched mode iff the manifest registers a monitor_recv trap. MCTL bits
  // recorded in the manifest take precedence over config.mctl.
  Simulator(FirmwareImage image, SymbolMap syms, const PatchManifest* manifest,
            SimConfig config = {});
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void Mctrl(std::uint32_t mask, std::uint32_t value, std::string_view source = "host");
  bool InjectAirFrame(const Dot11Frame& frame);
  // One interrupt: walks the dispatch chain and runs wlc_bmac_recv once.
  // Returns the handler's result.
  std::uint32_t DispatchInterrupt();

  // Native firmware routines, also reachable as traps.
  std::uint32_t DmaRx(std::uint32_t fifo);  // packet handle or 0
  void DmaRxfill(std::uint32_t fifo);
  void SendPkt(std::uint32_t packet, std::uint8_t channel);
  bool StockRecv(std::uint32_t bound);
  std::uint32_t MonitorRecv(const TrapArgs& args);

  // Allocates a packet buffer and returns its handle (for tests and traps).
  std::uint32_t AllocPacket(PacketBuffer buffer);
  const PacketBuffer* Packet(std::uint32_t handle) const;

  std::string ConsoleDump() const { return console_.Dump(); }
  std::string ReportJson() const;

  SimMode mode() const { return mode_; }
  std::uint32_t maccontrol() const { return maccontrol_; }
  bool interrupt_pending() const { return interrupt_pending_; }
  const SimCounters& counters() const { return counters_; }
  const DmaRing& ring() const { return ring_; }
  const std::vector<Bytes>& host_queue() const { return host_queue_; }
  std::vector<Bytes> TakeHostQueue();
  const std::vector<DispatchStep>& dispatch_log() const { return dispatch_log_; }
  const std::vector<MctlEvent>& mctl_history() const { return mctl_history_; }
  // Addresses executed by the interpreter during the last dispatch.
  const std::vector<Address>& last_dispatch_pcs() const { return last_pcs_; }
  std::optional<std::uint32_t> last_return() const { return last_return_; }
  const FirmwareImage& image() const { return image_; }
  FirmwareImage& image() { return image_; }
  const SimConfig& config() const { return config_; }
  const TrapTable& traps() const { return traps_; }

 private:
  class Env;
  std::uint32_t RunFirmware(Address entry, std::span<const std::uint32_t> args);
  std::uint32_t FifoFromDi(std::uint32_t di) const;
  PacketBuffer TakePacket(std::uint32_t handle);

  FirmwareImage image_;
  SymbolMap syms_;
  SimConfig config_;
  SimMode mode_ = SimMode::kStock;
  TrapTable traps_;
  std::unique_ptr<Env> env_;
  std::uint32_t maccontrol_ = 0;
  bool interrupt_pending_ = false;
  DmaRing ring_;
  ConsoleRing console_;
  SimCounters counters_;
  std::map<std::uint32_t, PacketBuffer> packets_;
  std::uint32_t next_packet_ = 1;
  std::vector<Bytes> host_queue_;
  std::vector<DispatchStep> dispatch_log_;
  std::vector<MctlEvent> mctl_history_;
  std::vector<Address> last_pcs_;
  std::optional<std::uint32_t> last_return_;
};

}  // namespace fwhook

#endif  // FWHOOK_CHIP_SIM_HPP_
