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

// Host-side view of captured traffic: radiotap headers, the SDIO frame
// header used on the bus, demultiplexing by SDIO channel, classic pcap files,
// and the seeded frame corpus used to drive simulations.

#ifndef FWHOOK_CAPTURE_HPP_
#define FWHOOK_CAPTURE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fwhook/dot11.hpp"

namespace fwhook {

// ---- radiotap ------------------------------------------------------------

inline constexpr std::uint32_t kRadiotapPresentFlags = 1u << 1;
inline constexpr std::uint32_t kRadiotapPresentChannel = 1u << 3;
inline constexpr std::uint32_t kRadiotapPresentExt = 1u << 31;
inline constexpr std::uint8_t kRadiotapFlagBadFcs = 0x40;

struct RadiotapDefaults {
  std::uint8_t flags = 0;
  std::uint16_t channel_flags = 0x00A0;  // 2 GHz, CCK
};

struct RadiotapChannel {
  std::uint16_t frequency = 0;
  std::uint16_t flags = 0;
  bool operator==(const RadiotapChannel&) const = default;
};

struct RadiotapHeader {
  std::uint8_t version = 0;
  std::uint8_t pad = 0;
  std::uint16_t length = 0;
  std::vector<std::uint32_t> present;  // all present words, extension chain included
  std::optional<std::uint8_t> flags;
  std::optional<RadiotapChannel> channel;

  bool bad_fcs() const { return flags && (*flags & kRadiotapFlagBadFcs); }
  bool operator==(const RadiotapHeader&) const = default;
};

// f = 2407 + 5 * channel for channels 1-13, 2484 for channel 14.
std::uint16_t ChannelFrequency(std::uint8_t channel);
std::optional<std::uint8_t> FrequencyChannel(std::uint16_t mhz);

Bytes BuildRadiotap(const Dot11Frame& frame, const RadiotapDefaults& defaults = {});

struct RadiotapParse {
  RadiotapHeader header;
  Bytes rest;
};

// Throws kParse on truncation or a nonzero version. Fields after the first
// one it does not know are skipped using the header length.
RadiotapParse ParseRadiotap(std::span<const std::uint8_t> bytes);

// Radiotap + 802.11, the payload of a monitor-channel SDIO frame.
Bytes MonitorRecord(const Dot11Frame& frame);
Dot11Frame ParseMonitorRecord(std::span<const std::uint8_t> bytes);

// ---- SDIO ----------------------------------------------------------------

inline constexpr std::size_t kSdioHeaderSize = 4;
inline constexpr std::uint8_t kMonitorChannel = 0xF;

struct SdioFrame {
  std::uint8_t channel = 0;
  std::uint8_t flags = 0;
  Bytes payload;
  bool operator==(const SdioFrame&) const = default;
};

// [length lo, length hi, channel, flags]; length counts header + payload.
Bytes EncodeSdio(std::uint8_t channel, std::span<const std::uint8_t> payload);
// Throws kParse on a short buffer, length mismatch, channel > 0xF, nonzero
// flags or an empty payload.
SdioFrame DecodeSdio(std::span<const std::uint8_t> wire);

struct MalformedFrame {
  std::size_t index = 0;
  std::string reason;
};

struct HostDelivery {
  std::vector<Bytes> monitor;   // radiotap + 802.11
  std::vector<Bytes> ethernet;  // Ethernet II
  std::vector<MalformedFrame> malformed;
};

// Splits the bus stream by channel; malformed frames are reported, not thrown.
HostDelivery HostDeliver(const std::vector<Bytes>& host_queue);

// ---- pcap ----------------------------------------------------------------

inline constexpr std::uint32_t kLinktypeEthernet = 1;
inline constexpr std::uint32_t kLinktypeRadiotap = 127;
inline constexpr std::uint32_t kPcapSnaplen = 65535;
inline constexpr std::uint64_t kCaptureEpochUs = 1420070400ull * 1000000ull;
inline constexpr std::uint64_t kCaptureStepUs = 1000;

struct CaptureRecord {
  std::uint64_t timestamp_us = 0;
  Bytes data;
  bool operator==(const CaptureRecord&) const = default;
};

struct PcapFile {
  std::uint32_t linktype = kLinktypeRadiotap;
  std::uint32_t snaplen = kPcapSnaplen;
  std::vector<CaptureRecord> records;
  bool operator==(const PcapFile&) const = default;
};

// Timestamps from the deterministic counter: epoch + (i + 1) * step.
std::vector<CaptureRecord> StampRecords(const std::vector<Bytes>& payloads);

Bytes SerializePcap(const PcapFile& file);
PcapFile ParsePcap(std::span<const std::uint8_t> bytes);
void WritePcap(const std::vector<CaptureRecord>& records, std::uint32_t linktype,
               const std::filesystem::path& path);
PcapFile ReadPcap(const std::filesystem::path& path);

// ---- corpus --------------------------------------------------------------

enum class FrameClass {
  kOwnData,
  kForeignData,
  kBroadcastData,
  kOwnBeacon,
  kForeignBeacon,
  kControl,
  kBadFcs,
};
inline constexpr std::size_t kFrameClassCount = 7;
const char* FrameClassName(FrameClass c);

struct CorpusSpec {
  std::uint64_t seed = 1;
  std::array<std::uint32_t, kFrameClassCount> counts{};
  MacAddr sta_mac = {0x02, 0x11, 0x22, 0x33, 0x44, 0x55};
  MacAddr joined_bssid = {0x02, 0xAA, 0xBB, 0xCC, 0xDD, 0xEE};
  std::uint8_t channel = 6;

  std::uint32_t& count(FrameClass c) { return counts[static_cast<std::size_t>(c)]; }
  std::uint32_t count(FrameClass c) const { return counts[static_cast<std::size_t>(c)]; }
  std::size_t total() const;
  bool operator==(const CorpusSpec&) const = default;
};

// JSON object: seed, counts{own_data, ...}, sta_mac, joined_bssid, channel.
// Unknown keys are rejected. Throws kParse.
CorpusSpec ParseCorpusSpec(std::string_view json_text);
CorpusSpec LoadCorpusSpec(const std::filesystem::path& path);
std::string SerializeCorpusSpec(const CorpusSpec& spec);

// Pure function of the spec.
std::vector<Dot11Frame> GenCorpus(const CorpusSpec& spec);

// Corpus files are radiotap pcaps.
PcapFile CorpusToPcap(const std::vector<Dot11Frame>& frames);
std::vector<Dot11Frame> CorpusFromPcap(const PcapFile& file);

}  // namespace fwhook

#endif  // FWHOOK_CAPTURE_HPP_
