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

#include "fwhook/capture.hpp"

#include <fstream>
#include <iterator>
#include <random>

#include <json.hpp>

#include "fwhook/error.hpp"

namespace fwhook {

namespace {

[[noreturn]] void ParseError(const std::string& what) {
  throw Error(ErrorCode::kParse, what);
}

void Put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void Put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint16_t Get16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}
std::uint32_t Get32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 |
         static_cast<std::uint32_t>(b[at + 3]) << 24;
}

struct FieldLayout {
  std::uint8_t align;
  std::uint8_t size;
};

// Standard radiotap fields 0..22 (TSFT through timestamp).
constexpr FieldLayout kRadiotapFields[] = {
    {8, 8}, {1, 1}, {1, 1}, {2, 4}, {1, 2}, {1, 1}, {1, 1}, {2, 2},
    {2, 2}, {2, 2}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {2, 2}, {2, 2},
    {1, 1}, {1, 1}, {4, 8}, {1, 3}, {4, 8}, {2, 12}, {8, 12},
};

}  // namespace

std::uint16_t ChannelFrequency(std::uint8_t channel) {
  if (channel < 1 || channel > 14) {
    throw Error(ErrorCode::kInvalidArgument,
                "channel " + std::to_string(channel) + " is outside 1-14");
  }
  return channel == 14 ? 2484 : static_cast<std::uint16_t>(2407 + 5 * channel);
}

std::optional<std::uint8_t> FrequencyChannel(std::uint16_t mhz) {
  if (mhz == 2484) return 14;
  if (mhz >= 2412 && mhz <= 2472 && (mhz - 2407) % 5 == 0) {
    return static_cast<std::uint8_t>((mhz - 2407) / 5);
  }
  return std::nullopt;
}

Bytes BuildRadiotap(const Dot11Frame& frame, const RadiotapDefaults& defaults) {
  Bytes out = {0, 0, 0, 0};
  Put32(out, kRadiotapPresentFlags | kRadiotapPresentChannel);
  std::uint8_t flags = defaults.flags & ~kRadiotapFlagBadFcs;
  if (!frame.fcs_ok) flags |= kRadiotapFlagBadFcs;
  out.push_back(flags);
  out.push_back(0);  // align channel to 2
  Put16(out, ChannelFrequency(frame.channel));
  Put16(out, defaults.channel_flags);
  out[2] = static_cast<std::uint8_t>(out.size());
  return out;
}

RadiotapParse ParseRadiotap(std::span<const std::uint8_t> b) {
  if (b.size() < 8) ParseError("radiotap: truncated header");
  RadiotapParse r;
  RadiotapHeader& h = r.header;
  h.version = b[0];
  h.pad = b[1];
  h.length = Get16(b, 2);
  if (h.version != 0) ParseError("radiotap: unsupported version " + std::to_string(h.version));
  if (h.length < 8 || h.length > b.size()) ParseError("radiotap: truncated header");

  std::size_t at = 4;
  do {
    if (at + 4 > h.length) ParseError("radiotap: truncated present bitmap");
    h.present.push_back(Get32(b, at));
    at += 4;
  } while (h.present.back() & kRadiotapPresentExt);

  // Only the first word's standard fields are decoded.
  for (int bit = 0; bit < 29; ++bit) {
    if (!(h.present[0] & (1u << bit))) continue;
    if (bit >= static_cast<int>(std::size(kRadiotapFields))) break;
    const auto f = kRadiotapFields[bit];
    at = (at + f.align - 1) & ~std::size_t{f.align - 1u};
    if (at + f.size > h.length) ParseError("radiotap: field overruns header");
    if (bit == 1) h.flags = b[at];
    if (bit == 3) h.channel = RadiotapChannel{Get16(b, at), Get16(b, at + 2)};
    at += f.size;
  }
  r.rest.assign(b.begin() + h.length, b.end());
  return r;
}

Bytes MonitorRecord(const Dot11Frame& frame) {
  Bytes out = BuildRadiotap(frame);
  Bytes mac = SerializeDot11(frame);
  out.insert(out.end(), mac.begin(), mac.end());
  return out;
}

Dot11Frame ParseMonitorRecord(std::span<const std::uint8_t> bytes) {
  auto rt = ParseRadiotap(bytes);
  std::uint8_t channel = 0;
  if (rt.header.channel) {
    if (auto c = FrequencyChannel(rt.header.channel->frequency)) channel = *c;
  }
  if (channel == 0) ParseError("radiotap: missing or unknown channel");
  return ParseDot11(rt.rest, !rt.header.bad_fcs(), channel);
}

Bytes EncodeSdio(std::uint8_t channel, std::span<const std::uint8_t> payload) {
  const std::size_t len = kSdioHeaderSize + payload.size();
  if (len > 0xFFFF) throw Error(ErrorCode::kInvalidArgument, "SDIO payload too large");
  if (channel > 0xF) throw Error(ErrorCode::kInvalidArgument, "SDIO channel exceeds 4 bits");
  Bytes out;
  out.reserve(len);
  Put16(out, static_cast<std::uint16_t>(len));
  out.push_back(channel);
  out.push_back(0);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

SdioFrame DecodeSdio(std::span<const std::uint8_t> wire) {
  if (wire.size() < kSdioHeaderSize) ParseError("SDIO: truncated header");
  const std::uint16_t len = Get16(wire, 0);
  if (len != wire.size()) {
    ParseError("SDIO: length field " + std::to_string(len) + " but frame has " +
               std::to_string(wire.size()) + " bytes");
  }
  if (wire[2] > 0xF) ParseError("SDIO: channel exceeds 4 bits");
  if (wire[3] != 0) ParseError("SDIO: reserved flags are not zero");
  if (len == kSdioHeaderSize) ParseError("SDIO: empty payload");
  return SdioFrame{wire[2], wire[3], Bytes(wire.begin() + kSdioHeaderSize, wire.end())};
}

HostDelivery HostDeliver(const std::vector<Bytes>& host_queue) {
  HostDelivery d;
  for (std::size_t i = 0; i < host_queue.size(); ++i) {
    try {
      SdioFrame f = DecodeSdio(host_queue[i]);
      (f.channel == kMonitorChannel ? d.monitor : d.ethernet).push_back(std::move(f.payload));
    } catch (const Error& e) {
      d.malformed.push_back({i, e.what()});
    }
  }
  return d;
}

std::vector<CaptureRecord> StampRecords(const std::vector<Bytes>& payloads) {
  std::vector<CaptureRecord> out;
  out.reserve(payloads.size());
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    out.push_back({kCaptureEpochUs + (i + 1) * kCaptureStepUs, payloads[i]});
  }
  return out;
}

Bytes SerializePcap(const PcapFile& file) {
  if (file.linktype != kLinktypeEthernet && file.linktype != kLinktypeRadiotap) {
    throw Error(ErrorCode::kInvalidArgument,
                "pcap: unsupported linktype " + std::to_string(file.linktype));
  }
  Bytes out;
  Put32(out, 0xA1B2C3D4);
  Put16(out, 2);
  Put16(out, 4);
  Put32(out, 0);  // thiszone
  Put32(out, 0);  // sigfigs
  Put32(out, file.snaplen);
  Put32(out, file.linktype);
  for (const auto& r : file.records) {
    if (r.data.size() > file.snaplen) {
      throw Error(ErrorCode::kInvalidArgument, "pcap: record exceeds snaplen");
    }
    Put32(out, static_cast<std::uint32_t>(r.timestamp_us / 1000000));
    Put32(out, static_cast<std::uint32_t>(r.timestamp_us % 1000000));
    Put32(out, static_cast<std::uint32_t>(r.data.size()));
    Put32(out, static_cast<std::uint32_t>(r.data.size()));
    out.insert(out.end(), r.data.begin(), r.data.end());
  }
  return out;
}

PcapFile ParsePcap(std::span<const std::uint8_t> b) {
  if (b.size() < 24) ParseError("pcap: truncated global header");
  if (Get32(b, 0) != 0xA1B2C3D4) ParseError("pcap: bad magic");
  if (Get16(b, 4) != 2 || Get16(b, 6) != 4) ParseError("pcap: unsupported version");
  PcapFile f;
  f.snaplen = Get32(b, 16);
  f.linktype = Get32(b, 20);
  std::size_t at = 24;
  while (at < b.size()) {
    if (at + 16 > b.size()) ParseError("pcap: truncated record header");
    const std::uint32_t sec = Get32(b, at);
    const std::uint32_t usec = Get32(b, at + 4);
    const std::uint32_t incl = Get32(b, at + 8);
    if (usec >= 1000000) ParseError("pcap: microsecond field out of range");
    at += 16;
    if (incl > b.size() - at) ParseError("pcap: truncated record");
    f.records.push_back({std::uint64_t{sec} * 1000000 + usec,
                         Bytes(b.begin() + static_cast<std::ptrdiff_t>(at),
                               b.begin() + static_cast<std::ptrdiff_t>(at + incl))});
    at += incl;
  }
  return f;
}

void WritePcap(const std::vector<CaptureRecord>& records, std::uint32_t linktype,
               const std::filesystem::path& path) {
  Bytes bytes = SerializePcap(PcapFile{linktype, kPcapSnaplen, records});
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

PcapFile ReadPcap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  Bytes bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return ParsePcap(bytes);
}

// ---- corpus --------------------------------------------------------------

namespace {

constexpr const char* kFrameClassNames[kFrameClassCount] = {
    "own_data", "foreign_data", "broadcast_data", "own_beacon",
    "foreign_beacon", "control", "bad_fcs"};

class CorpusRng {
 public:
  explicit CorpusRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t Next() { return engine_(); }
  // Raw engine output keeps results identical across standard libraries.
  std::uint32_t Below(std::uint32_t n) { return static_cast<std::uint32_t>(engine_() % n); }
  Bytes RandomBytes(std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(engine_());
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

MacAddr RandomUnicast(CorpusRng& rng, const CorpusSpec& spec) {
  for (;;) {
    std::uint64_t v = rng.Next();
    MacAddr mac;
    for (int i = 0; i < 6; ++i) mac[i] = static_cast<std::uint8_t>(v >> (8 * i));
    mac[0] = static_cast<std::uint8_t>((mac[0] & 0xFC) | 0x02);
    if (mac != spec.sta_mac && mac != spec.joined_bssid) return mac;
  }
}

Bytes DataBody(CorpusRng& rng) {
  Bytes body = {0xAA, 0xAA, 0x03, 0x00, 0x00, 0x00, 0x08, 0x00};
  Bytes payload = rng.RandomBytes(16 + rng.Below(48));
  body.insert(body.end(), payload.begin(), payload.end());
  return body;
}

Bytes BeaconBody(CorpusRng& rng, const std::string& ssid, std::uint8_t channel) {
  Bytes body = rng.RandomBytes(8);  // TSF
  body.insert(body.end(), {0x64, 0x00, 0x01, 0x04});
  body.push_back(0x00);
  body.push_back(static_cast<std::uint8_t>(ssid.size()));
  body.insert(body.end(), ssid.begin(), ssid.end());
  body.insert(body.end(), {0x03, 0x01, channel});
  return body;
}

}  // namespace

const char* FrameClassName(FrameClass c) {
  return kFrameClassNames[static_cast<std::size_t>(c)];
}

std::size_t CorpusSpec::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

CorpusSpec ParseCorpusSpec(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    ParseError(std::string("corpus spec: ") + e.what());
  }
  if (!doc.is_object()) ParseError("corpus spec: expected a JSON object");
  CorpusSpec spec;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "seed") {
        spec.seed = value.get<std::uint64_t>();
      } else if (key == "sta_mac") {
        spec.sta_mac = ParseMac(value.get<std::string>());
      } else if (key == "joined_bssid") {
        spec.joined_bssid = ParseMac(value.get<std::string>());
      } else if (key == "channel") {
        auto ch = value.get<int>();
        if (ch < 1 || ch > 14) ParseError("corpus spec: channel must be 1-14");
        spec.channel = static_cast<std::uint8_t>(ch);
      } else if (key == "counts") {
        if (!value.is_object()) ParseError("corpus spec: counts must be an object");
        for (const auto& [name, n] : value.items()) {
          auto it = std::find_if(std::begin(kFrameClassNames), std::end(kFrameClassNames),
                                 [&](const char* c) { return name == c; });
          if (it == std::end(kFrameClassNames)) {
            ParseError("corpus spec: unknown frame class '" + name + "'");
          }
          if (!n.is_number_integer() || n.get<std::int64_t>() < 0) {
            ParseError("corpus spec: count for " + name + " must be >= 0");
          }
          spec.counts[static_cast<std::size_t>(it - std::begin(kFrameClassNames))] =
              n.get<std::uint32_t>();
        }
      } else {
        ParseError("corpus spec: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    ParseError(std::string("corpus spec: ") + e.what());
  }
  return spec;
}

CorpusSpec LoadCorpusSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return ParseCorpusSpec(text);
}

std::string SerializeCorpusSpec(const CorpusSpec& spec) {
  nlohmann::ordered_json doc;
  doc["seed"] = spec.seed;
  nlohmann::ordered_json counts;
  for (std::size_t i = 0; i < kFrameClassCount; ++i) counts[kFrameClassNames[i]] = spec.counts[i];
  doc["counts"] = counts;
  doc["sta_mac"] = FormatMac(spec.sta_mac);
  doc["joined_bssid"] = FormatMac(spec.joined_bssid);
  doc["channel"] = spec.channel;
  return doc.dump(2) + "\n";
}

std::vector<Dot11Frame> GenCorpus(const CorpusSpec& spec) {
  CorpusRng rng(spec.seed);
  std::vector<MacAddr> foreign_bss;
  for (int i = 0; i < 3; ++i) foreign_bss.push_back(RandomUnicast(rng, spec));

  std::vector<Dot11Frame> frames;
  frames.reserve(spec.total());
  for (std::size_t c = 0; c < kFrameClassCount; ++c) {
    for (std::uint32_t i = 0; i < spec.counts[c]; ++i) {
      Dot11Frame f;
      f.channel = spec.channel;
      switch (static_cast<FrameClass>(c)) {
        case FrameClass::kOwnData:
        case FrameClass::kBadFcs:
          f.subtype = rng.Below(2) ? Subtype::kQosData : Subtype::kData;
          f.addr1 = spec.sta_mac;
          f.addr2 = spec.joined_bssid;
          f.addr3 = RandomUnicast(rng, spec);
          f.body = DataBody(rng);
          f.fcs_ok = static_cast<FrameClass>(c) != FrameClass::kBadFcs;
          break;
        case FrameClass::kForeignData:
          f.subtype = Subtype::kData;
          f.addr1 = RandomUnicast(rng, spec);
          f.addr2 = foreign_bss[rng.Below(3)];
          f.addr3 = RandomUnicast(rng, spec);
          f.body = DataBody(rng);
          break;
        case FrameClass::kBroadcastData:
          f.subtype = Subtype::kData;
          f.addr1 = kBroadcastMac;
          f.addr2 = spec.joined_bssid;
          f.addr3 = RandomUnicast(rng, spec);
          f.body = DataBody(rng);
          break;
        case FrameClass::kOwnBeacon:
          f.subtype = Subtype::kBeacon;
          f.addr1 = kBroadcastMac;
          f.addr2 = f.addr3 = spec.joined_bssid;
          f.body = BeaconBody(rng, "home-net", spec.channel);
          break;
        case FrameClass::kForeignBeacon: {
          const std::uint32_t k = rng.Below(3);
          f.subtype = Subtype::kBeacon;
          f.addr1 = kBroadcastMac;
          f.addr2 = f.addr3 = foreign_bss[k];
          f.body = BeaconBody(rng, "neighbor-" + std::to_string(k), spec.channel);
          break;
        }
        case FrameClass::kControl: {
          static constexpr Subtype kinds[] = {Subtype::kAck, Subtype::kCts, Subtype::kRts};
          f.subtype = kinds[rng.Below(3)];
          f.addr1 = rng.Below(2) ? spec.sta_mac : RandomUnicast(rng, spec);
          if (f.subtype == Subtype::kRts) f.addr2 = RandomUnicast(rng, spec);
          break;
        }
      }
      frames.push_back(std::move(f));
    }
  }
  for (std::size_t i = frames.size(); i > 1; --i) {
    std::swap(frames[i - 1], frames[rng.Below(static_cast<std::uint32_t>(i))]);
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].type() != FrameType::kControl) {
      frames[i].seq = static_cast<std::uint16_t>(i & 0xFFF);
    }
  }
  return frames;
}

PcapFile CorpusToPcap(const std::vector<Dot11Frame>& frames) {
  std::vector<Bytes> payloads;
  payloads.reserve(frames.size());
  for (const auto& f : frames) payloads.push_back(MonitorRecord(f));
  return PcapFile{kLinktypeRadiotap, kPcapSnaplen, StampRecords(payloads)};
}

std::vector<Dot11Frame> CorpusFromPcap(const PcapFile& file) {
  if (file.linktype != kLinktypeRadiotap) {
    ParseError("corpus pcap must use linktype 127 (radiotap)");
  }
  std::vector<Dot11Frame> frames;
  frames.reserve(file.records.size());
  for (const auto& r : file.records) frames.push_back(ParseMonitorRecord(r.data));
  return frames;
}

}  // namespace fwhook
